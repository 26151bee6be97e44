#pragma once

// Rational approximants in partial-fraction form
//   r(x) = constant + Re sum_k c_k / (x - z_k)
// for exp(-x), sqrt(x), log(x) and tanh(sqrt(x)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "slq/core.hpp"
#include "slq/elliptic.hpp"
#include "slq/functions.hpp"

namespace slq {

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double midpoint() const noexcept { return 0.5 * (a + b); }
};

struct RationalApproximant {
  FunctionKind kind = FunctionKind::exp_neg;
  Interval interval;
  std::vector<Complex> poles;
  std::vector<Complex> coeffs;
  double constant = 0.0;
  double eps = std::numeric_limits<double>::quiet_NaN();  // measured uniform error on the interval
  std::string construction;                               // which builder produced the terms

  std::size_t K() const noexcept { return poles.size(); }
};

/// constant + Re sum_k c_k / (x - z_k).
inline double evaluate(const RationalApproximant& r, double x) {
  double s = 0.0;
  for (std::size_t k = 0; k < r.poles.size(); ++k) {
    const Complex d = x - r.poles[k];
    if (d == Complex(0.0, 0.0)) throw DomainError("rational approximant evaluated at a pole", x);
    s += (r.coeffs[k] / d).real();
  }
  return r.constant + s;
}

/// Smallest distance from any pole to the real segment [a, b].
inline double pole_distance(const RationalApproximant& r) {
  double best = std::numeric_limits<double>::infinity();
  for (const Complex& z : r.poles) {
    const double x = std::clamp(z.real(), r.interval.a, r.interval.b);
    best = std::min(best, std::abs(z - x));
  }
  return best;
}

/// Chebyshev points of the first kind on [a, b] plus both endpoints.
inline Vector chebyshev_sample(const Interval& iv, std::size_t count = 10000) {
  Vector x;
  x.reserve(count + 2);
  x.push_back(iv.a);
  x.push_back(iv.b);
  const double c = iv.midpoint(), h = 0.5 * (iv.b - iv.a);
  for (std::size_t j = 0; j < count; ++j)
    x.push_back(c + h * std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(count)));
  return x;
}

/// max |f(x) - r(x)| over the Chebyshev sample of r's interval.
template <std::invocable<double> F>
double uniform_error(const RationalApproximant& r, F&& f, std::size_t count = 10000) {
  double worst = 0.0;
  for (double x : chebyshev_sample(r.interval, count)) worst = std::max(worst, std::abs(f(x) - evaluate(r, x)));
  return worst;
}

inline double uniform_error(const RationalApproximant& r, std::size_t count = 10000) {
  return uniform_error(r, ScalarFunction(r.kind), count);
}

namespace detail {

/// Collapses conjugate pole pairs: keeps the upper member with twice the coefficient.
/// Real poles are kept unchanged.
inline void halve_conjugates(std::vector<Complex>& poles, std::vector<Complex>& coeffs) {
  std::vector<Complex> p, c;
  for (std::size_t k = 0; k < poles.size(); ++k) {
    const double tol = 1e-12 * std::max(1.0, std::abs(poles[k]));
    if (poles[k].imag() > tol) {
      p.push_back(poles[k]);
      c.push_back(2.0 * coeffs[k]);
    } else if (std::abs(poles[k].imag()) <= tol) {
      p.push_back(Complex(poles[k].real(), 0.0));
      c.push_back(coeffs[k]);
    }
  }
  poles = std::move(p);
  coeffs = std::move(c);
}

// DFT with numpy's sign convention: out[k] = sum_j x[j] exp(-2 pi i j k / n), for k < kmax.
inline std::vector<Complex> dft(const std::vector<Complex>& x, std::size_t n, std::size_t kmax) {
  std::vector<Complex> out(kmax);
  for (std::size_t k = 0; k < kmax; ++k) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      s += x[j] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

struct PoleSet {
  std::vector<Complex> poles, coeffs;
};

// Caratheodory-Fejer approximation of exp on (-inf, 0] with numerator and denominator
// degree N, after Trefethen, Weideman and Schmelzer (2006). The returned poles and
// coefficients represent exp(-x) ~ Re sum c / (x - z) for x >= 0, before halving.
inline PoleSet cf_exp(std::size_t N) {
  constexpr std::size_t L = 75, nf = 1024;
  constexpr double scl = 9.0;
  const double pi = std::numbers::pi;
  std::vector<Complex> w(nf);
  std::vector<Complex> F(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    w[j] = std::polar(1.0, 2.0 * pi * static_cast<double>(j) / nf);
    const double t = w[j].real();
    F[j] = std::exp(scl * (t - 1.0) / (t + 1.0 + 1e-16));
  }
  const std::vector<Complex> Fh = dft(F, nf, L + 1);
  Vector c(L + 1);
  for (std::size_t k = 0; k <= L; ++k) c[k] = Fh[k].real() / nf;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; i + j < L; ++j) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c[1 + i + j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto n_idx = static_cast<Eigen::Index>(N);
  const double s = svd.singularValues()(n_idx);
  std::vector<Complex> u(L), v(L);
  for (std::size_t i = 0; i < L; ++i) {
    u[i] = svd.matrixU()(static_cast<Eigen::Index>(L - 1 - i), n_idx);
    v[i] = svd.matrixV()(static_cast<Eigen::Index>(i), n_idx);
  }
  const std::vector<Complex> uh = dft(u, nf, nf), vh = dft(v, nf, nf);

  // Roots of v(x) = v[0] x^{L-1} + ... + v[L-1] outside the unit disk.
  const Eigen::Index deg = static_cast<Eigen::Index>(L - 1);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (Eigen::Index j = 0; j < deg; ++j) comp(0, j) = -v[static_cast<std::size_t>(j + 1)].real() / v[0].real();
  for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<Complex> q;
  for (Eigen::Index i = 0; i < deg; ++i)
    if (std::abs(es.eigenvalues()(i)) > 1.0) q.push_back(es.eigenvalues()(i));
  if (q.size() != N) throw NumericalFailure("exp approximant: unexpected number of exterior roots");

  // Numerator: p(w) = rt(w) * prod (w - q_i), truncated to degree N.
  std::vector<Complex> pt(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    Complex f = 0.0, wk = 1.0;
    for (std::size_t k = 0; k <= L; ++k) {
      f += c[k] * wk;
      wk *= w[j];
    }
    const Complex rt = f - s * std::pow(w[j], static_cast<int>(L)) * uh[j] / vh[j];
    Complex qc = 1.0;
    for (const Complex& qi : q) qc *= (w[j] - qi);
    pt[j] = rt * qc;
  }
  const std::vector<Complex> ph = dft(pt, nf, N + 1);

  PoleSet out;
  for (std::size_t i = 0; i < N; ++i) {
    Complex num = 0.0, qk = 1.0;
    for (std::size_t k = 0; k <= N; ++k) {
      num += (ph[k].real() / nf) * qk;
      qk *= q[i];
    }
    Complex den = 1.0;
    for (std::size_t j = 0; j < N; ++j)
      if (j != i) den *= (q[i] - q[j]);
    const Complex a = num / den;
    const Complex zk = scl * (q[i] - 1.0) * (q[i] - 1.0) / ((q[i] + 1.0) * (q[i] + 1.0));
    const Complex rho = 4.0 * a * scl * (q[i] - 1.0) / ((q[i] + 1.0) * (q[i] + 1.0) * (q[i] + 1.0));
    out.poles.push_back(-zk);
    out.coeffs.push_back(-rho);
  }
  return out;
}

inline const PoleSet& cf_exp_cached(std::size_t N) {
  static std::mutex mu;
  static std::map<std::size_t, PoleSet> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, cf_exp(N)).first;
  return it->second;
}

// Trapezoid rule on the parabolic Hankel contour s(theta) = N(0.1309 - 0.1194 theta^2 + 0.25 i theta).
inline PoleSet parabolic_exp(std::size_t N) {
  const double pi = std::numbers::pi;
  const double Nd = static_cast<double>(N);
  PoleSet out;
  for (std::size_t k = 1; k <= N; ++k) {
    const double th = -pi + (static_cast<double>(k) - 0.5) * 2.0 * pi / Nd;
    const Complex s = Nd * Complex(0.1309 - 0.1194 * th * th, 0.25 * th);
    const Complex ds = Nd * Complex(-0.2388 * th, 0.25);
    out.poles.push_back(-s);
    out.coeffs.push_back(Complex(0.0, -1.0 / Nd) * std::exp(s) * ds);
  }
  return out;
}

// Conformal map of the annulus-like strip onto C \ ((-inf, 0] U [m, M]) used by the
// trapezoid rules for Cauchy integrals over [m, M]. Returns nodes z_j and dz/dt * h.
struct MappedNodes {
  std::vector<Complex> z, dz;
  double h = 0.0;
};

inline MappedNodes strip_nodes(std::size_t N, double m, double M) {
  const double ratio = std::sqrt(M / m);
  const double k = (ratio - 1.0) / (ratio + 1.0);
  const double kp = 2.0 * std::sqrt(ratio) / (ratio + 1.0);
  const Elliptic ell(k, kp);
  const double K = ell.K(), Kp = ell.Kp();
  const double c = std::sqrt(m * M);
  MappedNodes out;
  out.h = 2.0 * K / static_cast<double>(N);
  for (std::size_t j = 1; j <= N; ++j) {
    const Complex t(-K + (static_cast<double>(j) - 0.5) * out.h, 0.5 * Kp);
    const JacobiTriple J = ell(t);
    const Complex denom = 1.0 / k - J.sn;
    out.z.push_back(c * (1.0 / k + J.sn) / denom);
    out.dz.push_back(c * (2.0 / k) / (denom * denom) * J.cn * J.dn);
  }
  return out;
}

inline void check_interval(const Interval& iv, bool allow_zero) {
  if (allow_zero)
    require(iv.a >= 0.0 && iv.b > iv.a, "rational builder: need 0 <= a < b");
  else
    require(iv.a > 0.0 && iv.b > iv.a, "rational builder: need 0 < a < b");
}

inline void check_poles(const RationalApproximant& r) {
  if (!(pole_distance(r) > 0.0)) throw NumericalFailure("rational builder: pole on the approximation interval");
}

}  // namespace detail

/// Largest K for which the Caratheodory-Fejer exp construction is numerically reliable.
inline constexpr std::size_t exp_cf_max_K = 7;
/// Number of terms used by the parabolic-contour fallback (uniform error near 1e-14).
inline constexpr std::size_t exp_fallback_K = 16;
inline constexpr std::size_t max_K = 40;

/// exp(-x) on [a, b] with a >= 0. K <= 7 uses the near-best Caratheodory-Fejer approximant
/// (2K poles, halved by conjugate symmetry). Larger K fall back to a parabolic contour
/// with at least `exp_fallback_K` terms.
inline RationalApproximant build_exp(std::size_t K, Interval iv) {
  detail::check_interval(iv, true);
  if (K < 1 || K > max_K) throw UnsupportedParameter("build_exp: K must lie in 1..40");
  RationalApproximant r;
  r.kind = FunctionKind::exp_neg;
  r.interval = iv;
  detail::PoleSet ps;
  if (K <= exp_cf_max_K) {
    ps = detail::cf_exp_cached(2 * K);
    r.construction = "caratheodory_fejer";
  } else {
    ps = detail::parabolic_exp(2 * std::max(K, exp_fallback_K));
    r.construction = "parabolic_contour";
  }
  detail::halve_conjugates(ps.poles, ps.coeffs);
  r.poles = std::move(ps.poles);
  r.coeffs = std::move(ps.coeffs);
  detail::check_poles(r);
  r.eps = uniform_error(r);
  return r;
}

/// sqrt(x) on [a, b]: poles on the negative real axis from the elliptic substitution
/// of the Cauchy integral of x^{-1/2} (Hale, Higham and Trefethen, method 3).
inline RationalApproximant build_sqrt(std::size_t K, Interval iv) {
  detail::check_interval(iv, false);
  if (K < 1 || K > max_K) throw UnsupportedParameter("build_sqrt: K must lie in 1..40");
  const double m = iv.a, M = iv.b;
  const double kp2 = 1.0 - m / M;
  const Elliptic ell(std::sqrt(kp2), std::sqrt(m / M));
  const double Kp = ell.K();
  RationalApproximant r;
  r.kind = FunctionKind::sqrt;
  r.interval = iv;
  r.construction = "elliptic_method3";
  CompensatedSum constant;
  for (std::size_t j = 1; j <= K; ++j) {
    const double u = (static_cast<double>(j) - 0.5) * Kp / static_cast<double>(K);
    const JacobiTriple J = ell.real(u);
    const double sn = J.sn.real(), cn = J.cn.real(), dn = J.dn.real();
    const double gamma = 2.0 * std::sqrt(m) * Kp / (std::numbers::pi * static_cast<double>(K)) * dn / (cn * cn);
    const double z = -m * (sn / cn) * (sn / cn);
    r.poles.emplace_back(z, 0.0);
    r.coeffs.emplace_back(gamma * z, 0.0);
    constant.add(gamma);
  }
  r.constant = constant.value();
  detail::check_poles(r);
  r.eps = uniform_error(r);
  return r;
}

/// log(x) on [a, b]: trapezoid rule on the conformal map applied in w = sqrt(z)
/// (Hale, Higham and Trefethen, method 2), rewritten as canonical form plus a constant.
inline RationalApproximant build_log(std::size_t K, Interval iv) {
  detail::check_interval(iv, false);
  if (K < 1 || K > max_K) throw UnsupportedParameter("build_log: K must lie in 1..40");
  const detail::MappedNodes nodes = detail::strip_nodes(K, std::sqrt(iv.a), std::sqrt(iv.b));
  RationalApproximant r;
  r.kind = FunctionKind::log;
  r.interval = iv;
  r.construction = "elliptic_method2";
  for (std::size_t j = 0; j < K; ++j) {
    const Complex w = nodes.z[j];
    const Complex Y = 2.0 * (2.0 * std::log(w)) * nodes.dz[j] / w * (nodes.h / std::numbers::pi);
    const Complex z = w * w;
    r.poles.push_back(z);
    r.coeffs.push_back(Complex(0.0, -1.0) * Y * z);
    r.constant += Y.imag();
  }
  detail::check_poles(r);
  r.eps = uniform_error(r);
  return r;
}

/// tanh(sqrt(x)) on [a, b]: trapezoid rule on the conformal map applied to f(z)/z
/// (Hale, Higham and Trefethen, method 1), rewritten as canonical form plus a constant.
inline RationalApproximant build_tanh_sqrt(std::size_t K, Interval iv) {
  detail::check_interval(iv, false);
  if (K < 1 || K > max_K) throw UnsupportedParameter("build_tanh_sqrt: K must lie in 1..40");
  const detail::MappedNodes nodes = detail::strip_nodes(K, iv.a, iv.b);
  RationalApproximant r;
  r.kind = FunctionKind::tanh_sqrt;
  r.interval = iv;
  r.construction = "elliptic_method1";
  for (std::size_t j = 0; j < K; ++j) {
    const Complex z = nodes.z[j];
    const Complex Y = (nodes.h / std::numbers::pi) * std::tanh(std::sqrt(z)) / z * nodes.dz[j];
    r.poles.push_back(z);
    r.coeffs.push_back(Complex(0.0, -1.0) * Y * z);
    r.constant += Y.imag();
  }
  detail::check_poles(r);
  r.eps = uniform_error(r);
  return r;
}

inline RationalApproximant build_rational(FunctionKind kind, std::size_t K, Interval iv) {
  switch (kind) {
    case FunctionKind::exp_neg: return build_exp(K, iv);
    case FunctionKind::sqrt: return build_sqrt(K, iv);
    case FunctionKind::log: return build_log(K, iv);
    case FunctionKind::tanh_sqrt: return build_tanh_sqrt(K, iv);
  }
  throw UnsupportedParameter("build_rational: unknown kind");
}

/// Smallest K in 1..k_cap whose uniform error meets `target`.
inline RationalApproximant choose_K(FunctionKind kind, Interval iv, double target, std::size_t k_cap = max_K) {
  require(target > 0.0, "choose_K: target must be positive");
  double best_eps = std::numeric_limits<double>::infinity();
  std::size_t best_K = 0;
  for (std::size_t K = 1; K <= k_cap; ++K) {
    RationalApproximant r = build_rational(kind, K, iv);
    if (r.eps <= target) return r;
    if (r.eps < best_eps) {
      best_eps = r.eps;
      best_K = r.K();
    }
  }
  throw UnreachableAccuracy("choose_K: target " + std::to_string(target) + " not reached", best_eps, best_K);
}

inline nlohmann::json to_json(const RationalApproximant& r) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(r.kind));
  j["interval"] = {r.interval.a, r.interval.b};
  j["K"] = r.K();
  j["construction"] = r.construction;
  j["constant"] = r.constant;
  j["eps"] = r.eps;
  auto& poles = j["poles"] = nlohmann::json::array();
  auto& coeffs = j["coeffs"] = nlohmann::json::array();
  for (std::size_t k = 0; k < r.K(); ++k) {
    poles.push_back({r.poles[k].real(), r.poles[k].imag()});
    coeffs.push_back({r.coeffs[k].real(), r.coeffs[k].imag()});
  }
  return j;
}

inline RationalApproximant rational_from_json(const nlohmann::json& j) {
  RationalApproximant r;
  r.kind = parse_function_kind(j.at("kind").get<std::string>());
  r.interval = {j.at("interval").at(0).get<double>(), j.at("interval").at(1).get<double>()};
  r.construction = j.value("construction", std::string{});
  r.constant = j.at("constant").get<double>();
  r.eps = j.at("eps").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("eps").get<double>();
  for (const auto& p : j.at("poles")) r.poles.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& c : j.at("coeffs")) r.coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  require(r.poles.size() == r.coeffs.size(), "rational_from_json: pole/coefficient count mismatch");
  require(r.K() == j.at("K").get<std::size_t>(), "rational_from_json: K does not match the pole list");
  return r;
}

}  // namespace slq
