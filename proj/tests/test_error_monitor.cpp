#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "slq/error_monitor.hpp"
#include "slq/lanczos.hpp"
#include "slq/oracles.hpp"

using namespace slq;

namespace {

RationalApproximant single_pole(Complex z, Complex c = 1.0) {
  RationalApproximant r;
  r.poles = {z};
  r.coeffs = {c};
  return r;
}

// Stand-alone replay of the lookback rule, mirroring ErrorMonitor's documented semantics,
// used to cross-check the monitor on sequences produced by real runs.
std::optional<Convergence> replay(const Vector& d, double tol, double t) {
  std::vector<std::size_t> open;
  Vector prefix{0.0};
  for (std::size_t j = 1; j <= d.size(); ++j) {
    prefix.push_back(prefix.back() + d[j - 1]);
    std::optional<Convergence> hit;
    std::vector<std::size_t> keep;
    for (std::size_t m : open) {
      if (std::abs(d[j - 1]) <= t * std::abs(d[m - 1])) {
        const double sum = prefix[j - 1] - prefix[m - 1];
        if (!hit && std::abs(sum) < tol) hit = Convergence{m, j, sum};
      } else {
        keep.push_back(m);
      }
    }
    if (hit) return hit;
    open = keep;
    open.push_back(j);
  }
  return std::nullopt;
}

Eigen::MatrixXcd dense_complex(const SymTridiagonal& T, Complex z) {
  const auto m = static_cast<Eigen::Index>(T.order());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    M(i, i) = T.alphas[static_cast<std::size_t>(i)] - z;
    if (i + 1 < m) M(i, i + 1) = M(i + 1, i) = T.betas[static_cast<std::size_t>(i)];
  }
  return M;
}

double rational_quadrature(const RationalApproximant& r, const SymTridiagonal& T) {
  return quadrature_value(tridiag_eigen(T), [&](double x) { return evaluate(r, x); });
}

}  // namespace

TEST(PoleState, FirstStep) {
  PoleState ps({Complex(0, 1)});
  ps.update(2.0, 0.0);
  EXPECT_LE(std::abs(ps.pivots()[0] - Complex(2, -1)), 1e-15);
  EXPECT_LE(std::abs(ps.eta()[0] - Complex(2, 1) / 5.0), 1e-15);
}

TEST(PoleState, SecondStepByHand) {
  PoleState ps({Complex(0, 1)});
  ps.update(1.0, 0.0);
  ps.update(2.0, 1.0);
  EXPECT_LE(std::abs(ps.pivots()[0] - Complex(1.5, -1.5)), 1e-15);
  EXPECT_LE(std::abs(ps.eta()[0] - Complex(0, -1.0 / 3.0)), 1e-15);
  const Eigen::VectorXcd x = dense_complex({{1, 2}, {1}}, Complex(0, 1)).lu().solve(Eigen::VectorXcd::Unit(2, 0));
  EXPECT_LE(std::abs(x(1) - ps.eta()[0]), 1e-15);
}

TEST(PoleState, EtaMatchesDenseSolveAlongRun) {
  const Laplacian2D A(20, 30);
  const RationalApproximant r = build_log(6, {LaplacianSpectrum(20, 30).min(), LaplacianSpectrum(20, 30).max()});
  LanczosState<Laplacian2D> st(A, rademacher_vector(600, 4));
  PoleState ps(r.poles);
  double beta = 0.0;
  for (int m = 1; m <= 40; ++m) {
    const LanczosStep s = st.step();
    ps.update(s.alpha, beta);
    beta = s.beta_next;
    for (std::size_t k = 0; k < r.K(); ++k) {
      const Eigen::VectorXcd x =
          dense_complex(st.tridiag(), r.poles[k]).lu().solve(Eigen::VectorXcd::Unit(m, 0));
      EXPECT_LE(std::abs(x(m - 1) - ps.eta()[k]), 1e-10 * std::abs(x(m - 1)) + 1e-300) << m << ' ' << k;
    }
  }
}

TEST(PoleState, PivotBreakdownIsReported) {
  PoleState ps({Complex(2, 0)});
  EXPECT_THROW(ps.update(2.0, 0.0), PivotBreakdown);
}

TEST(ErrorMonitor, IncrementByHand) {
  ErrorMonitor mon(single_pole(Complex(0, 1)), 0.0);
  EXPECT_FALSE(mon.observe(1.0, 0.0));
  mon.observe(2.0, 1.0);
  ASSERT_EQ(mon.increments(), 1u);
  EXPECT_NEAR(mon.history()[0], -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(mon.cumulative(1, 2), -1.0 / 6.0, 1e-15);
}

TEST(ErrorMonitor, BreakdownIncrementIsZero) {
  ErrorMonitor mon(single_pole(Complex(-1, 0)), 0.0);
  mon.observe(1.0, 0.0);
  mon.observe(2.0, 0.0);
  EXPECT_EQ(mon.history()[0], 0.0);
  mon.observe_breakdown();
  EXPECT_EQ(mon.history()[1], 0.0);
}

TEST(ErrorMonitor, IncrementsAndTelescopingMatchEigenOracle) {
  const LaplacianSpectrum spec(30, 40);
  const Interval iv{spec.min(), spec.max()};
  const Laplacian2D A(30, 40);
  LanczosState<Laplacian2D> st(A, rademacher_vector(1200, 77));
  std::vector<LanczosStep> steps;
  for (int m = 0; m < 51; ++m) steps.push_back(st.step());
  for (FunctionKind kind : {FunctionKind::exp_neg, FunctionKind::sqrt, FunctionKind::log, FunctionKind::tanh_sqrt}) {
    const RationalApproximant r = build_rational(kind, 8, iv);
    ErrorMonitor mon(r, 0.0);
    double beta = 0.0;
    for (const LanczosStep& s : steps) {
      mon.observe(s.alpha, beta);
      beta = s.beta_next;
    }
    ASSERT_EQ(mon.increments(), 50u);
    Vector q;
    for (std::size_t m = 1; m <= 51; ++m) q.push_back(rational_quadrature(r, st.tridiag().leading(m)));
    for (std::size_t m = 1; m <= 50; ++m) {
      EXPECT_NEAR(mon.history()[m - 1], q[m] - q[m - 1], 1e-12);
      EXPECT_NEAR(mon.cumulative(m, m + 1), mon.history()[m - 1], 1e-15);
      EXPECT_NEAR(mon.cumulative(1, m + 1), q[m] - q[0], 1e-12);
    }
  }
}

TEST(ErrorMonitor, ConstantSignOnSpdTestbed) {
  const LaplacianSpectrum spec(30, 40);
  const Interval iv{spec.min(), spec.max()};
  const Laplacian2D A(30, 40);
  for (FunctionKind kind : {FunctionKind::exp_neg, FunctionKind::sqrt, FunctionKind::log, FunctionKind::tanh_sqrt}) {
    const RationalApproximant r = choose_K(kind, iv, 1e-9);
    LanczosState<Laplacian2D> st(A, rademacher_vector(1200, 3));
    ErrorMonitor mon(r, 0.0);
    double beta = 0.0;
    for (int m = 0; m < 40; ++m) {
      const LanczosStep s = st.step();
      mon.observe(s.alpha, beta);
      beta = s.beta_next;
    }
    int sign = 0;
    for (double d : mon.history()) {
      if (std::abs(d) < 10.0 * r.eps) continue;
      const int sd = d > 0 ? 1 : -1;
      if (sign == 0) sign = sd;
      EXPECT_EQ(sd, sign) << to_string(kind);
    }
  }
}

TEST(ErrorMonitor, CumulativeRejectsEmptyWindow) {
  ErrorMonitor mon(single_pole(Complex(-1, 0)), 0.0);
  mon.observe(1.0, 0.0);
  mon.observe(2.0, 1.0);
  EXPECT_THROW(mon.cumulative(1, 1), ContractViolation);
  EXPECT_THROW(mon.cumulative(1, 3), ContractViolation);
  EXPECT_THROW(ErrorMonitor(single_pole(Complex(-1, 0)), 0.1, 1.0), ContractViolation);
}

TEST(Lookback, ReplayExamples) {
  const auto hit = replay({1.0, 0.5, 0.09}, 2.0, 0.1);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->retired, 1u);
  EXPECT_EQ(hit->at, 3u);
  EXPECT_DOUBLE_EQ(hit->estimate, 1.5);
  EXPECT_FALSE(replay({1.0, 0.5, 0.2}, 2.0, 0.1));
}

TEST(Lookback, MonitorAgreesWithReplayOnRealRuns) {
  const LaplacianSpectrum spec(30, 40);
  const Interval iv{spec.min(), spec.max()};
  const Laplacian2D A(30, 40);
  for (FunctionKind kind : {FunctionKind::exp_neg, FunctionKind::log}) {
    const RationalApproximant r = build_rational(kind, 8, iv);
    for (double tol : {1e-2, 1e-4, 1e-6}) {
      LanczosState<Laplacian2D> st(A, rademacher_vector(1200, 9));
      ErrorMonitor mon(r, tol);
      double beta = 0.0;
      std::optional<Convergence> hit;
      while (!hit && st.steps() < 200) {
        const LanczosStep s = st.step();
        hit = mon.observe(s.alpha, beta);
        beta = s.beta_next;
      }
      ASSERT_TRUE(hit);
      const auto ref = replay(mon.history(), tol, 0.1);
      ASSERT_TRUE(ref);
      EXPECT_EQ(hit->retired, ref->retired);
      EXPECT_EQ(hit->at, ref->at);
      EXPECT_DOUBLE_EQ(hit->estimate, ref->estimate);
      EXPECT_LT(std::abs(hit->estimate), tol);
      EXPECT_EQ(mon.converged()->retired, hit->retired);
      for (const LookbackWindow& w : mon.closed_windows())
        EXPECT_LE(std::abs(mon.history()[w.upper - 1]), 0.1 * std::abs(mon.history()[w.lower - 1]));
    }
  }
}

TEST(Lookback, GeometricIncrements) {
  Vector d;
  for (int i = 1; i <= 10; ++i) d.push_back(std::pow(2.0, -i));
  const auto hit = replay(d, 1.0, 0.1);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->retired, 1u);
  EXPECT_EQ(hit->at, 5u);
  double tail = 0.0;
  for (std::size_t i = hit->at; i <= 60; ++i) tail += std::pow(2.0, -static_cast<double>(i));
  EXPECT_LE(tail / hit->estimate, 0.1 / 0.9);
}
