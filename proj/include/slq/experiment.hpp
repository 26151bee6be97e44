#pragma once

// Experiment runner shared by the command-line tool and the acceptance suite:
// a flat, replayable configuration and the four report-producing commands.

#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "slq/matern.hpp"
#include "slq/operators.hpp"
#include "slq/oracles.hpp"
#include "slq/rational.hpp"
#include "slq/trace_estimator.hpp"

namespace slq {

struct ExperimentConfig {
  std::string testbed = "laplacian";  // laplacian | matern
  std::size_t n1 = 90, n2 = 120;
  double sample_fraction = 0.1;
  std::string ell_rule = "standard";  // standard (0.4 n2, 0.4 n1) | explicit
  double ell1 = 0.0, ell2 = 0.0;
  double nu = 1.5;
  double tau = 1e-5;
  std::uint64_t site_seed = 2024;

  std::string function = "log";
  std::size_t N = 100;
  double alpha = 3.0;
  double beta = 1.0;
  std::optional<double> delta;  // empty: calibrate with beta
  std::size_t pilot_N = 30;
  double t = 0.1;
  std::string reorth = "auto";  // auto | none | full | partial
  std::size_t m_max = 2000;
  std::size_t K = 0;  // 0: choose automatically
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  std::size_t k_min = 1, k_max = 20;  // rational-check schedule
  std::optional<double> interval_a, interval_b;

  std::string output;          // empty: stdout
  std::string format = "json";  // json | text | csv
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"testbed", c.testbed},     {"n1", c.n1},
          {"n2", c.n2},               {"sample_fraction", c.sample_fraction},
          {"ell_rule", c.ell_rule},   {"ell1", c.ell1},
          {"ell2", c.ell2},           {"nu", c.nu},
          {"tau", c.tau},             {"site_seed", c.site_seed},
          {"function", c.function},   {"N", c.N},
          {"alpha", c.alpha},         {"beta", c.beta},
          {"delta", opt(c.delta)},    {"pilot_N", c.pilot_N},
          {"t", c.t},                 {"reorth", c.reorth},
          {"m_max", c.m_max},         {"K", c.K},
          {"seed", c.seed},           {"threads", c.threads},
          {"k_min", c.k_min},         {"k_max", c.k_max},
          {"interval_a", opt(c.interval_a)}, {"interval_b", opt(c.interval_b)},
          {"output", c.output},       {"format", c.format}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  const nlohmann::json known = to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw ContractViolation("config: unknown key '" + it.key() + "'");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  auto get_opt = [&](const char* key, std::optional<double>& field) {
    if (j.contains(key)) field = j.at(key).is_null() ? std::nullopt : std::optional<double>(j.at(key).get<double>());
  };
  get("testbed", c.testbed);
  get("n1", c.n1);
  get("n2", c.n2);
  get("sample_fraction", c.sample_fraction);
  get("ell_rule", c.ell_rule);
  get("ell1", c.ell1);
  get("ell2", c.ell2);
  get("nu", c.nu);
  get("tau", c.tau);
  get("site_seed", c.site_seed);
  get("function", c.function);
  get("N", c.N);
  get("alpha", c.alpha);
  get("beta", c.beta);
  get_opt("delta", c.delta);
  get("pilot_N", c.pilot_N);
  get("t", c.t);
  get("reorth", c.reorth);
  get("m_max", c.m_max);
  get("K", c.K);
  get("seed", c.seed);
  get("threads", c.threads);
  get("k_min", c.k_min);
  get("k_max", c.k_max);
  get_opt("interval_a", c.interval_a);
  get_opt("interval_b", c.interval_b);
  get("output", c.output);
  get("format", c.format);
  return c;
}

/// The concrete operator of a configuration.
class Testbed {
public:
  explicit Testbed(const ExperimentConfig& c) : op_(make(c)) {}

  bool is_laplacian() const noexcept { return std::holds_alternative<Laplacian2D>(op_); }
  const Laplacian2D* laplacian() const noexcept { return std::get_if<Laplacian2D>(&op_); }
  const MaternOperator* matern() const noexcept { return std::get_if<MaternOperator>(&op_); }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit([&](const auto& op) -> decltype(auto) { return f(op); }, op_);
  }

  std::size_t dim() const {
    return visit([](const auto& op) { return op.dim(); });
  }

  std::string descriptor() const {
    if (const auto* l = laplacian()) return "laplacian(" + std::to_string(l->n1()) + "x" + std::to_string(l->n2()) + ")";
    return matern()->descriptor();
  }

private:
  using Variant = std::variant<Laplacian2D, MaternOperator>;

  static Variant make(const ExperimentConfig& c) {
    if (c.testbed == "laplacian") return Laplacian2D(c.n1, c.n2);
    if (c.testbed != "matern") throw UnsupportedParameter("config: unknown testbed '" + c.testbed + "'");
    MaternParams p = MaternParams::standard(c.n1, c.n2, c.nu, c.tau);
    if (c.ell_rule == "explicit") {
      p.ell1 = c.ell1;
      p.ell2 = c.ell2;
    } else if (c.ell_rule != "standard") {
      throw UnsupportedParameter("config: unknown ell_rule '" + c.ell_rule + "'");
    }
    return MaternOperator(p, sample_sites(c.n1, c.n2, c.sample_fraction, c.site_seed));
  }

  Variant op_;
};

struct IntervalChoice {
  Interval interval;
  std::string source;  // exact | lanczos | config
  double seconds = 0.0;
};

/// Spectrum interval for a configuration: explicit bounds win; the Laplacian uses its
/// exact extremes; the Matern operator uses a Lanczos estimate with the nugget as lower end.
inline IntervalChoice choose_interval(const ExperimentConfig& c, const Testbed& tb) {
  IntervalChoice out;
  const auto t0 = std::chrono::steady_clock::now();
  if (c.interval_a && c.interval_b) {
    out.interval = {*c.interval_a, *c.interval_b};
    out.source = "config";
  } else if (const auto* l = tb.laplacian()) {
    const LaplacianSpectrum spec(l->n1(), l->n2());
    out.interval = {spec.min(), spec.max()};
    out.source = "exact";
  } else {
    const MaternOperator& m = *tb.matern();
    const std::optional<double> hint = m.params().tau > 0.0 ? std::optional<double>(m.params().tau) : std::nullopt;
    out.interval = estimate_spectrum_interval(m, hint, 60, stream_key(c.seed, 0x5bec)).interval;
    out.source = "lanczos";
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline ReorthMode reorth_for(const ExperimentConfig& c, std::size_t n) {
  return c.reorth == "auto" ? default_reorth_mode(n, c.m_max) : parse_reorth_mode(c.reorth);
}

/// The first approximant on the schedule reaching 1e-10 relative accuracy, or the most
/// accurate one if none does.
inline RationalApproximant accurate_approximant(FunctionKind kind, Interval iv) {
  const ScalarFunction f(kind);
  const double scale = std::max({std::abs(f(iv.a)), std::abs(f(iv.midpoint())), std::abs(f(iv.b))});
  try {
    return choose_K(kind, iv, 1e-10 * scale);
  } catch (const UnreachableAccuracy& e) {
    return build_rational(kind, e.best_K(), iv);
  }
}

/// Rational-approximation error over the K schedule, as CSV.
inline std::string cmd_rational_check(const ExperimentConfig& c) {
  if (c.k_min < 1 || c.k_min > c.k_max) throw ContractViolation("rational-check: empty K schedule");
  const FunctionKind kind = parse_function_kind(c.function);
  Interval iv;
  if (c.interval_a && c.interval_b) {
    iv = {*c.interval_a, *c.interval_b};
  } else {
    iv = choose_interval(c, Testbed(c)).interval;
  }
  std::ostringstream os;
  os << "kind,K,terms,uniform_error,construction,a,b\n";
  os.precision(6);
  for (std::size_t K = c.k_min; K <= c.k_max; ++K) {
    const RationalApproximant r = build_rational(kind, K, iv);
    os << to_string(kind) << ',' << K << ',' << r.K() << ',' << std::scientific << r.eps << ','
       << r.construction << ',' << iv.a << ',' << iv.b << std::defaultfloat << '\n';
  }
  return os.str();
}

/// Per-step error curve for one probe vector: true bilinear error (oracle), |d_m^K| and the
/// cumulative estimate |d_{m,m'}^K| with m' the first step passing the lookback ratio test.
/// All quantities refer to the unit start vector u / |u|.
inline std::string cmd_bilinear_curve(const ExperimentConfig& c) {
  const Testbed tb(c);
  const FunctionKind kind = parse_function_kind(c.function);
  const ScalarFunction f(kind);
  const std::size_t n = tb.dim();
  const IntervalChoice ic = choose_interval(c, tb);
  const RationalApproximant r = c.K > 0 ? build_rational(kind, c.K, ic.interval) : accurate_approximant(kind, ic.interval);
  const Vector u = rademacher_vector(n, stream_key(c.seed, 0));
  const double unorm = dot(u, u);

  double truth = 0.0;
  if (const auto* l = tb.laplacian()) {
    truth = exact_bilinear_laplacian(f, l->n1(), l->n2(), u) / unorm;
  } else {
    const DenseFunctionOracle oracle(matern_dense(*tb.matern()));
    truth = oracle.bilinear(f, u) / unorm;
  }

  const ReorthMode mode = reorth_for(c, n);
  Vector values, increments;
  std::vector<LookbackWindow> windows;
  tb.visit([&](const auto& op) {
    using Op = std::decay_t<decltype(op)>;
    {
      LanczosState<Op> st(op, u, mode);
      ErrorMonitor mon(r, 0.0, c.t);
      double beta_m = 0.0;
      while (st.steps() < std::min(c.m_max, n)) {
        const LanczosStep s = st.step();
        mon.observe(s.alpha, beta_m);
        values.push_back(quadrature_value(st.tridiag(), f));
        if (s.breakdown) break;
        beta_m = s.beta_next;
      }
      increments = mon.history();
      windows = mon.closed_windows();
    }
  });

  std::vector<std::optional<LookbackWindow>> by_lower(values.size() + 1);
  for (const LookbackWindow& w : windows)
    if (w.lower < by_lower.size()) by_lower[w.lower] = w;

  std::ostringstream os;
  os.precision(6);
  os << std::scientific;
  os << "step,quadrature_value,true_error,incremental_abs,cumulative_abs,window_end\n";
  for (std::size_t m = 1; m <= values.size(); ++m) {
    os << m << ',' << values[m - 1] << ',' << std::abs(truth - values[m - 1]) << ',';
    if (m <= increments.size()) os << std::abs(increments[m - 1]);
    os << ',';
    if (by_lower[m]) os << std::abs(by_lower[m]->sum) << ',' << by_lower[m]->upper;
    else os << ',';
    os << '\n';
  }
  return os.str();
}

struct TraceReport {
  nlohmann::json json;
  bool certified = false;
};

/// Full trace run with confidence interval and, when affordable, the ground truth.
inline TraceReport cmd_trace(const ExperimentConfig& c) {
  const Testbed tb(c);
  const FunctionKind kind = parse_function_kind(c.function);
  const std::size_t n = tb.dim();
  const IntervalChoice ic = choose_interval(c, tb);

  const auto tcal = std::chrono::steady_clock::now();
  std::optional<Calibration> cal;
  double delta = 0.0;
  if (c.delta) {
    delta = *c.delta;
  } else {
    cal = tb.visit([&](const auto& op) {
      return calibrate_delta(op, kind, ic.interval, c.N, c.beta, c.alpha, c.seed, c.pilot_N, c.threads);
    });
    delta = cal->delta;
  }
  const double cal_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tcal).count();

  const RationalApproximant r =
      c.K > 0 ? build_rational(kind, c.K, ic.interval) : approximant_for(kind, ic.interval, delta, n);
  TraceOptions opt;
  opt.N = c.N;
  opt.alpha = c.alpha;
  opt.delta = delta;
  opt.t = c.t;
  opt.seed = c.seed;
  opt.m_max = c.m_max;
  opt.reorth = reorth_for(c, n);
  opt.threads = c.threads;

  const TraceEstimate est =
      tb.visit([&](const auto& op) { return estimate_trace(op, kind, r, opt, tb.descriptor()); });

  std::optional<double> truth;
  const ScalarFunction f(kind);
  if (const auto* l = tb.laplacian()) {
    truth = exact_trace_laplacian(f, l->n1(), l->n2());
  } else if (n <= dense_oracle_limit) {
    const Eigen::MatrixXd M = matern_dense(*tb.matern());
    truth = kind == FunctionKind::log ? dense_logdet(M) : DenseFunctionOracle(M).trace(f);
  }

  nlohmann::json j = to_json(est);
  j["config"] = to_json(c);
  j["interval"] = {ic.interval.a, ic.interval.b};
  j["interval_source"] = ic.source;
  j["condition_estimate"] = ic.interval.b / ic.interval.a;
  if (const auto* m = tb.matern()) j["sites"] = m->sites();
  if (cal) {
    j["calibration"] = {{"beta", c.beta},
                        {"pilot_N", cal->pilot_N},
                        {"pilot_delta", cal->pilot_delta},
                        {"pilot_rounds", cal->pilot_rounds},
                        {"pilot_std_err", cal->pilot_std_err}};
  }
  j["truth"] = truth ? nlohmann::json(*truth) : nlohmann::json(nullptr);
  j["within_interval"] = truth ? nlohmann::json(std::abs(est.mean - *truth) <= est.half_width) : nlohmann::json(nullptr);
  j["timings"]["spectrum_seconds"] = ic.seconds;
  j["timings"]["calibration_seconds"] = cal_seconds;
  return {std::move(j), est.certified};
}

/// Human-readable rendering of a trace report.
inline std::string render_trace_text(const nlohmann::json& j) {
  std::ostringstream os;
  auto row = [&](const std::string& label, const std::string& value) {
    os << label;
    for (std::size_t i = label.size(); i < 34; ++i) os << ' ';
    os << value << '\n';
  };
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  row("Operator", j.at("operator").get<std::string>());
  row("Function", j.at("function").get<std::string>());
  row("Spectrum interval", "[" + num(j["interval"][0].get<double>()) + ", " + num(j["interval"][1].get<double>()) + "] (" +
                               j.at("interval_source").get<std::string>() + ")");
  row("Condition number (estimated)", num(j.at("condition_estimate").get<double>()));
  row("# Quadrature points, K", std::to_string(j.at("K").get<std::size_t>()));
  row("Rational approx. error", num(j.at("rational_eps").get<double>()));
  row("Lanczos tolerance delta", num(j.at("delta").get<double>()));
  row("Average # of Lanczos steps", num(j.at("average_retired_step").get<double>()));
  row("Truth", j.at("truth").is_null() ? "---" : num(j.at("truth").get<double>()));
  row("Approximation result", num(j.at("mean").get<double>()));
  row("Confidence interval (" + num(100.0 * j.at("p_alpha").get<double>()) + "%)",
      "+-" + num(j.at("half_width").get<double>()));
  row("Certified", j.at("certified").get<bool>() ? "yes" : "no");
  const auto& t = j.at("timings");
  row("Time spectrum estim. (s)", num(t.at("spectrum_seconds").get<double>()));
  row("Time trace approx. (s)", num(t.at("approximation_seconds").get<double>()));
  row("Time error estimate (s)", num(t.at("error_estimate_seconds").get<double>()));
  return os.str();
}

/// Pilot-based delta = beta alpha s' / sqrt(N).
inline nlohmann::json cmd_calibrate_delta(const ExperimentConfig& c) {
  const Testbed tb(c);
  const FunctionKind kind = parse_function_kind(c.function);
  const IntervalChoice ic = choose_interval(c, tb);
  const Calibration cal = tb.visit([&](const auto& op) {
    return calibrate_delta(op, kind, ic.interval, c.N, c.beta, c.alpha, c.seed, c.pilot_N, c.threads);
  });
  return {{"function", std::string(to_string(kind))},
          {"operator", tb.descriptor()},
          {"N", c.N},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"pilot_N", cal.pilot_N},
          {"pilot_delta", cal.pilot_delta},
          {"pilot_rounds", cal.pilot_rounds},
          {"pilot_std_err", cal.pilot_std_err},
          {"delta", cal.delta},
          {"interval", {ic.interval.a, ic.interval.b}}};
}

}  // namespace slq
