#pragma once

// Stochastic Lanczos quadrature for tr f(A) with per-sample error-monitored stopping and
// a confidence interval that absorbs the per-sample numerical bias.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include <json.hpp>

#include "slq/core.hpp"
#include "slq/error_monitor.hpp"
#include "slq/functions.hpp"
#include "slq/lanczos.hpp"
#include "slq/random.hpp"
#include "slq/rational.hpp"

namespace slq {

/// Two-sided normal coverage probability of +-alpha standard deviations.
inline double p_alpha(double alpha) {
  require(alpha > 0.0, "p_alpha: alpha must be positive");
  return std::erf(alpha / std::sqrt(2.0));
}

/// (alpha / sqrt N)(s + delta sqrt(N / (N - 1))) + delta.
inline double confidence_half_width(double s, std::size_t N, double delta, double alpha) {
  require(N >= 2, "confidence_half_width: need at least two samples");
  require(s >= 0.0 && delta >= 0.0, "confidence_half_width: s and delta must be nonnegative");
  const double Nd = static_cast<double>(N);
  return alpha / std::sqrt(Nd) * (s + delta * std::sqrt(Nd / (Nd - 1.0))) + delta;
}

/// Upper bound on the half-width when delta <= beta alpha s / sqrt N:
/// (alpha s / sqrt N)(1 + beta + beta alpha / sqrt(N - 1)).
inline double planned_half_width(double s, std::size_t N, double alpha, double beta) {
  require(N >= 2, "planned_half_width: need at least two samples");
  const double Nd = static_cast<double>(N);
  return alpha * s / std::sqrt(Nd) * (1.0 + beta + beta * alpha / std::sqrt(Nd - 1.0));
}

struct SpectrumEstimate {
  Interval interval;
  double ritz_min = 0.0, ritz_max = 0.0;
  std::size_t steps = 0;
};

/// [a, b] from a short Lanczos run: b is the largest Ritz value inflated by `safety`;
/// a is `lower_hint` when given, else the smallest Ritz value deflated by `safety`.
template <SymmetricOperator Op>
SpectrumEstimate estimate_spectrum_interval(const Op& op, std::optional<double> lower_hint = std::nullopt,
                                            std::size_t steps = 60, std::uint64_t seed = 0x5eed,
                                            double safety = 1.005) {
  const std::size_t n = op.dim();
  const Vector u = rademacher_vector(n, stream_key(seed, 0));
  LanczosState<Op> st(op, u, ReorthMode::full);
  const std::size_t budget = std::min(steps, n);
  for (std::size_t m = 0; m < budget; ++m)
    if (st.step().breakdown) break;
  const TridiagEigen eig = tridiag_eigen(st.tridiag());
  SpectrumEstimate out;
  out.steps = st.steps();
  out.ritz_min = eig.thetas.front();
  out.ritz_max = eig.thetas.back();
  out.interval.b = out.ritz_max * safety;
  out.interval.a = lower_hint ? *lower_hint : out.ritz_min / safety;
  require(out.interval.a > 0.0, "estimate_spectrum_interval: nonpositive lower end; operator not SPD");
  require(out.interval.b > out.interval.a, "estimate_spectrum_interval: empty interval");
  return out;
}

struct SampleOptions {
  double t = 0.1;
  std::size_t m_max = 2000;
  ReorthMode reorth = ReorthMode::full;
};

struct SampleRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double value = 0.0;     // |u|^2 e1' f(T_retired) e1
  double estimate = 0.0;  // |u|^2 d_{retired, m'}, the reported bilinear error estimate
  std::size_t steps = 0;  // Lanczos steps run
  std::size_t retired = 0;
  bool converged = false;
  bool breakdown = false;
  std::size_t sign_flips = 0;
  std::size_t reorth_count = 0;
  double lanczos_seconds = 0.0;
  double monitor_seconds = 0.0;
};

/// One bilinear form u' f(A) u by Lanczos, stopped by the cumulative-error test at
/// tolerance delta. On breakdown the quadrature is exact and the run stops with a zero
/// estimate. Hitting m_max returns the latest value with converged = false.
template <SymmetricOperator Op>
SampleRecord sample_bilinear(const Op& op, const ScalarFunction& f, const RationalApproximant& r,
                             std::span<const double> u, double delta, const SampleOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  require(opt.m_max >= 1, "sample_bilinear: m_max must be positive");
  SampleRecord rec;
  const auto t0 = clock::now();
  double monitor_s = 0.0;
  LanczosState<Op> st(op, u, opt.reorth);
  ErrorMonitor mon(r, delta / st.norm_sq(), opt.t);
  double beta_m = 0.0;
  std::optional<Convergence> hit;
  while (st.steps() < opt.m_max) {
    const LanczosStep s = st.step();
    const auto tm = clock::now();
    hit = mon.observe(s.alpha, beta_m);
    monitor_s += std::chrono::duration<double>(clock::now() - tm).count();
    if (s.breakdown) {
      rec.breakdown = true;
      break;
    }
    if (hit) break;
    beta_m = s.beta_next;
  }

  rec.steps = st.steps();
  rec.sign_flips = mon.sign_flips();
  rec.reorth_count = st.reorth_count();
  if (rec.breakdown) {
    rec.retired = rec.steps;
    rec.estimate = 0.0;
    rec.converged = true;
  } else if (hit) {
    rec.retired = hit->retired;
    rec.estimate = st.norm_sq() * hit->estimate;
    rec.converged = true;
  } else {
    rec.retired = rec.steps;
    rec.estimate = mon.history().empty() ? std::numeric_limits<double>::infinity()
                                         : st.norm_sq() * std::abs(mon.history().back());
  }
  rec.value = st.norm_sq() * quadrature_value(st.tridiag().leading(rec.retired), f);
  rec.monitor_seconds = monitor_s;
  rec.lanczos_seconds = std::chrono::duration<double>(clock::now() - t0).count() - monitor_s;
  return rec;
}

struct TraceOptions {
  std::size_t N = 100;
  double alpha = 3.0;
  double delta = 0.0;
  double t = 0.1;
  std::uint64_t seed = 1;
  std::size_t m_max = 2000;
  std::optional<ReorthMode> reorth;  // default: full or partial by memory budget
  std::size_t threads = 0;           // 0: hardware concurrency
};

struct TraceEstimate {
  FunctionKind kind = FunctionKind::exp_neg;
  std::string op_descriptor;
  std::size_t N = 0;
  double alpha = 0.0, delta = 0.0, t = 0.0;
  std::size_t K = 0;
  double rational_eps = 0.0;
  std::string rational_construction;
  ReorthMode reorth = ReorthMode::full;
  std::uint64_t seed = 0;
  double mean = 0.0, std_err = 0.0, half_width = 0.0, p_alpha = 0.0;
  bool certified = true;
  double average_retired = 0.0;
  double average_steps_run = 0.0;
  std::vector<SampleRecord> samples;
  double approximation_seconds = 0.0;
  double error_estimate_seconds = 0.0;
  double wall_seconds = 0.0;
};

namespace detail {

// Runs job(i) for i in [0, count) on `threads` workers; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Recomputes mean, std_err and the half-width from the sample records, in index order.
inline void summarize(TraceEstimate& est) {
  const std::size_t N = est.samples.size();
  require(N >= 2, "summarize: need at least two samples");
  CompensatedSum sum;
  for (const SampleRecord& r : est.samples) sum.add(r.value);
  est.mean = sum.value() / static_cast<double>(N);
  CompensatedSum sq, retired, run;
  for (const SampleRecord& r : est.samples) {
    const double d = r.value - est.mean;
    sq.add(d * d);
    retired.add(static_cast<double>(r.retired));
    run.add(static_cast<double>(r.steps));
  }
  est.std_err = std::sqrt(sq.value() / static_cast<double>(N - 1));
  est.half_width = confidence_half_width(est.std_err, N, est.delta, est.alpha);
  est.p_alpha = p_alpha(est.alpha);
  est.average_retired = retired.value() / static_cast<double>(N);
  est.average_steps_run = run.value() / static_cast<double>(N);
  est.certified = std::all_of(est.samples.begin(), est.samples.end(), [](const SampleRecord& r) { return r.converged; });
}

/// Algorithm: N Rademacher samples, each stopped at tolerance delta, then the confidence
/// interval mean +- half_width. `r` must approximate f on the spectrum of op.
template <SymmetricOperator Op>
TraceEstimate estimate_trace(const Op& op, FunctionKind kind, const RationalApproximant& r, const TraceOptions& opt,
                             std::string descriptor = {}) {
  require(opt.N >= 2, "estimate_trace: need N >= 2");
  require(opt.delta >= 0.0, "estimate_trace: delta must be nonnegative");
  require(r.kind == kind, "estimate_trace: approximant is for a different function");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = op.dim();
  TraceEstimate est;
  est.kind = kind;
  est.op_descriptor = std::move(descriptor);
  est.N = opt.N;
  est.alpha = opt.alpha;
  est.delta = opt.delta;
  est.t = opt.t;
  est.K = r.K();
  est.rational_eps = r.eps;
  est.rational_construction = r.construction;
  est.reorth = opt.reorth.value_or(default_reorth_mode(n, opt.m_max));
  est.seed = opt.seed;
  est.samples.resize(opt.N);

  const ScalarFunction f(kind);
  const SampleOptions so{opt.t, opt.m_max, est.reorth};
  detail::parallel_for(opt.N, opt.threads, [&](std::size_t i) {
    const std::uint64_t key = stream_key(opt.seed, i);
    const Vector u = rademacher_vector(n, key);
    SampleRecord rec = sample_bilinear(op, f, r, u, opt.delta, so);
    rec.index = i;
    rec.seed = key;
    est.samples[i] = rec;
  });

  summarize(est);
  for (const SampleRecord& rec : est.samples) {
    est.approximation_seconds += rec.lanczos_seconds;
    est.error_estimate_seconds += rec.monitor_seconds;
  }
  est.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

/// Rational approximant meeting the uniform-error target delta / (2 |u|^2) with |u|^2 = n.
inline RationalApproximant approximant_for(FunctionKind kind, Interval iv, double delta, std::size_t n) {
  return choose_K(kind, iv, delta / (2.0 * static_cast<double>(n)));
}

struct Calibration {
  double delta = 0.0;
  double pilot_std_err = 0.0;
  double pilot_delta = 0.0;  // tolerance of the final pilot round
  std::size_t pilot_N = 0;
  std::size_t pilot_rounds = 0;
};

/// delta = beta alpha s' / sqrt(N) from a pilot of N' samples. The first round runs at
/// 1e-2 * n * |f| (|f| the largest of |f(a)|, |f(mid)|, |f(b)|); while that tolerance
/// exceeds s'/2 the pilot is repeated at s'/4 so its own bias does not inflate s'.
template <SymmetricOperator Op>
Calibration calibrate_delta(const Op& op, FunctionKind kind, Interval iv, std::size_t N, double beta, double alpha,
                            std::uint64_t seed, std::size_t pilot_N = 30, std::size_t threads = 0) {
  require(pilot_N >= 2 && N >= 2, "calibrate_delta: need at least two samples");
  require(beta > 0.0, "calibrate_delta: beta must be positive");
  constexpr std::size_t max_rounds = 4;
  const ScalarFunction f(kind);
  const double scale =
      std::max({std::abs(f(iv.a)), std::abs(f(iv.midpoint())), std::abs(f(iv.b))});
  const double n = static_cast<double>(op.dim());
  Calibration cal;
  cal.pilot_N = pilot_N;
  cal.pilot_delta = 1e-2 * n * scale;
  require(cal.pilot_delta > 0.0, "calibrate_delta: degenerate function scale");
  TraceOptions opt;
  opt.N = pilot_N;
  opt.alpha = alpha;
  opt.seed = stream_key(seed, 0xca1b);
  opt.threads = threads;
  for (;;) {
    const RationalApproximant r = approximant_for(kind, iv, cal.pilot_delta, op.dim());
    opt.delta = cal.pilot_delta;
    const TraceEstimate pilot = estimate_trace(op, kind, r, opt);
    ++cal.pilot_rounds;
    if (!pilot.certified) throw NumericalFailure("calibrate_delta: pilot run did not converge");
    cal.pilot_std_err = pilot.std_err;
    if (!(pilot.std_err > 0.0) || cal.pilot_delta <= 0.5 * pilot.std_err || cal.pilot_rounds == max_rounds) break;
    cal.pilot_delta = 0.25 * pilot.std_err;
  }
  cal.delta = beta * alpha * cal.pilot_std_err / std::sqrt(static_cast<double>(N));
  if (!(cal.delta > 0.0)) throw NumericalFailure("calibrate_delta: pilot spread is zero; delta would vanish");
  return cal;
}

inline nlohmann::json to_json(const SampleRecord& r) {
  return {{"index", r.index},       {"seed", r.seed},         {"value", r.value},
          {"estimate", r.estimate}, {"steps", r.steps},       {"retired", r.retired},
          {"converged", r.converged}, {"breakdown", r.breakdown}, {"sign_flips", r.sign_flips},
          {"reorth_count", r.reorth_count}};
}

/// Serialization; everything outside "timings" is deterministic for a fixed configuration.
inline nlohmann::json to_json(const TraceEstimate& e) {
  nlohmann::json j;
  j["function"] = std::string(to_string(e.kind));
  j["operator"] = e.op_descriptor;
  j["N"] = e.N;
  j["alpha"] = e.alpha;
  j["delta"] = e.delta;
  j["t"] = e.t;
  j["K"] = e.K;
  j["rational_eps"] = e.rational_eps;
  j["rational_construction"] = e.rational_construction;
  j["reorth"] = std::string(to_string(e.reorth));
  j["master_seed"] = e.seed;
  j["mean"] = e.mean;
  j["std_err"] = e.std_err;
  j["half_width"] = e.half_width;
  j["p_alpha"] = e.p_alpha;
  j["certified"] = e.certified;
  j["average_retired_step"] = e.average_retired;
  j["average_steps_run"] = e.average_steps_run;
  auto& per = j["per_sample"] = nlohmann::json::array();
  auto& seeds = j["seeds"] = nlohmann::json::array();
  for (const SampleRecord& r : e.samples) {
    per.push_back(to_json(r));
    seeds.push_back(r.seed);
  }
  j["timings"] = {{"approximation_seconds", e.approximation_seconds},
                  {"error_estimate_seconds", e.error_estimate_seconds},
                  {"wall_seconds", e.wall_seconds}};
  return j;
}

}  // namespace slq
