#pragma once

// Incremental quadrature errors d_m^K = e1' r(T_{m+1}) e1 - e1' r(T_m) e1 for a rational
// r in partial-fraction form, updated in O(K) per Lanczos step from the LU pivots of
// T_m - z_k I, and the lookback convergence test built on their prefix sums.

#include <cmath>
#include <optional>
#include <vector>

#include "slq/core.hpp"
#include "slq/rational.hpp"

namespace slq {

/// Pivots u_m^k and eta_m^k = e_m' (T_m - z_k I)^{-1} e_1 for every pole z_k.
class PoleState {
public:
  static constexpr double pivot_guard = 1e-300;

  explicit PoleState(std::vector<Complex> poles)
      : poles_(std::move(poles)), u_(poles_.size()), eta_(poles_.size()), eta_prev_(poles_.size()) {}

  std::size_t size() const noexcept { return poles_.size(); }
  std::size_t step() const noexcept { return m_; }
  const std::vector<Complex>& pivots() const noexcept { return u_; }
  const std::vector<Complex>& eta() const noexcept { return eta_; }
  const std::vector<Complex>& eta_prev() const noexcept { return eta_prev_; }

  /// Advances to step m + 1 with diagonal alpha and coupling beta (ignored on the first step).
  void update(double alpha, double beta) {
    for (std::size_t k = 0; k < poles_.size(); ++k) {
      Complex u;
      if (m_ == 0) {
        u = alpha - poles_[k];
      } else {
        u = alpha - poles_[k] - beta * beta / u_[k];
      }
      if (std::abs(u) < pivot_guard)
        throw PivotBreakdown("pole recurrence: pivot underflow at pole " + std::to_string(k), k);
      eta_prev_[k] = eta_[k];
      eta_[k] = m_ == 0 ? 1.0 / u : -beta * eta_[k] / u;
      u_[k] = u;
    }
    ++m_;
  }

private:
  std::vector<Complex> poles_;
  std::vector<Complex> u_, eta_, eta_prev_;
  std::size_t m_ = 0;
};

/// A lookback window [lower, upper): the increment d_upper was the first to drop below
/// t |d_lower|, and `sum` = d_{lower, upper} = d_lower + ... + d_{upper-1}.
struct LookbackWindow {
  std::size_t lower = 0;
  std::size_t upper = 0;
  double sum = 0.0;
};

struct Convergence {
  std::size_t retired = 0;  // step whose quadrature value is certified
  std::size_t at = 0;       // step index m' of the increment that closed the window
  double estimate = 0.0;    // d_{retired, at}
};

class ErrorMonitor {
public:
  /// `tol` is the scaled tolerance on the cumulative error (delta / |u|^2), `t` the
  /// lookback ratio.
  ErrorMonitor(const RationalApproximant& r, double tol, double t = 0.1)
      : coeffs_(r.coeffs), poles_(r.poles), tol_(tol), t_(t) {
    require(t > 0.0 && t < 1.0, "ErrorMonitor: lookback ratio must lie in (0, 1)");
    require(tol >= 0.0, "ErrorMonitor: tolerance must be nonnegative");
    prefix_.push_back(0.0);
  }

  double tolerance() const noexcept { return tol_; }
  double threshold() const noexcept { return t_; }
  const PoleState& poles() const noexcept { return poles_; }

  /// Feeds Lanczos step m: alpha_m and beta_m (the coupling to step m - 1; unused for m = 1).
  /// From the second step on, appends d_{m-1} and runs the lookback test.
  std::optional<Convergence> observe(double alpha, double beta) {
    const bool first = poles_.step() == 0;
    poles_.update(alpha, beta);
    if (first) return std::nullopt;
    Complex s = 0.0;
    const auto& eta = poles_.eta();
    const auto& prev = poles_.eta_prev();
    for (std::size_t k = 0; k < coeffs_.size(); ++k) s += coeffs_[k] * eta[k] * prev[k];
    return push(-beta * s.real());
  }

  /// Records an exactly zero increment (Lanczos breakdown).
  std::optional<Convergence> observe_breakdown() { return push(0.0); }

  /// d_1, d_2, ... (1-based in the maths, 0-based here).
  const Vector& history() const noexcept { return history_; }
  std::size_t increments() const noexcept { return history_.size(); }

  /// d_{m, m'} = d_m + ... + d_{m'-1}, 1-based, m < m' <= increments() + 1.
  double cumulative(std::size_t m, std::size_t mp) const {
    require(m >= 1 && m < mp && mp <= history_.size() + 1, "cumulative_error: window out of range");
    return prefix_[mp - 1] - prefix_[m - 1];
  }

  /// Windows closed so far, in closing order.
  const std::vector<LookbackWindow>& closed_windows() const noexcept { return closed_; }
  const std::optional<Convergence>& converged() const noexcept { return converged_; }
  std::size_t sign_flips() const noexcept { return flips_; }

private:
  // Appends d_j (j = increments() after the push) and closes every open window m
  // with |d_j| <= t |d_m|; a zero increment closes all of them. Among the windows
  // closed now, the smallest m with |d_{m,j}| < tol converges.
  std::optional<Convergence> push(double d) {
    history_.push_back(d);
    const double prior = prefix_.back();
    prefix_.push_back(prior + d);
    const std::size_t j = history_.size();
    if (d != 0.0) {
      if (last_sign_ != 0 && (d > 0) != (last_sign_ > 0)) ++flips_;
      last_sign_ = d > 0 ? 1 : -1;
    }

    std::optional<Convergence> hit;
    std::vector<std::size_t> still_open;
    for (std::size_t m : open_) {
      if (std::abs(d) <= t_ * std::abs(history_[m - 1])) {
        const LookbackWindow w{m, j, cumulative(m, j)};
        closed_.push_back(w);
        if (!hit && !converged_ && std::abs(w.sum) < tol_) hit = Convergence{m, j, w.sum};
      } else {
        still_open.push_back(m);
      }
    }
    open_ = std::move(still_open);
    open_.push_back(j);
    if (hit) converged_ = hit;
    return hit;
  }

  std::vector<Complex> coeffs_;
  PoleState poles_;
  double tol_, t_;
  Vector history_;
  Vector prefix_;
  std::vector<std::size_t> open_;
  std::vector<LookbackWindow> closed_;
  std::optional<Convergence> converged_;
  std::size_t flips_ = 0;
  int last_sign_ = 0;
};

}  // namespace slq
