#pragma once

// Symmetric Lanczos recurrence
//   A v_k = beta_k v_{k-1} + alpha_k v_k + beta_{k+1} v_{k+1}
// with optional full or partial (omega-recurrence) reorthogonalization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

#include "slq/core.hpp"
#include "slq/operators.hpp"
#include "slq/random.hpp"
#include "slq/tridiag.hpp"

namespace slq {

enum class ReorthMode { none, full, partial };

inline std::string_view to_string(ReorthMode m) {
  switch (m) {
    case ReorthMode::none: return "none";
    case ReorthMode::full: return "full";
    case ReorthMode::partial: return "partial";
  }
  return "?";
}

inline ReorthMode parse_reorth_mode(std::string_view s) {
  if (s == "none") return ReorthMode::none;
  if (s == "full") return ReorthMode::full;
  if (s == "partial") return ReorthMode::partial;
  throw UnsupportedParameter("unknown reorthogonalization mode '" + std::string(s) + "'");
}

/// Default mode: full while the basis fits a modest budget, partial beyond it.
inline ReorthMode default_reorth_mode(std::size_t n, std::size_t m_max,
                                      std::size_t budget_bytes = std::size_t{1} << 28) {
  return n * m_max * sizeof(double) <= budget_bytes ? ReorthMode::full : ReorthMode::partial;
}

struct LanczosStep {
  double alpha = 0.0;      // alpha_m
  double beta_next = 0.0;  // beta_{m+1}
  bool breakdown = false;  // beta_{m+1} fell below the breakdown tolerance
  bool reorthogonalized = false;
};

template <SymmetricOperator Op>
class LanczosState {
public:
  static constexpr double breakdown_factor = 1e-13;

  LanczosState(const Op& op, std::span<const double> u, ReorthMode mode = ReorthMode::full)
      : op_(&op), mode_(mode), n_(op.dim()) {
    require(u.size() == n_, "lanczos_init: start vector has wrong length");
    norm_sq_ = dot(u, u);
    require(norm_sq_ > 0.0, "lanczos_init: start vector is zero");
    Vector v(u.begin(), u.end());
    scale(1.0 / std::sqrt(norm_sq_), v);
    basis_.push_back(std::move(v));
    work_.resize(n_);
  }

  std::size_t steps() const noexcept { return T_.alphas.size(); }
  std::size_t dim() const noexcept { return n_; }
  double norm_sq() const noexcept { return norm_sq_; }
  ReorthMode mode() const noexcept { return mode_; }
  const SymTridiagonal& tridiag() const noexcept { return T_; }
  double norm_estimate() const noexcept { return anorm_; }
  std::size_t reorth_count() const noexcept { return reorth_count_; }
  bool broken_down() const noexcept { return broken_; }

  /// Stored Lanczos vectors. In mode none only the last two are retained.
  const std::vector<Vector>& basis() const noexcept { return basis_; }

  /// Performs step m = steps() + 1: computes alpha_m and beta_{m+1}. Unless
  /// breakdown is signalled, v_{m+1} is appended to the basis.
  LanczosStep step() {
    require(!broken_, "lanczos_step: recurrence has broken down; restart or stop");
    require(steps() < n_, "lanczos_step: dimension exhausted");
    const Vector& v = basis_.back();
    const Vector* vprev = basis_.size() >= 2 ? &basis_[basis_.size() - 2] : nullptr;
    const double beta_m = T_.alphas.empty() ? 0.0 : beta_pending_;

    op_->apply(v, work_);
    if (vprev) axpy(-beta_m, *vprev, work_);
    const double alpha = dot(v, work_);
    axpy(-alpha, v, work_);

    LanczosStep out;
    out.alpha = alpha;
    if (mode_ == ReorthMode::full) {
      reorthogonalize(work_);
      out.reorthogonalized = true;
    }
    double beta = norm2(work_);

    if (mode_ == ReorthMode::partial) {
      if (!T_.alphas.empty()) T_.betas.push_back(beta_pending_);
      T_.alphas.push_back(alpha);
      const bool forced = reorth_next_;
      reorth_next_ = false;
      const double worst = beta > 0.0 ? advance_omega(beta) : 0.0;
      if (forced || worst > std::sqrt(std::numeric_limits<double>::epsilon())) {
        reorthogonalize(work_);
        beta = norm2(work_);
        reset_omega(basis_.size() + 1);
        reorth_next_ = !forced;
        out.reorthogonalized = true;
      }
    } else {
      if (!T_.alphas.empty()) T_.betas.push_back(beta_pending_);
      T_.alphas.push_back(alpha);
    }
    if (out.reorthogonalized) ++reorth_count_;

    anorm_ = std::max(anorm_, std::abs(alpha) + beta_m + beta);
    out.beta_next = beta;
    beta_pending_ = beta;
    if (beta <= breakdown_factor * anorm_ || steps() == n_) {
      out.breakdown = true;
      broken_ = true;
      return out;
    }
    scale(1.0 / beta, work_);
    push_vector(work_);
    return out;
  }

  /// After breakdown, continues with a random unit vector orthogonal to the stored basis.
  /// The coupling beta_{m+1} is set to zero, so T becomes block diagonal and
  /// e1' f(T) e1 is unaffected by the new block.
  void restart(std::uint64_t key) {
    require(broken_, "lanczos restart: no breakdown to recover from");
    require(mode_ != ReorthMode::none, "lanczos restart: needs a stored basis");
    require(steps() < n_, "lanczos restart: dimension exhausted");
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector r = rademacher_vector(n_, stream_key(key, static_cast<std::uint64_t>(attempt)));
      const double r0 = norm2(r);
      reorthogonalize(r);
      const double nr = norm2(r);
      if (nr > 1e-8 * r0) {
        scale(1.0 / nr, r);
        beta_pending_ = 0.0;
        broken_ = false;
        push_vector(r);
        if (mode_ == ReorthMode::partial) {
          reset_omega(basis_.size());
          omega_prev_.assign(basis_.size() - 1, std::numeric_limits<double>::epsilon());
        }
        return;
      }
    }
    throw NumericalFailure("lanczos restart: could not find an orthogonal direction");
  }

  /// norm_sq * e1' f(T_m) e1.
  template <class F>
  double bilinear_estimate(F&& f) const {
    require(steps() >= 1, "bilinear_estimate: no Lanczos step taken");
    return norm_sq_ * quadrature_value(T_, std::forward<F>(f));
  }

  /// max_{j<k} |v_j . v_k| over the stored basis.
  double orthogonality_loss() const {
    double worst = 0.0;
    for (std::size_t k = 1; k < basis_.size(); ++k)
      for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, std::abs(dot(basis_[j], basis_[k])));
    return worst;
  }

  /// max_k | |v_k| - 1 |.
  double normalization_defect() const {
    double worst = 0.0;
    for (const Vector& v : basis_) worst = std::max(worst, std::abs(norm2(v) - 1.0));
    return worst;
  }

private:
  void push_vector(const Vector& v) {
    if (mode_ == ReorthMode::none && basis_.size() >= 2) {
      basis_.erase(basis_.begin());
    }
    basis_.push_back(v);
  }

  // Two passes of modified Gram-Schmidt against every stored vector.
  void reorthogonalize(Vector& w) const {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis_) axpy(-dot(q, w), q, w);
    }
  }

  // Simon's omega recurrence. omega_[j] estimates v_j . v_{k}, omega_prev_[j] estimates
  // v_j . v_{k-1}, with k = steps(). Returns max_j |estimate of v_j . v_{k+1}|.
  double advance_omega(double beta_next) {
    const double eps = std::numeric_limits<double>::epsilon();
    const std::size_t k = steps() - 1;  // 0-based index of the current vector
    const Vector& a = T_.alphas;
    const Vector& b = T_.betas;  // b[j] couples j, j+1
    auto bb = [&](std::size_t j) { return j == 0 ? 0.0 : b[j - 1]; };
    Vector next(k + 2, 0.0);
    double worst = 0.0;
    if (omega_.size() < k + 1) omega_.resize(k + 1, 0.0);
    omega_[k] = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double wkj1 = omega_[j + 1];
      const double wkjm = j > 0 ? omega_[j - 1] : 0.0;
      const double wk1j = j < omega_prev_.size() ? omega_prev_[j] : 0.0;
      double s = b[j] * wkj1 + (a[j] - a[k]) * omega_[j] + bb(j) * wkjm - bb(k) * wk1j;
      s += std::copysign(eps * anorm_local(), s);
      next[j] = s / beta_next;
      worst = std::max(worst, std::abs(next[j]));
    }
    next[k] = eps * std::sqrt(static_cast<double>(n_)) * anorm_local() / beta_next;
    next[k + 1] = 1.0;
    worst = std::max(worst, std::abs(next[k]));
    omega_prev_ = std::move(omega_);
    omega_ = std::move(next);
    return worst;
  }

  // After an explicit reorthogonalization the newest vector (index len - 1) is
  // orthogonal to working precision.
  void reset_omega(std::size_t len) {
    const double eps = std::numeric_limits<double>::epsilon();
    omega_.assign(len, eps);
    omega_.back() = 1.0;
  }

  double anorm_local() const noexcept { return std::max(anorm_, 1e-300); }

  const Op* op_;
  ReorthMode mode_;
  std::size_t n_;
  double norm_sq_ = 0.0;
  std::vector<Vector> basis_;
  Vector work_;
  SymTridiagonal T_;
  double beta_pending_ = 0.0;
  double anorm_ = 0.0;
  bool broken_ = false;
  bool reorth_next_ = false;
  std::size_t reorth_count_ = 0;
  Vector omega_, omega_prev_;
};

}  // namespace slq
