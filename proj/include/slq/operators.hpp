#pragma once

#include <concepts>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "slq/core.hpp"
#include "slq/random.hpp"

namespace slq {

/// A matrix-free symmetric operator: a dimension and an out-of-place apply.
/// `apply` must be safe to call concurrently on distinct buffers.
template <class Op>
concept SymmetricOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.dim() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

template <SymmetricOperator Op>
Vector apply(const Op& op, std::span<const double> x) {
  Vector y(op.dim());
  op.apply(x, y);
  return y;
}

/// Type-erased operator handle. Copies share the wrapped (immutable) operator.
class LinearOperator {
public:
  using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOperator(std::size_t n, ApplyFn fn, bool spd_hint = true, std::string descriptor = {})
      : n_(n), fn_(std::move(fn)), spd_hint_(spd_hint), descriptor_(std::move(descriptor)) {
    require(n_ > 0, "LinearOperator: dimension must be positive");
  }

  template <SymmetricOperator Op>
    requires(!std::same_as<std::remove_cvref_t<Op>, LinearOperator>)
  static LinearOperator wrap(Op op, bool spd_hint = true, std::string descriptor = {}) {
    auto held = std::make_shared<const Op>(std::move(op));
    const std::size_t n = held->dim();
    return LinearOperator(
        n, [held](std::span<const double> x, std::span<double> y) { held->apply(x, y); }, spd_hint,
        std::move(descriptor));
  }

  std::size_t dim() const noexcept { return n_; }
  bool spd_hint() const noexcept { return spd_hint_; }
  const std::string& descriptor() const noexcept { return descriptor_; }

  void apply(std::span<const double> x, std::span<double> y) const {
    require(x.size() == n_ && y.size() == n_, "LinearOperator::apply: dimension mismatch");
    fn_(x, y);
  }

private:
  std::size_t n_;
  ApplyFn fn_;
  bool spd_hint_;
  std::string descriptor_;
};

/// 5-point Dirichlet Laplacian on an n1 x n2 grid, A = I (x) L + L (x) I with
/// L = tridiag(-1, 2, -1). Unknowns are ordered with the first grid index fastest:
/// entry (i1, i2) lives at i1 + n1 * i2.
class Laplacian2D {
public:
  Laplacian2D(std::size_t n1, std::size_t n2) : n1_(n1), n2_(n2) {
    require(n1 >= 1 && n2 >= 1, "Laplacian2D: grid must be non-empty");
  }

  std::size_t n1() const noexcept { return n1_; }
  std::size_t n2() const noexcept { return n2_; }
  std::size_t dim() const noexcept { return n1_ * n2_; }

  void apply(std::span<const double> x, std::span<double> y) const {
    require(x.size() == dim() && y.size() == dim(), "Laplacian2D::apply: dimension mismatch");
    for (std::size_t j = 0; j < n2_; ++j) {
      const double* xc = x.data() + j * n1_;
      const double* xl = j > 0 ? xc - n1_ : nullptr;
      const double* xr = j + 1 < n2_ ? xc + n1_ : nullptr;
      double* yc = y.data() + j * n1_;
      for (std::size_t i = 0; i < n1_; ++i) {
        double v = 4.0 * xc[i];
        if (i > 0) v -= xc[i - 1];
        if (i + 1 < n1_) v -= xc[i + 1];
        if (xl) v -= xl[i];
        if (xr) v -= xr[i];
        yc[i] = v;
      }
    }
  }

private:
  std::size_t n1_, n2_;
};

/// Rough 2-norm estimate by a few power iterations from a fixed start.
template <SymmetricOperator Op>
double norm_estimate(const Op& op, int iterations = 20, std::uint64_t seed = 7) {
  const std::size_t n = op.dim();
  Vector x = rademacher_vector(n, seed), y(n);
  scale(1.0 / norm2(x), x);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    op.apply(x, y);
    lambda = norm2(y);
    if (lambda == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / lambda;
  }
  return lambda;
}

struct OperatorCheck {
  double worst = 0.0;  // worst observed defect (relative for symmetry, min quadratic form for SPD)
  bool passed = true;
};

/// |x.A(y) - y.A(x)| <= rel_tol * |x| |y| |A| over `trials` random pairs.
template <SymmetricOperator Op>
OperatorCheck check_symmetry(const Op& op, int trials = 20, std::uint64_t seed = 11,
                             double rel_tol = 1e-10) {
  const std::size_t n = op.dim();
  const double anorm = std::max(norm_estimate(op), 1e-300);
  OperatorCheck result;
  Vector ax(n), ay(n);
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(stream_key(seed, static_cast<std::uint64_t>(t)));
    Vector x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    op.apply(x, ax);
    op.apply(y, ay);
    const double defect = std::abs(dot(x, ay) - dot(y, ax)) / (norm2(x) * norm2(y) * anorm);
    result.worst = std::max(result.worst, defect);
  }
  result.passed = result.worst <= rel_tol;
  return result;
}

/// x.A(x) > 0 for `trials` random nonzero x. `worst` holds the smallest Rayleigh quotient seen.
template <SymmetricOperator Op>
OperatorCheck check_positive(const Op& op, int trials = 20, std::uint64_t seed = 13) {
  const std::size_t n = op.dim();
  OperatorCheck result;
  result.worst = std::numeric_limits<double>::infinity();
  Vector ax(n);
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(stream_key(seed, static_cast<std::uint64_t>(t)));
    Vector x(n);
    for (double& v : x) v = rng.normal();
    op.apply(x, ax);
    result.worst = std::min(result.worst, dot(x, ax) / dot(x, x));
  }
  result.passed = result.worst > 0.0;
  return result;
}

}  // namespace slq
