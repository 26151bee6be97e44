#pragma once

// Ground truth used by the tests and the table runs: closed-form Laplacian spectra,
// sine-transform bilinear forms, and dense eigen/Cholesky routes for small matrices.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "slq/core.hpp"
#include "slq/fftw.hpp"
#include "slq/matern.hpp"
#include "slq/operators.hpp"

namespace slq {

inline constexpr std::size_t dense_oracle_limit = 4000;

/// Eigenvalues of the n1 x n2 Dirichlet Laplacian, lambda_ij = mu1_i + mu2_j.
class LaplacianSpectrum {
public:
  LaplacianSpectrum(std::size_t n1, std::size_t n2) : mu1_(factor(n1)), mu2_(factor(n2)) {}

  std::size_t n1() const noexcept { return mu1_.size(); }
  std::size_t n2() const noexcept { return mu2_.size(); }
  /// lambda for 0-based mode indices (i, j).
  double operator()(std::size_t i, std::size_t j) const { return mu1_[i] + mu2_[j]; }
  double min() const noexcept { return mu1_.front() + mu2_.front(); }
  double max() const noexcept { return mu1_.back() + mu2_.back(); }
  double condition() const noexcept { return max() / min(); }

  static Vector factor(std::size_t n) {
    require(n >= 1, "LaplacianSpectrum: empty dimension");
    Vector mu(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(static_cast<double>(i + 1) * std::numbers::pi / (2.0 * static_cast<double>(n + 1)));
      mu[i] = 4.0 * s * s;
    }
    return mu;
  }

private:
  Vector mu1_, mu2_;
};

/// tr f(A) for the n1 x n2 Laplacian.
template <class F>
double exact_trace_laplacian(F&& f, std::size_t n1, std::size_t n2) {
  const LaplacianSpectrum spec(n1, n2);
  CompensatedSum acc;
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 0; i < n1; ++i) acc.add(f(spec(i, j)));
  return acc.value();
}

/// Spectral weights omega^2 of v in the Laplacian eigenbasis via the 2D sine transform;
/// entry i + n1 j pairs with eigenvalue lambda_ij.
inline Vector laplacian_spectral_weights(std::size_t n1, std::size_t n2, std::span<const double> v) {
  require(v.size() == n1 * n2, "laplacian_spectral_weights: length mismatch");
  const fftw::Dst2D dst(n2, n1);
  Vector w = dst(v);
  for (double& x : w) x *= x;
  return w;
}

/// v' f(A) v for the n1 x n2 Laplacian.
template <class F>
double exact_bilinear_laplacian(F&& f, std::size_t n1, std::size_t n2, std::span<const double> v) {
  const Vector w = laplacian_spectral_weights(n1, n2, v);
  const LaplacianSpectrum spec(n1, n2);
  CompensatedSum acc;
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 0; i < n1; ++i) acc.add(w[i + n1 * j] * f(spec(i, j)));
  return acc.value();
}

/// Dense matrix of any operator by applying it to unit vectors.
template <SymmetricOperator Op>
Eigen::MatrixXd assemble_dense(const Op& op) {
  const std::size_t n = op.dim();
  require(n <= dense_oracle_limit, "assemble_dense: dimension exceeds the dense oracle limit");
  Eigen::MatrixXd M(n, n);
  Vector e(n, 0.0), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, y);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y[i];
  }
  return M;
}

/// Kernel matrix of a Matern operator from direct kernel evaluations.
inline Eigen::MatrixXd matern_dense(const MaternOperator& op) {
  const std::size_t n = op.dim();
  require(n <= dense_oracle_limit, "matern_dense: dimension exceeds the dense oracle limit");
  Eigen::MatrixXd M(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = op.entry(i, j);
  return M;
}

/// Eigendecomposition-based evaluation of f(M) for a small dense symmetric M.
class DenseFunctionOracle {
public:
  explicit DenseFunctionOracle(const Eigen::MatrixXd& M) {
    require(M.rows() == M.cols(), "DenseFunctionOracle: matrix must be square");
    require(static_cast<std::size_t>(M.rows()) <= dense_oracle_limit, "DenseFunctionOracle: matrix too large");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericalFailure("DenseFunctionOracle: eigensolver failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }

  template <class F>
  double trace(F&& f) const {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < values_.size(); ++i) acc.add(f(values_(i)));
    return acc.value();
  }

  /// u' f(M) u.
  template <class F>
  double bilinear(F&& f, std::span<const double> u) const {
    require(u.size() == static_cast<std::size_t>(values_.size()), "DenseFunctionOracle::bilinear: length mismatch");
    const Eigen::Map<const Eigen::VectorXd> uu(u.data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::VectorXd w = vectors_.transpose() * uu;
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < w.size(); ++i) acc.add(w(i) * w(i) * f(values_(i)));
    return acc.value();
  }

  /// e1' f(M) e1.
  template <class F>
  double first_entry(F&& f) const {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < values_.size(); ++i) acc.add(vectors_(0, i) * vectors_(0, i) * f(values_(i)));
    return acc.value();
  }

  template <class F>
  Eigen::MatrixXd matrix(F&& f) const {
    Eigen::VectorXd fv(values_.size());
    for (Eigen::Index i = 0; i < values_.size(); ++i) fv(i) = f(values_(i));
    return vectors_ * fv.asDiagonal() * vectors_.transpose();
  }

private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

/// log det M = 2 sum log diag(L) from the Cholesky factor M = L L'.
inline double dense_logdet(const Eigen::MatrixXd& M) {
  require(M.rows() == M.cols(), "dense_logdet: matrix must be square");
  require(static_cast<std::size_t>(M.rows()) <= dense_oracle_limit, "dense_logdet: matrix too large");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  require(llt.info() == Eigen::Success, "dense_logdet: matrix is not positive definite");
  const Eigen::MatrixXd& L = llt.matrixLLT();
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < L.rows(); ++i) acc.add(std::log(L(i, i)));
  return 2.0 * acc.value();
}

}  // namespace slq
