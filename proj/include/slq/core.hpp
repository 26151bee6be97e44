#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slq {

using Vector = std::vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was not met (dimension mismatch, empty input, ...).
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// A scalar function was evaluated outside its domain.
class DomainError : public Error {
public:
  DomainError(const std::string& what, double where) : Error(what), where_(where) {}
  double where() const noexcept { return where_; }

private:
  double where_;
};

/// An iterative numerical kernel failed to converge.
class NumericalFailure : public Error {
public:
  using Error::Error;
};

class UnsupportedParameter : public Error {
public:
  using Error::Error;
};

/// choose_K ran out of schedule before meeting its target.
class UnreachableAccuracy : public Error {
public:
  UnreachableAccuracy(const std::string& what, double best_eps, std::size_t best_K)
      : Error(what), best_eps_(best_eps), best_K_(best_K) {}
  double best_eps() const noexcept { return best_eps_; }
  std::size_t best_K() const noexcept { return best_K_; }

private:
  double best_eps_;
  std::size_t best_K_;
};

/// A pivot of the shifted tridiagonal LU recurrence underflowed.
class PivotBreakdown : public Error {
public:
  PivotBreakdown(const std::string& what, std::size_t pole) : Error(what), pole_(pole) {}
  std::size_t pole() const noexcept { return pole_; }

private:
  std::size_t pole_;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

// Small dense-vector kernels. Loops are kept plain so the compiler vectorizes them.

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace slq
