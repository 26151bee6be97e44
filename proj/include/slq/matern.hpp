#pragma once

// Matern covariance with a nugget on scattered sites of a regular grid. Products use
// the (2 n1) x (2 n2) circulant embedding of the grid kernel block and real FFTs.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "slq/core.hpp"
#include "slq/fftw.hpp"
#include "slq/random.hpp"

namespace slq {

/// phi(r) = (sqrt(2 nu) r)^nu K_nu(sqrt(2 nu) r) / (2^{nu-1} Gamma(nu)) + tau [r == 0],
/// in closed form for nu in {0.5, 1.5, 2.5}.
inline double matern_kernel(double r, double nu, double tau = 0.0) {
  require(r >= 0.0, "matern_kernel: negative distance");
  require(tau >= 0.0, "matern_kernel: negative nugget");
  double v;
  if (nu == 0.5) {
    v = std::exp(-r);
  } else if (nu == 1.5) {
    const double x = std::sqrt(3.0) * r;
    v = (1.0 + x) * std::exp(-x);
  } else if (nu == 2.5) {
    const double x = std::sqrt(5.0) * r;
    v = (1.0 + x + x * x / 3.0) * std::exp(-x);
  } else {
    throw UnsupportedParameter("matern_kernel: smoothness " + std::to_string(nu) +
                               " not supported (use 0.5, 1.5 or 2.5)");
  }
  return r == 0.0 ? v + tau : v;
}

struct MaternParams {
  std::size_t n1 = 0, n2 = 0;
  double ell1 = 0.0, ell2 = 0.0;
  double nu = 1.5;
  double tau = 1e-5;

  /// Lengthscales 0.4 n2 along the first grid axis and 0.4 n1 along the second.
  static MaternParams standard(std::size_t n1, std::size_t n2, double nu = 1.5, double tau = 1e-5) {
    return {n1, n2, 0.4 * static_cast<double>(n2), 0.4 * static_cast<double>(n1), nu, tau};
  }
};

/// `count` grid sites drawn uniformly without replacement, as flat indices i1 + n1 i2.
inline std::vector<std::size_t> sample_sites(std::size_t n1, std::size_t n2, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, "sample_sites: fraction must lie in (0, 1]");
  const std::size_t total = n1 * n2;
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total))));
  return sample_without_replacement(total, count, seed);
}

class MaternOperator {
public:
  MaternOperator(MaternParams params, std::vector<std::size_t> sites)
      : p_(params), sites_(std::move(sites)) {
    require(p_.n1 >= 1 && p_.n2 >= 1, "MaternOperator: empty grid");
    require(!sites_.empty(), "MaternOperator: empty site list");
    require(p_.ell1 > 0.0 && p_.ell2 > 0.0, "MaternOperator: lengthscales must be positive");
    matern_kernel(0.0, p_.nu, p_.tau);  // validates nu and tau
    std::vector<char> seen(p_.n1 * p_.n2, 0);
    for (std::size_t s : sites_) {
      require(s < p_.n1 * p_.n2, "MaternOperator: site index outside the grid");
      require(!seen[s], "MaternOperator: duplicate site");
      seen[s] = 1;
    }

    const std::size_t f = 2 * p_.n1, sl = 2 * p_.n2;
    fft_ = std::make_shared<const fftw::Real2D>(sl, f);
    auto row = fftw::allocate<double>(fft_->real_size());
    for (std::size_t j2 = 0; j2 < sl; ++j2) {
      const double d2 = static_cast<double>(std::min(j2, sl - j2));
      for (std::size_t j1 = 0; j1 < f; ++j1) {
        const double d1 = static_cast<double>(std::min(j1, f - j1));
        row[j2 * f + j1] = kernel_offset(d1, d2);
      }
    }
    auto spec = fftw::allocate<fftw_complex>(fft_->complex_size());
    fft_->forward(row.get(), spec.get());
    auto symbol = std::make_shared<Vector>(fft_->complex_size());
    const double scale = 1.0 / static_cast<double>(fft_->real_size());
    for (std::size_t i = 0; i < symbol->size(); ++i) (*symbol)[i] = spec[i][0] * scale;
    symbol_ = std::move(symbol);
  }

  std::size_t dim() const noexcept { return sites_.size(); }
  const MaternParams& params() const noexcept { return p_; }
  const std::vector<std::size_t>& sites() const noexcept { return sites_; }
  /// Real DFT of the embedded kernel row, scaled by 1 / (4 n1 n2).
  const Vector& symbol() const noexcept { return *symbol_; }

  /// Kernel value between grid offsets (d1, d2), nugget included at the origin.
  double kernel_offset(double d1, double d2) const {
    const double r = std::hypot(d1 / p_.ell1, d2 / p_.ell2);
    return matern_kernel(r, p_.nu, p_.tau);
  }

  /// Entry (i, j) of the kernel matrix over the sites.
  double entry(std::size_t i, std::size_t j) const {
    const auto a = sites_[i], b = sites_[j];
    const double d1 = std::abs(static_cast<double>(a % p_.n1) - static_cast<double>(b % p_.n1));
    const double d2 = std::abs(static_cast<double>(a / p_.n1) - static_cast<double>(b / p_.n1));
    return kernel_offset(d1, d2);
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    require(x.size() == dim() && y.size() == dim(), "MaternOperator::apply: dimension mismatch");
    const std::size_t f = 2 * p_.n1;
    auto buf = fftw::allocate<double>(fft_->real_size());
    auto spec = fftw::allocate<fftw_complex>(fft_->complex_size());
    std::fill(buf.get(), buf.get() + fft_->real_size(), 0.0);
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const std::size_t s = sites_[i];
      buf[(s / p_.n1) * f + s % p_.n1] = x[i];
    }
    fft_->forward(buf.get(), spec.get());
    const Vector& sym = *symbol_;
    for (std::size_t i = 0; i < sym.size(); ++i) {
      spec[i][0] *= sym[i];
      spec[i][1] *= sym[i];
    }
    fft_->backward(spec.get(), buf.get());
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const std::size_t s = sites_[i];
      y[i] = buf[(s / p_.n1) * f + s % p_.n1];
    }
  }

  std::string descriptor() const {
    return "matern(" + std::to_string(p_.n1) + "x" + std::to_string(p_.n2) + ", sites=" +
           std::to_string(sites_.size()) + ", nu=" + std::to_string(p_.nu) + ", tau=" + std::to_string(p_.tau) + ")";
  }

private:
  MaternParams p_;
  std::vector<std::size_t> sites_;
  std::shared_ptr<const fftw::Real2D> fft_;
  std::shared_ptr<const Vector> symbol_;
};

}  // namespace slq
