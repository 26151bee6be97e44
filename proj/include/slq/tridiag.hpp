#pragma once

// Symmetric tridiagonal (Jacobi) matrices, their eigen-decomposition by implicit
// QL, and the Gauss quadrature value e1' f(T) e1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "slq/core.hpp"

namespace slq {

/// T = tridiag(betas, alphas, betas); betas[j] couples rows j and j+1.
struct SymTridiagonal {
  Vector alphas;
  Vector betas;

  std::size_t order() const noexcept { return alphas.size(); }

  /// Leading principal submatrix of order m.
  SymTridiagonal leading(std::size_t m) const {
    require(m >= 1 && m <= order(), "SymTridiagonal::leading: order out of range");
    return {Vector(alphas.begin(), alphas.begin() + static_cast<std::ptrdiff_t>(m)),
            Vector(betas.begin(), betas.begin() + static_cast<std::ptrdiff_t>(m - 1))};
  }

  void validate() const {
    require(!alphas.empty(), "SymTridiagonal: empty matrix");
    require(betas.size() + 1 == alphas.size(), "SymTridiagonal: need order-1 off-diagonals");
    for (double b : betas) require(b >= 0.0, "SymTridiagonal: negative off-diagonal");
  }

  /// Max absolute row sum (the 1-norm, equal to the inf-norm by symmetry).
  double norm1() const {
    double r = 0.0;
    const std::size_t m = order();
    for (std::size_t i = 0; i < m; ++i) {
      double s = std::abs(alphas[i]);
      if (i > 0) s += betas[i - 1];
      if (i + 1 < m) s += betas[i];
      r = std::max(r, s);
    }
    return r;
  }
};

struct TridiagEigen {
  Vector thetas;     // ascending
  Vector first_row;  // S(0, k), the first component of the k-th unit eigenvector
  // Full eigenvectors, column-major (vectors[k * m + i] = S(i, k)); empty unless requested.
  Vector vectors;
};

namespace detail {

// Implicit QL with Wilkinson-type shifts (EISPACK tql2), applying the rotations to
// `rows` rows of the eigenvector matrix only. rows = 1 yields just the first row.
inline void tql(Vector& d, Vector& e, Vector& z, std::size_t rows, int max_iter) {
  const std::size_t n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  double shift = 0.0, tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > max_iter)
          throw NumericalFailure("tridiag_eigen: QL iteration did not converge for eigenvalue " +
                                 std::to_string(l));
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        shift += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0, s = 0.0, s2 = 0.0;
        const double el1 = e[l + 1];
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < rows; ++k) {
            double* zk = z.data() + k;  // row k, column j at zk[j * rows]
            h = zk[(ii + 1) * rows];
            zk[(ii + 1) * rows] = s * zk[ii * rows] + c * h;
            zk[ii * rows] = c * zk[ii * rows] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += shift;
    e[l] = 0.0;
  }
}

}  // namespace detail

/// All eigenvalues of T with the first components of its orthonormal eigenvectors,
/// sorted ascending. With `full_vectors` the complete eigenvector matrix is formed too.
inline TridiagEigen tridiag_eigen(const SymTridiagonal& T, bool full_vectors = false,
                                  int max_iter_per_eigenvalue = 50) {
  T.validate();
  const std::size_t m = T.order();
  const std::size_t rows = full_vectors ? m : 1;
  Vector d = T.alphas;
  Vector e(m, 0.0);
  std::copy(T.betas.begin(), T.betas.end(), e.begin());
  Vector z(rows * m, 0.0);  // z[j * rows + k] = S(k, j)
  for (std::size_t k = 0; k < rows; ++k) z[k * rows + k] = 1.0;

  detail::tql(d, e, z, rows, max_iter_per_eigenvalue);

  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  TridiagEigen out;
  out.thetas.resize(m);
  out.first_row.resize(m);
  if (full_vectors) out.vectors.resize(m * m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = perm[k];
    out.thetas[k] = d[j];
    out.first_row[k] = z[j * rows];
    if (full_vectors)
      for (std::size_t i = 0; i < m; ++i) out.vectors[k * m + i] = z[j * rows + i];
  }
  return out;
}

/// sum_k S(0,k)^2 f(theta_k) for a precomputed decomposition.
template <class F>
double quadrature_value(const TridiagEigen& eig, F&& f) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < eig.thetas.size(); ++k) {
    const double w = eig.first_row[k] * eig.first_row[k];
    acc.add(w * f(eig.thetas[k]));
  }
  return acc.value();
}

/// e1' f(T) e1 by Gauss quadrature on the Ritz values of T.
template <class F>
double quadrature_value(const SymTridiagonal& T, F&& f) {
  return quadrature_value(tridiag_eigen(T), std::forward<F>(f));
}

}  // namespace slq
