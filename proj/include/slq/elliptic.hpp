#pragma once

// Complete elliptic integrals and Jacobi elliptic functions at complex argument.
// Real-argument kernels come from Boost.Math; the complex extension uses the
// imaginary-transformation addition formula.

#include <complex>
#include <limits>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include "slq/core.hpp"

namespace slq {

using Complex = std::complex<double>;

struct JacobiTriple {
  Complex sn, cn, dn;
};

/// Elliptic toolkit for a fixed modulus k in [0, 1).
class Elliptic {
public:
  /// Build from the modulus k and its complement k' = sqrt(1 - k^2); passing both
  /// avoids cancellation when one of them is tiny.
  Elliptic(double k, double kp) : k_(k), kp_(kp) {
    require(k >= 0.0 && k < 1.0 && kp > 0.0 && kp <= 1.0, "Elliptic: modulus out of range");
    K_ = boost::math::ellint_1(k_);
    Kp_ = kp_ < 1.0 ? boost::math::ellint_1(kp_) : std::numeric_limits<double>::infinity();
  }
  explicit Elliptic(double k) : Elliptic(k, std::sqrt((1.0 - k) * (1.0 + k))) {}

  double k() const noexcept { return k_; }
  double kp() const noexcept { return kp_; }
  /// Complete integral K(k).
  double K() const noexcept { return K_; }
  /// Complementary integral K'(k) = K(k').
  double Kp() const noexcept { return Kp_; }

  /// sn, cn, dn at real argument.
  JacobiTriple real(double u) const {
    double cn = 0.0, dn = 0.0;
    const double sn = boost::math::jacobi_elliptic(k_, u, &cn, &dn);
    return {sn, cn, dn};
  }

  /// sn, cn, dn at z = x + iy.
  JacobiTriple operator()(Complex z) const {
    double c = 0.0, d = 0.0, c1 = 0.0, d1 = 0.0;
    const double s = boost::math::jacobi_elliptic(k_, z.real(), &c, &d);
    const double s1 = boost::math::jacobi_elliptic(kp_, z.imag(), &c1, &d1);
    const double m = k_ * k_;
    const double den = c1 * c1 + m * s * s * s1 * s1;
    return {Complex(s * d1, c * d * s1 * c1) / den, Complex(c * c1, -s * d * s1 * d1) / den,
            Complex(d * c1 * d1, -m * s * c * s1) / den};
  }

private:
  double k_, kp_, K_, Kp_;
};

}  // namespace slq
