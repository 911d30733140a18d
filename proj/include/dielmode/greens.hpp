#pragma once

#include <cmath>
#include <complex>

#include "dielmode/common.hpp"

namespace dielmode {

// Free-space dyadic Green functions for the vector potential in the Laplace
// domain (temporal gauge for the total kernel, Coulomb gauge transverse /
// longitudinal split). Every kernel here is a combination of I, e_r e_r with
// scalar radial coefficients, hence symmetric and rotation-equivariant.

namespace greens {

// f1(xi) = sinh(xi)/xi.
inline complexd f1(complexd xi) {
  if (std::abs(xi) < 1e-2) {
    const complexd x2 = xi * xi;
    return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0));
  }
  return std::sinh(xi) / xi;
}

// exp(-xi) f1(xi) = (1 - exp(-2 xi)) / (2 xi); stable for Re xi >= 0.
inline complexd expf1(complexd xi) {
  if (std::abs(xi) < 1e-2) return std::exp(-xi) * f1(xi);
  return (1.0 - std::exp(-2.0 * xi)) / (2.0 * xi);
}

// f2(xi) = 3/(2 xi^3) (-2 + xi^2 + 2 xi e^-xi + 2 e^-xi); regular at 0.
inline complexd f2(complexd xi) {
  if (std::abs(xi) < 1e-2) {
    // 1 - 3x/8 + x^2/10 - x^3/48 + x^4/280 - x^5/1920
    return 1.0 +
           xi * (-3.0 / 8.0 +
                 xi * (1.0 / 10.0 + xi * (-1.0 / 48.0 + xi * (1.0 / 280.0 - xi / 1920.0))));
  }
  const complexd e = std::exp(-xi);
  return 1.5 / (xi * xi * xi) * (-2.0 + xi * xi + 2.0 * xi * e + 2.0 * e);
}

}  // namespace greens

namespace detail {
inline void check_r(double r) {
  if (!(r > 0)) throw numeric_error("Green kernel evaluated at r = 0");
}
inline void check_s(complexd s) {
  if (s == complexd(0, 0)) throw numeric_error("Green kernel evaluated at s = 0");
}
}  // namespace detail

// G(r;s) = e^{-sr/c0}/(4 pi r) [ (I - ee) + (c0/sr)(1 + c0/sr)(I - 3ee) ].
inline Dyad3c green_total(const Vec3& r, complexd s, double c0 = constants::c0) {
  const double rn = r.norm();
  detail::check_r(rn);
  detail::check_s(s);
  const Vec3 e = r / rn;
  const Dyad3 ee = e * e.transpose();
  const complexd u = c0 / (s * rn);
  const complexd pref = std::exp(-s * rn / c0) / (4.0 * constants::pi * rn);
  Dyad3c out = pref * ((Dyad3::Identity() - ee) + (u * (1.0 + u)) * (Dyad3::Identity() - 3.0 * ee));
  return out;
}

// s^2 G(r;s), grouped so the s->0 limit is free of cancellation:
//   e^{-sr/c0}/(4 pi r) [ s^2 (I-ee) + (s c0/r + c0^2/r^2)(I - 3ee) ].
inline Dyad3c green_total_scaled_s2(const Vec3& r, complexd s, double c0 = constants::c0) {
  const double rn = r.norm();
  detail::check_r(rn);
  const Vec3 e = r / rn;
  const Dyad3 ee = e * e.transpose();
  const complexd pref = std::exp(-s * rn / c0) / (4.0 * constants::pi * rn);
  return pref * (s * s * (Dyad3c::Identity() - ee.cast<complexd>()) +
                 (s * c0 / rn + c0 * c0 / (rn * rn)) *
                     (Dyad3c::Identity() - 3.0 * ee.cast<complexd>()));
}

// G_par(r;s) = (c0^2/s^2) (I - 3ee) / (4 pi r^3).
inline Dyad3c green_longitudinal(const Vec3& r, complexd s, double c0 = constants::c0) {
  const double rn = r.norm();
  detail::check_r(rn);
  detail::check_s(s);
  const Vec3 e = r / rn;
  const Dyad3 ee = e * e.transpose();
  const complexd pref = c0 * c0 / (s * s) / (4.0 * constants::pi * rn * rn * rn);
  return pref * (Dyad3::Identity() - 3.0 * ee);
}

inline Dyad3c green_transverse(const Vec3& r, complexd s, double c0 = constants::c0) {
  return green_total(r, s, c0) - green_longitudinal(r, s, c0);
}

// g0_perp(r) = (I + ee) / (8 pi r); the static transverse kernel.
inline Dyad3 green_transverse_static(const Vec3& r) {
  const double rn = r.norm();
  detail::check_r(rn);
  const Vec3 e = r / rn;
  return (Dyad3::Identity() + e * e.transpose()) / (8.0 * constants::pi * rn);
}

// Dynamic part G_d = G_perp - g0_perp; regular everywhere including r = 0:
//   -(s/4 pi c0) e^{-xi} f1(xi) (I - ee) + (s/12 pi c0) f2(2 xi) (I - 3ee),
// xi = s r / (2 c0). At r = 0 the dyad shapes average to -(s/6 pi c0) I.
inline Dyad3c green_transverse_dynamic(const Vec3& r, complexd s, double c0 = constants::c0) {
  const double rn = r.norm();
  if (rn == 0)
    return -(s / (6.0 * constants::pi * c0)) * Dyad3c::Identity();
  const Vec3 e = r / rn;
  const Dyad3 ee = e * e.transpose();
  const complexd xi = s * rn / (2.0 * c0);
  const complexd a = -(s / (4.0 * constants::pi * c0)) * greens::expf1(xi);
  const complexd b = (s / (12.0 * constants::pi * c0)) * greens::f2(2.0 * xi);
  return a * (Dyad3::Identity() - ee) + b * (Dyad3::Identity() - 3.0 * ee);
}

// Same split, returned as scalar coefficients of (I - ee) and (I - 3ee); the
// assembly loops contract these against mode vectors directly.
struct DynCoeffs {
  complexd a;  // multiplies (I - ee)
  complexd b;  // multiplies (I - 3ee)
};

inline DynCoeffs green_transverse_dynamic_coeffs(double rn, complexd s, double c0 = constants::c0) {
  const complexd xi = s * rn / (2.0 * c0);
  return {-(s / (4.0 * constants::pi * c0)) * greens::expf1(xi),
          (s / (12.0 * constants::pi * c0)) * greens::f2(2.0 * xi)};
}

// Small-argument expansion of G_perp through (s r/c0)^2; cross-check only.
inline Dyad3c green_asymptotic_small(const Vec3& r, complexd s, double c0 = constants::c0) {
  const double rn = r.norm();
  detail::check_r(rn);
  const Vec3 e = r / rn;
  const Dyad3 ee = e * e.transpose();
  const complexd q = s * rn / c0;
  Dyad3c out = green_transverse_static(r).cast<complexd>();
  out -= (s / (6.0 * constants::pi * c0)) * Dyad3c::Identity();
  out += (q * q / (32.0 * constants::pi * rn)) * (3.0 * Dyad3::Identity() - ee);
  return out;
}

}  // namespace dielmode
