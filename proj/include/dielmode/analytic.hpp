#pragma once

#include <cmath>

#include <Eigen/LU>

#include "dielmode/common.hpp"
#include "dielmode/material.hpp"

namespace dielmode {

// Closed-form reference solutions: bulk medium, slab, sphere eigenvalues.

// Bulk transfer function of one transverse plane-wave coordinate:
//   H(s) = chi (s^2 + w_mu^2) / ((1 + chi) s^2 + w_mu^2).
inline complexd infinite_medium_transfer(const DrudeLorentz& material, double omega_mu,
                                         complexd s) {
  const complexd chi = material.chi(s);
  const complexd num = s * s + omega_mu * omega_mu;
  const complexd den = (1.0 + chi) * s * s + omega_mu * omega_mu;
  const double scale = std::max(std::norm(s), omega_mu * omega_mu);
  if (std::abs(den) < 1e-14 * std::max(scale, 1e-300))
    throw numeric_error("infinite_medium_transfer: pole hit");
  return chi * num / den;
}

// Slab of thickness 2a with normally incident polarization; transverse
// modes U_m = e^{i m pi x / a} z / 2a for -cutoff <= m <= cutoff.
struct SlabModel {
  double a = 0;  // half thickness
  DrudeLorentz material;
  int cutoff = 0;  // symmetric truncation

  void validate() const {
    if (!(a > 0)) throw config_error("slab: half-thickness must be > 0");
    if (cutoff < 0) throw config_error("slab: cutoff must be >= 0");
    material.validate();
  }
};

// S_mm'(s) = (a/4c0) [B+ + B-] [(-1)^{m+m'} e^{-as/c0} - (-1)^{m'-m}],
// B+- = c0^2 / ((as +- i m pi c0)(as +- i m' pi c0)).
inline complexd slab_coupling(const SlabModel& model, int m, int mp, complexd s,
                              double c0 = constants::c0) {
  const double a = model.a;
  const complexd as = a * s;
  auto B = [&](double sign) {
    const complexd d1 = as + complexd(0, sign * m * constants::pi * c0);
    const complexd d2 = as + complexd(0, sign * mp * constants::pi * c0);
    const double scale = std::max(std::abs(as), constants::pi * c0 * (std::abs(m) + 1.0));
    if (std::abs(d1) < 1e-14 * scale || std::abs(d2) < 1e-14 * scale)
      throw numeric_error("slab_coupling: pole of B at this s");
    return (c0 / d1) * (c0 / d2);
  };
  const double sgn_sum = ((m + mp) % 2 == 0) ? 1.0 : -1.0;
  const double sgn_dif = ((mp - m) % 2 == 0) ? 1.0 : -1.0;
  const complexd bracket = sgn_sum * std::exp(-as / c0) - sgn_dif;
  return (a / (4.0 * c0)) * (B(+1.0) + B(-1.0)) * bracket;
}

// Truncated system M_mm' = delta_mm' / chi + s S_mm', inverted directly.
// Index layout: i = m + cutoff.
inline MatrixXcd slab_transfer(const SlabModel& model, complexd s, int cutoff,
                               double c0 = constants::c0) {
  const int n = 2 * cutoff + 1;
  const complexd inv_chi = model.material.inv_chi(s);
  MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      M(i, j) = s * slab_coupling(model, i - cutoff, j - cutoff, s, c0);
      if (i == j) M(i, j) += inv_chi;
    }
  Eigen::PartialPivLU<MatrixXcd> lu(M);
  return lu.solve(MatrixXcd::Identity(n, n));
}

// Largest relative change of the diagonal entries |m| <= inner when the
// truncation grows from `cutoff` to `cutoff + 4`; the convergence report.
inline double slab_truncation_change(const SlabModel& model, complexd s, int cutoff, int inner,
                                     double c0 = constants::c0) {
  const MatrixXcd H1 = slab_transfer(model, s, cutoff, c0);
  const MatrixXcd H2 = slab_transfer(model, s, cutoff + 4, c0);
  double worst = 0;
  for (int m = -inner; m <= inner; ++m) {
    const complexd a = H1(m + cutoff, m + cutoff);
    const complexd b = H2(m + cutoff + 4, m + cutoff + 4);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  return worst;
}

// Electrostatic eigenvalues of the sphere: kappa_l = (2l+1)/l with
// degeneracy 2l+1. Matches the resonance condition 1/chi + 1/kappa = 0
// against the sphere polariton at eps = -(l+1)/l.
inline double sphere_kappa_longitudinal(int l) {
  if (l < 1) throw config_error("sphere_kappa_longitudinal: l must be >= 1");
  return (2.0 * l + 1.0) / l;
}

inline int sphere_kappa_degeneracy(int l) { return 2 * l + 1; }

}  // namespace dielmode
