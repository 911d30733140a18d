#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dielmode/common.hpp"

namespace dielmode {

// Drude-Lorentz dispersion
//   chi(s) = omega_p^2 / (s^2 + s*gamma + omega_0^2)
// in the Laplace convention s = i*omega + eps. Plain metals are omega_0 = 0.
struct DrudeLorentz {
  double omega_p = 0;  // plasma frequency, rad/s
  double omega_0 = 0;  // resonance frequency, rad/s
  double gamma = 0;    // damping rate, rad/s

  void validate() const {
    if (!(omega_p > 0)) throw config_error("material: omega_p must be > 0");
    if (omega_0 < 0 || gamma < 0) throw config_error("material: omega_0, gamma must be >= 0");
  }

  bool lossless() const { return gamma == 0; }

  // Regularization used when evaluating on the imaginary axis: lossless
  // models get a small positive real shift so the rational form never lands
  // on a pole; lossy models need none.
  double epsilon_shift() const { return lossless() ? 1e-9 * omega_p : 0.0; }

  complexd laplace_s(double omega) const { return complexd(epsilon_shift(), omega); }

  complexd chi(complexd s) const {
    if (omega_p == 0) return 0.0;  // explicit zero model
    const complexd den = s * s + s * gamma + omega_0 * omega_0;
    const double scale =
        std::max({std::norm(s), std::abs(s) * gamma, omega_0 * omega_0, 1e-300});
    if (std::abs(den) < 1e-14 * scale)
      throw numeric_error("susceptibility evaluated at a pole of the rational form");
    return omega_p * omega_p / den;
  }

  complexd chi_omega(double omega) const { return chi(laplace_s(omega)); }

  // 1/chi as the entire rational (s^2 + s gamma + omega_0^2)/omega_p^2; the
  // system matrices need this combination and it stays finite at chi's poles
  // (a metal at dc, for instance).
  complexd inv_chi(complexd s) const {
    if (omega_p == 0) throw numeric_error("inv_chi of the zero model");
    return (s * s + s * gamma + omega_0 * omega_0) / (omega_p * omega_p);
  }

  // sigma(omega) = -eps0 * omega * Im chi(omega); closed rational form, >= 0
  // for any passive parameter set.
  double sigma(double omega) const {
    if (omega < 0) throw config_error("sigma: omega must be >= 0");
    const double d1 = omega_0 * omega_0 - omega * omega;
    const double den = d1 * d1 + omega * omega * gamma * gamma;
    if (den == 0) return 0.0;  // lossless model exactly at resonance
    return constants::eps0 * omega * omega * gamma * omega_p * omega_p / den;
  }

  double alpha(double nu) const { return std::sqrt(2.0 * sigma(nu) / constants::pi); }

  // min over omega of c0 / (omega sqrt|chi|); exact for metals, a scan
  // estimate otherwise (the lossless dielectric case degenerates to zero at
  // resonance, so the scan excludes the pole's immediate neighborhood).
  // Pass the working light speed when running in scaled units.
  double lambda_c(double c0 = constants::c0) const {
    if (omega_0 == 0 && gamma == 0) return c0 / omega_p;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 400; ++k) {
      const double omega = omega_p * std::pow(10.0, -2.0 + 4.0 * k / 400.0);
      double abschi;
      try {
        abschi = std::abs(chi(complexd(epsilon_shift() + 1e-6 * omega_p, omega)));
      } catch (const Error&) {
        continue;
      }
      if (abschi > 0) best = std::min(best, c0 / (omega * std::sqrt(abschi)));
    }
    return best;
  }
};

// Max-norm residual of the first Kramers-Kronig relation evaluated on a
// grid, principal value taken by excluding the singular grid point. In the
// Laplace convention used here chi_i < 0 on omega > 0, so the dispersion
// relation reads chi_r(w) = (2/pi) PV int dw' w' (-chi_i(w')) / (w'^2 - w^2).
// A self-test, not a transform. Meaningful for lossy or zero models.
inline double kk_residual(const DrudeLorentz& model, const std::vector<double>& omega_grid) {
  const std::size_t n = omega_grid.size();
  if (n < 16) throw config_error("kk_residual: grid too small");
  for (std::size_t i = 1; i < n; ++i)
    if (!(omega_grid[i] > omega_grid[i - 1]))
      throw config_error("kk_residual: grid must be strictly increasing");
  if (model.gamma > 0) {
    // require a handful of points across the resonance width
    int inside = 0;
    for (double w : omega_grid)
      if (std::abs(w - model.omega_0) < 2.0 * model.gamma + 0.05 * model.omega_p) inside++;
    if (inside < 8) throw config_error("kk_residual: grid too coarse to bracket the resonance");
  }

  std::vector<double> chi_r(n), chi_i(n), wgt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const complexd c = model.chi(complexd(model.epsilon_shift(), omega_grid[i]));
    chi_r[i] = c.real();
    chi_i[i] = c.imag();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? omega_grid[0] : omega_grid[i - 1];
    const double right = i + 1 == n ? omega_grid[n - 1] : omega_grid[i + 1];
    wgt[i] = 0.5 * (right - left);
  }

  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = omega_grid[i];
    double pv = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;  // symmetric-point exclusion
      const double wp = omega_grid[j];
      const double den = wp * wp - w * w;
      if (den == 0) continue;
      pv += wgt[j] * wp * (-chi_i[j]) / den;
    }
    worst = std::max(worst, std::abs(chi_r[i] - (2.0 / constants::pi) * pv));
  }
  return worst;
}

}  // namespace dielmode
