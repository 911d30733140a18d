#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dielmode/common.hpp"
#include "dielmode/coupling.hpp"
#include "dielmode/greens.hpp"
#include "dielmode/material.hpp"
#include "dielmode/response.hpp"

namespace dielmode {

// Statistics of the driving coordinates: mean spectra on the sweep grid and,
// optionally, a two-time correlation kernel on a uniform time grid. These are
// c-number inputs; the machinery below transports them through the transfer
// and impulse kernels.
struct DrivingStatistics {
  std::vector<double> omega;  // must match the sweep grid
  MatrixXcd mean;             // n_freq x Q_sel
  MatrixXcd mean_dc;          // 1 x Q_sel

  std::vector<double> tau;  // uniform, starting at 0
  struct CorrEntry {
    int m1 = 0, m2 = 0;  // selection indices
    MatrixXd k;          // k(tau1, tau2)
  };
  std::vector<CorrEntry> corr;
  bool corr_symmetric = false;

  void check_grid(const TransferSample& ts) const {
    if (omega.size() != ts.omega.size())
      throw config_error("driving statistics grid does not match the sweep grid");
    for (std::size_t i = 0; i < omega.size(); ++i)
      if (std::abs(omega[i] - ts.omega[i]) > 1e-12 * ts.omega.back())
        throw config_error("driving statistics grid does not match the sweep grid");
  }
};

// Point evaluation of the basis modes inside the body, with the guard band
// of half a local edge length around the boundary.
class ModePointEvaluator {
 public:
  explicit ModePointEvaluator(const ModeBasis& basis, double guard_factor = 0.5)
      : basis_(&basis), guard_(guard_factor) {}

  // -1 outside V, otherwise the containing tet
  int locate(const Vec3& p) const {
    const VolumeMesh& mesh = *basis_->mesh;
    for (int t = 0; t < mesh.n_tets(); ++t) {
      const Vec3 v0 = mesh.vertex(t, 0);
      const Eigen::Matrix3d A = (Eigen::Matrix3d() << mesh.vertex(t, 1) - v0,
                                 mesh.vertex(t, 2) - v0, mesh.vertex(t, 3) - v0)
                                    .finished();
      const Vec3 lam = A.fullPivLu().solve(p - v0);
      const double tol = -1e-12;
      if (lam[0] >= tol && lam[1] >= tol && lam[2] >= tol && lam.sum() <= 1.0 - tol) return t;
    }
    return -1;
  }

  bool inside(const Vec3& p) const { return locate(p) >= 0; }

  void require_clear_of_boundary(const Vec3& p) const {
    const auto [dist, edge] = boundary_distance(basis_->mesh->boundary, p);
    if (dist < guard_ * edge)
      throw numeric_error("evaluation point within the boundary guard band");
  }

  // all basis modes at one interior point
  std::vector<Vec3> eval_inside(const Vec3& p) const {
    require_clear_of_boundary(p);
    const int t = locate(p);
    if (t < 0) throw numeric_error("evaluation point is outside the body");
    std::vector<Vec3> out(basis_->n_modes(), Vec3::Zero());
    if (basis_->n_par > 0) {
      std::vector<Vec3> raw(basis_->n_par);
      eval_longitudinal_raw(basis_->mesh->boundary, basis_->charge, &p, 1, raw.data());
      for (int m = 0; m < basis_->n_par; ++m) out[m] = raw[m];
    }
    // transverse modes are piecewise constant; reuse the sampled averages
    const double* avg = basis_->avg_at(t);
    const int Q = basis_->n_modes();
    for (int m = basis_->n_par; m < Q; ++m)
      out[m] = Vec3(avg[m], avg[Q + m], avg[2 * Q + m]);
    return out;
  }

  const ModeBasis& basis() const { return *basis_; }

 private:
  const ModeBasis* basis_;
  double guard_;
};

// Theta(r, r'; s) = sum_{mm'} H_mm' U_m(r) U_m'(r'): the spatial kernel that
// carries driving fields into the polarization.
inline Dyad3c theta_kernel(const MatrixXcd& H, const ModeSelection& sel,
                           const ModePointEvaluator& eval, const Vec3& r, const Vec3& rp) {
  const auto Ur = eval.eval_inside(r);
  const auto Urp = eval.eval_inside(rp);
  Dyad3c theta = Dyad3c::Zero();
  for (int i = 0; i < sel.size(); ++i)
    for (int j = 0; j < sel.size(); ++j)
      theta += H(i, j) * (Ur[sel.modes[i]] * Urp[sel.modes[j]].transpose()).cast<complexd>();
  return theta;
}

struct FieldSample {
  std::vector<Vec3> points;
  std::vector<double> omega;
  // values[k][p]: complex field at frequency k, point p
  std::vector<std::vector<Eigen::Vector3cd>> values;
  std::vector<char> point_inside;
  std::vector<char> flagged;  // per-frequency quality flags
};

// Polarization coordinates <P_m>(omega) = sum_m' H_mm'(omega) Fbar_m'(omega).
inline MatrixXcd expectation_coordinates(const DrivingStatistics& stats,
                                         const TransferSample& ts) {
  stats.check_grid(ts);
  const int n = static_cast<int>(ts.omega.size());
  const int q = static_cast<int>(ts.H_dc.rows());
  if (stats.mean.cols() != q)
    throw config_error("driving statistics mode count does not match the selection");
  MatrixXcd out(n, q);
  for (int k = 0; k < n; ++k) out.row(k) = (ts.H[k] * stats.mean.row(k).transpose()).transpose();
  return out;
}

// Synthesize the polarization field at interior points per frequency.
inline FieldSample expectation_polarization(const DrivingStatistics& stats,
                                            const TransferSample& ts, const ModeSelection& sel,
                                            const ModePointEvaluator& eval,
                                            const std::vector<Vec3>& points) {
  const MatrixXcd coords = expectation_coordinates(stats, ts);
  FieldSample out;
  out.points = points;
  out.omega = ts.omega;
  out.flagged.assign(ts.omega.size(), 0);
  std::vector<std::vector<Vec3>> modes_at(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    modes_at[p] = eval.eval_inside(points[p]);
    out.point_inside.push_back(1);
  }
  out.values.assign(ts.omega.size(), std::vector<Eigen::Vector3cd>(points.size()));
  for (std::size_t k = 0; k < ts.omega.size(); ++k)
    for (std::size_t p = 0; p < points.size(); ++p) {
      Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
      for (int i = 0; i < sel.size(); ++i)
        v += coords(k, i) * modes_at[p][sel.modes[i]].cast<complexd>();
      out.values[k][p] = v;
    }
  return out;
}

// <P(r1;t1) . P(r2;t2)>: quadruple mode sum with the double convolution of
// two impulse-response entries against the correlation kernel, trapezoid on
// the tau grid.
inline double two_time_correlation(const DrivingStatistics& stats, const ImpulseResponse& ir,
                                   const ModeSelection& sel, const ModePointEvaluator& eval,
                                   const Vec3& r1, double t1, const Vec3& r2, double t2) {
  if (stats.tau.size() < 2) throw config_error("two_time_correlation: no correlation grid");
  const double tau_max = stats.tau.back();
  if (std::max(t1, t2) > tau_max + 1e-12)
    throw config_error("correlation kernel grid does not cover the requested times");
  const double dtau = stats.tau[1] - stats.tau[0];
  const int ntau = static_cast<int>(stats.tau.size());

  const auto U1 = eval.eval_inside(r1);
  const auto U2 = eval.eval_inside(r2);
  const int q = sel.size();

  // precompute h rows against the kernel: for each source index, the
  // convolution c_m'(t) = sum_tau h_{m m'}(t - tau) k-dependent; we fold the
  // full quadruple sum directly since q stays small
  double acc = 0;
  for (const auto& ce : stats.corr) {
    if (ce.m1 < 0 || ce.m1 >= q || ce.m2 < 0 || ce.m2 >= q)
      throw config_error("correlation entry references a mode outside the selection");
    if (ce.k.rows() != ntau || ce.k.cols() != ntau)
      throw config_error("correlation kernel size does not match the tau grid");
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const double Z = U1[sel.modes[i]].dot(U2[sel.modes[j]]);
        if (Z == 0.0) continue;
        double conv = 0;
        for (int a = 0; a < ntau; ++a) {
          const double wa = (a == 0 || a == ntau - 1) ? 0.5 : 1.0;
          const double h1 = ir.at(t1 - stats.tau[a])(i, ce.m1);
          if (h1 == 0.0) continue;
          double inner = 0;
          for (int b = 0; b < ntau; ++b) {
            const double wb = (b == 0 || b == ntau - 1) ? 0.5 : 1.0;
            inner += wb * ir.at(t2 - stats.tau[b])(j, ce.m2) * ce.k(a, b);
          }
          conv += wa * h1 * inner;
        }
        acc += Z * conv * dtau * dtau;
      }
  }
  return acc;
}

// E = (P - P_free) / (eps0 chi) inside the body, coordinate-wise in the
// frequency domain, then mode synthesis.
inline FieldSample efield_inside(const MatrixXcd& p_coords, const MatrixXcd& p_free_coords,
                                 const DrudeLorentz& material, const TransferSample& ts,
                                 const ModeSelection& sel, const ModePointEvaluator& eval,
                                 const std::vector<Vec3>& points) {
  const int n = static_cast<int>(ts.omega.size());
  const int q = sel.size();
  if (p_coords.rows() != n || p_coords.cols() != q)
    throw config_error("efield_inside: coordinate array does not match grid/selection");
  FieldSample out;
  out.points = points;
  out.omega = ts.omega;
  out.flagged.assign(n, 0);
  std::vector<std::vector<Vec3>> modes_at(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    modes_at[p] = eval.eval_inside(points[p]);
    out.point_inside.push_back(1);
  }
  out.values.assign(n, std::vector<Eigen::Vector3cd>(points.size()));
  for (int k = 0; k < n; ++k) {
    const complexd s(ts.sigma_c == 0 ? material.epsilon_shift() : ts.sigma_c, ts.omega[k]);
    const complexd chi = material.chi(s);
    if (std::abs(chi) < 1e-12) out.flagged[k] = 1;
    for (std::size_t p = 0; p < points.size(); ++p) {
      Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
      for (int i = 0; i < q; ++i) {
        const complexd e_coord =
            (p_coords(k, i) - p_free_coords(k, i)) / (constants::eps0 * chi);
        v += e_coord * modes_at[p][sel.modes[i]].cast<complexd>();
      }
      out.values[k][p] = v;
    }
  }
  return out;
}

// Scattered field outside the body: -mu0 s^2 int G(r - r'; s) P(r') dV',
// quadratured with the basis sampling rule; the free-field part is the
// caller's to add.
inline FieldSample efield_outside(const MatrixXcd& p_coords, const TransferSample& ts,
                                  const ModeSelection& sel, const ModePointEvaluator& eval,
                                  const std::vector<Vec3>& points,
                                  double c0 = constants::c0) {
  const ModeBasis& mb = eval.basis();
  const VolumeMesh& mesh = *mb.mesh;
  const int n = static_cast<int>(ts.omega.size());
  const int q = sel.size();
  if (p_coords.rows() != n || p_coords.cols() != q)
    throw config_error("efield_outside: coordinate array does not match grid/selection");

  FieldSample out;
  out.points = points;
  out.omega = ts.omega;
  out.flagged.assign(n, 0);
  for (const auto& p : points) {
    if (eval.inside(p)) throw config_error("efield_outside: point lies inside the body");
    eval.require_clear_of_boundary(p);
    out.point_inside.push_back(0);
  }

  const int nq = mb.nq;
  const int Q = mb.n_modes();
  out.values.assign(n, std::vector<Eigen::Vector3cd>(points.size(), Eigen::Vector3cd::Zero()));
  for (int k = 0; k < n; ++k) {
    const complexd s(ts.sigma_c, ts.omega[k]);
    for (std::size_t p = 0; p < points.size(); ++p) {
      Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
      for (int t = 0; t < mesh.n_tets(); ++t)
        for (int g = 0; g < nq; ++g) {
          const std::size_t pt = static_cast<std::size_t>(nq) * t + g;
          // polarization at the quadrature point
          Eigen::Vector3cd P = Eigen::Vector3cd::Zero();
          const double* v = mb.val_at(pt);
          for (int i = 0; i < q; ++i) {
            const int gi = sel.modes[i];
            P += p_coords(k, i) * Eigen::Vector3d(v[gi], v[Q + gi], v[2 * Q + gi]).cast<complexd>();
          }
          const Dyad3c G = green_total_scaled_s2(points[p] - mb.gauss_pts[pt], s, c0);
          acc += G * P * (mb.gauss_w[g] * mesh.volume[t]);
        }
      // mu0 expressed through the working c0 so scaled-unit runs stay consistent
      out.values[k][p] = -acc / (constants::eps0 * c0 * c0);
    }
  }
  return out;
}

// Direct Coulomb field of a longitudinal mode's polarization charge
// sigma_P = U . n (its interior boundary trace); the static oracle for the
// exterior field, summed with exact panel integrals.
inline Eigen::Vector3d coulomb_field_of_mode(const ModeBasis& mb, int par_mode, const Vec3& r) {
  const SurfaceMesh& surf = mb.mesh->boundary;
  Vec3 acc = Vec3::Zero();
  for (int j = 0; j < surf.n_triangles(); ++j)
    acc += mb.trace(j, par_mode) *
           tri_inv_r(r, surf.vertex(j, 0), surf.vertex(j, 1), surf.vertex(j, 2)).Ivec;
  return acc / (4.0 * constants::pi * constants::eps0);
}

}  // namespace dielmode
