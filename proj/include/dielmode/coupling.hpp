#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dielmode/common.hpp"
#include "dielmode/gauss.hpp"
#include "dielmode/greens.hpp"
#include "dielmode/mesh.hpp"
#include "dielmode/modes.hpp"
#include "dielmode/parallel.hpp"

namespace dielmode {

// Longitudinal and transverse modes sampled on the tet mesh: unit volume
// norm, orthonormalized inside each degenerate multiplet, with per-tet
// averages for the pair quadratures and boundary traces for the surface
// kernel. Mode order: all longitudinal modes first, then transverse.
struct ModeBasis {
  const VolumeMesh* mesh = nullptr;
  const LoopBasis* loops = nullptr;

  int n_par = 0, n_perp = 0;
  std::vector<double> kappa_par;   // descending
  std::vector<double> kappa_perp;  // ascending
  std::vector<Multiplet> par_multiplets, perp_multiplets;

  MatrixXd charge;      // surface coefficients of the normalized longitudinal modes
  MatrixXd loop_coeff;  // transverse coefficients on the loop basis

  int nq = 4;                   // Gauss points per tet for sampled fields
  std::vector<Vec3> gauss_pts;  // nq * ntet
  std::vector<double> gauss_w;  // nq, sums to 1
  // sampled values, layout [point * (3Q) + c*Q + i] for contiguous mode access
  std::vector<double> val;
  std::vector<double> avg;  // same layout over tets (exact per-tet averages)
  MatrixXd trace;           // ntri x Q boundary normal components (perp cols zero)

  double field_gram_residual = 0;  // volume-quadrature orthonormality defect

  int n_modes() const { return n_par + n_perp; }
  double kappa(int m) const { return m < n_par ? kappa_par[m] : kappa_perp[m - n_par]; }
  bool is_par(int m) const { return m < n_par; }
  std::string mode_name(int m) const {
    return m < n_par ? "par" + std::to_string(m + 1) : "perp" + std::to_string(m - n_par + 1);
  }

  const double* val_at(std::size_t point) const { return val.data() + point * 3 * n_modes(); }
  const double* avg_at(std::size_t tet) const { return avg.data() + tet * 3 * n_modes(); }

  Vec3 value(std::size_t point, int m) const {
    const double* p = val_at(point);
    const int Q = n_modes();
    return Vec3(p[m], p[Q + m], p[2 * Q + m]);
  }
};

namespace detail {

inline MatrixXd inv_sqrt_spd(const MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
  if (es.info() != Eigen::Success) throw numeric_error("orthonormalization failed");
  VectorXd d = es.eigenvalues();
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] <= 0) throw numeric_error("mode Gram not positive definite");
    d[i] = 1.0 / std::sqrt(d[i]);
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

inline ModeBasis build_mode_basis(const VolumeMesh& mesh, const LoopBasis& loops,
                                  const LongitudinalSpectrum& par, const TransverseSpectrum& perp,
                                  int nq = 4) {
  if (nq != 1 && nq != 4) throw config_error("build_mode_basis: nq must be 1 or 4");
  ModeBasis mb;
  mb.mesh = &mesh;
  mb.loops = &loops;
  mb.n_par = static_cast<int>(par.kappa.size());
  mb.n_perp = static_cast<int>(perp.kappa.size());
  mb.kappa_par = par.kappa;
  mb.kappa_perp = perp.kappa;
  mb.par_multiplets = par.multiplets;
  mb.perp_multiplets = perp.multiplets;
  mb.nq = nq;
  mb.loop_coeff = perp.coeff;

  const int nt = mesh.n_tets();
  const int Q = mb.n_modes();

  mb.gauss_pts.resize(static_cast<std::size_t>(nq) * nt);
  for (int t = 0; t < nt; ++t) {
    if (nq == 1) {
      mb.gauss_pts[t] = mesh.tet_centroid(t);
    } else {
      const Vec3 v0 = mesh.vertex(t, 0), v1 = mesh.vertex(t, 1), v2 = mesh.vertex(t, 2),
                 v3 = mesh.vertex(t, 3);
      int q = 0;
      for (const auto& g : tet_rule_4())
        mb.gauss_pts[static_cast<std::size_t>(4) * t + q++] =
            g.l1 * v0 + g.l2 * v1 + g.l3 * v2 + g.l4 * v3;
    }
  }
  mb.gauss_w.assign(nq, 1.0 / nq);

  const std::size_t npts = static_cast<std::size_t>(nq) * nt;
  // work in an Eigen matrix first (column per mode), pack at the end
  MatrixXd vals[3];
  for (int c = 0; c < 3; ++c) vals[c].setZero(npts, Q);

  if (mb.n_par > 0) {
    std::vector<Vec3> raw(npts * mb.n_par);
    eval_longitudinal_raw(mesh.boundary, par.charge, mb.gauss_pts.data(),
                          static_cast<int>(npts), raw.data());
    for (std::size_t p = 0; p < npts; ++p)
      for (int m = 0; m < mb.n_par; ++m)
        for (int c = 0; c < 3; ++c) vals[c](p, m) = raw[p * mb.n_par + m][c];
  }
  for (int m = 0; m < mb.n_perp; ++m) {
    const std::vector<Vec3> v = transverse_mode_on_tets(mesh, loops, perp.coeff.col(m));
    for (int t = 0; t < nt; ++t)
      for (int q = 0; q < nq; ++q)
        for (int c = 0; c < 3; ++c) vals[c](static_cast<std::size_t>(nq) * t + q, mb.n_par + m) = v[t][c];
  }

  VectorXd wvol(npts);
  for (int t = 0; t < nt; ++t)
    for (int q = 0; q < nq; ++q) wvol[static_cast<std::size_t>(nq) * t + q] = mb.gauss_w[q] * mesh.volume[t];
  auto gram = [&](int i, int j) {
    double g = 0;
    for (int c = 0; c < 3; ++c) g += vals[c].col(i).cwiseProduct(vals[c].col(j)).dot(wvol);
    return g;
  };

  // Loewdin inside each longitudinal multiplet: unit volume norm and exact
  // in-multiplet orthogonality of the evaluated fields. Transverse modes are
  // already exactly orthonormal through the loop overlap matrix.
  mb.charge = par.charge;
  for (const auto& g : par.multiplets) {
    MatrixXd G(g.count, g.count);
    for (int i = 0; i < g.count; ++i)
      for (int j = 0; j < g.count; ++j) G(i, j) = gram(g.first + i, g.first + j);
    const MatrixXd T = detail::inv_sqrt_spd(G);
    for (int c = 0; c < 3; ++c)
      vals[c].middleCols(g.first, g.count) = (vals[c].middleCols(g.first, g.count) * T).eval();
    mb.charge.middleCols(g.first, g.count) = (mb.charge.middleCols(g.first, g.count) * T).eval();
  }

  double resid = 0;
  for (int i = 0; i < Q; ++i)
    for (int j = 0; j < Q; ++j) resid = std::max(resid, std::abs(gram(i, j) - (i == j ? 1 : 0)));
  mb.field_gram_residual = resid;

  // pack values and averages
  mb.val.assign(npts * 3 * Q, 0.0);
  for (std::size_t p = 0; p < npts; ++p)
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < Q; ++i) mb.val[p * 3 * Q + c * Q + i] = vals[c](p, i);
  mb.avg.assign(static_cast<std::size_t>(nt) * 3 * Q, 0.0);
  for (int t = 0; t < nt; ++t)
    for (int q = 0; q < nq; ++q)
      for (int c = 0; c < 3; ++c)
        for (int i = 0; i < Q; ++i)
          mb.avg[(static_cast<std::size_t>(t) * 3 + c) * Q + i] +=
              mb.gauss_w[q] * vals[c](static_cast<std::size_t>(nq) * t + q, i);

  const SurfaceMesh& surf = mesh.boundary;
  mb.trace.setZero(surf.n_triangles(), Q);
  for (int m = 0; m < mb.n_par; ++m)
    for (int j = 0; j < surf.n_triangles(); ++j)
      mb.trace(j, m) = mb.charge(j, m) / (surf.area[j] * par.kappa[m]);
  return mb;
}

// ---------------------------------------------------------------------------
// Radiation coupling blocks
// ---------------------------------------------------------------------------

// S blocks at one Laplace point. The perp-perp block stores only the regular
// remainder deltaS; the quasistatic diagonal a^2 s / (c0^2 kappa_perp) is
// closed form and added where the system matrix is assembled.
struct CouplingMatrix {
  complexd s;
  double gamma = 0;  // |s| a / c0
  int n_par = 0, n_perp = 0;
  MatrixXcd S;  // Q x Q
};

struct SmallSizeConstants {
  MatrixXd sigma_par_par;
  MatrixXd sigma_par_perp;
  MatrixXd sigma_perp_perp;
  VectorXd inv_kappa_perp;
};

class CouplingAssembler {
 public:
  CouplingAssembler(const ModeBasis& basis, double c0 = constants::c0, int dyn_nq = 1)
      : basis_(&basis), c0_(c0), dyn_nq_(dyn_nq) {
    if (dyn_nq != 1 && dyn_nq != basis.nq)
      throw config_error("CouplingAssembler: dyn_nq must be 1 or the basis sampling order");
    assemble_static();
  }

  const ModeBasis& basis() const { return *basis_; }
  double c0() const { return c0_; }
  int dyn_nq() const { return dyn_nq_; }

  // int int U . U' / (4 pi |r-r'|); inner integral exact on touching pairs
  const MatrixXd& static_volume() const { return static_vol_; }
  // int int (U.n) |r-r'| (U'.n') / (8 pi) over the boundary
  const MatrixXd& static_surface() const { return static_surf_; }

  CouplingMatrix evaluate(complexd s) const {
    const ModeBasis& mb = *basis_;
    const int Q = mb.n_modes();
    CouplingMatrix out;
    out.s = s;
    out.gamma = std::abs(s) * mb.mesh->a / c0_;
    out.n_par = mb.n_par;
    out.n_perp = mb.n_perp;
    out.S = dynamic_term(s);
    const complexd pref = s / (c0_ * c0_);
    for (int i = 0; i < Q; ++i)
      for (int j = 0; j < Q; ++j) {
        complexd stat(0, 0);
        if (mb.is_par(i) && mb.is_par(j))
          stat = static_vol_(i, j) + static_surf_(i, j);
        else if (mb.is_par(i) != mb.is_par(j))
          stat = static_vol_(i, j);
        out.S(i, j) = pref * (out.S(i, j) + stat);
      }
    return out;
  }

  // Shape-only small-size limits: s S_par_par -> gamma^2 Sigma_par_par, etc.
  SmallSizeConstants small_size() const {
    const ModeBasis& mb = *basis_;
    const double a = mb.mesh->a;
    SmallSizeConstants out;
    out.sigma_par_par = (static_vol_.topLeftCorner(mb.n_par, mb.n_par) +
                         static_surf_.topLeftCorner(mb.n_par, mb.n_par)) /
                        (a * a);
    out.sigma_par_perp = static_vol_.topRightCorner(mb.n_par, mb.n_perp) / (a * a);
    out.sigma_perp_perp = abs_kernel_perp() / (8.0 * constants::pi * a * a * a * a);
    out.inv_kappa_perp.resize(mb.n_perp);
    for (int m = 0; m < mb.n_perp; ++m) out.inv_kappa_perp[m] = 1.0 / mb.kappa_perp[m];
    return out;
  }

 private:
  // A_{ij} accumulated over ordered pairs (t < u) equals the transposed
  // contribution of (u, t), so every kernel below assembles the strict upper
  // part plus the diagonal part and closes with A + A^T + diag.
  void assemble_static() {
    const ModeBasis& mb = *basis_;
    const VolumeMesh& mesh = *mb.mesh;
    const int Q = mb.n_modes();
    const int nt = mesh.n_tets();

    const detail::TetPairInvR pair(mesh);
    const std::size_t chunk = 4;
    const std::size_t nchunks = (static_cast<std::size_t>(nt) + chunk - 1) / chunk;
    std::vector<MatrixXd> upper(nchunks, MatrixXd::Zero(Q, Q));
    std::vector<MatrixXd> diag(nchunks, MatrixXd::Zero(Q, Q));

    parallel_chunks(static_cast<std::size_t>(nt), chunk,
                    [&](std::size_t ci, std::size_t t0, std::size_t t1) {
      for (std::size_t t = t0; t < t1; ++t) {
        const double* at = mb.avg_at(t);
        for (int u = static_cast<int>(t); u < nt; ++u) {
          const double K = pair.eval(static_cast<int>(t), u) / (4.0 * constants::pi);
          const double* au = mb.avg_at(u);
          MatrixXd& acc = (u == static_cast<int>(t)) ? diag[ci] : upper[ci];
          for (int i = 0; i < Q; ++i)
            for (int j = 0; j < Q; ++j)
              acc(i, j) += K * (at[i] * au[j] + at[Q + i] * au[Q + j] +
                                at[2 * Q + i] * au[2 * Q + j]);
        }
      }
    });
    static_vol_.setZero(Q, Q);
    for (std::size_t c = 0; c < nchunks; ++c)
      static_vol_ += upper[c] + upper[c].transpose() + diag[c];

    // surface term over panel pairs, 3-point Gauss each side (bounded kernel)
    const SurfaceMesh& surf = mesh.boundary;
    const int ntri = surf.n_triangles();
    static_surf_.setZero(Q, Q);
    if (mb.n_par > 0) {
      MatrixXd up = MatrixXd::Zero(mb.n_par, mb.n_par);
      MatrixXd dg = MatrixXd::Zero(mb.n_par, mb.n_par);
      std::vector<Vec3> qp(static_cast<std::size_t>(3) * ntri);
      for (int t = 0; t < ntri; ++t) {
        int k = 0;
        for (const auto& g : tri_rule_3())
          qp[3 * t + k++] =
              g.l1 * surf.vertex(t, 0) + g.l2 * surf.vertex(t, 1) + g.l3 * surf.vertex(t, 2);
      }
      for (int t = 0; t < ntri; ++t)
        for (int u = t; u < ntri; ++u) {
          double geom = 0;
          for (int qa = 0; qa < 3; ++qa)
            for (int qb = 0; qb < 3; ++qb)
              geom += (qp[3 * t + qa] - qp[3 * u + qb]).norm();
          geom *= surf.area[t] * surf.area[u] / (9.0 * 8.0 * constants::pi);
          MatrixXd& acc = (u == t) ? dg : up;
          for (int i = 0; i < mb.n_par; ++i)
            for (int j = 0; j < mb.n_par; ++j)
              acc(i, j) += mb.trace(t, i) * geom * mb.trace(u, j);
        }
      static_surf_.topLeftCorner(mb.n_par, mb.n_par) = up + up.transpose() + dg;
    }
  }

  // int int U_perp . U'_perp |r - r'| over tet pairs (for Sigma_perp_perp)
  MatrixXd abs_kernel_perp() const {
    const ModeBasis& mb = *basis_;
    const VolumeMesh& mesh = *mb.mesh;
    const int nt = mesh.n_tets();
    const int Q = mb.n_modes();
    MatrixXd up = MatrixXd::Zero(mb.n_perp, mb.n_perp);
    MatrixXd dg = MatrixXd::Zero(mb.n_perp, mb.n_perp);
    std::vector<Vec3> g4(static_cast<std::size_t>(4) * nt);
    std::vector<double> diam(nt);
    for (int t = 0; t < nt; ++t) {
      int q = 0;
      for (const auto& g : tet_rule_4())
        g4[4 * t + q++] = g.l1 * mesh.vertex(t, 0) + g.l2 * mesh.vertex(t, 1) +
                          g.l3 * mesh.vertex(t, 2) + g.l4 * mesh.vertex(t, 3);
      diam[t] = 2.0 * std::cbrt(mesh.volume[t]);
    }
    for (int t = 0; t < nt; ++t) {
      const double* at = mb.avg_at(t);
      for (int u = t; u < nt; ++u) {
        const double d = (mesh.tet_centroid(t) - mesh.tet_centroid(u)).norm();
        double geom = 0;
        if (d < 3.0 * (diam[t] + diam[u])) {
          for (int qa = 0; qa < 4; ++qa)
            for (int qb = 0; qb < 4; ++qb) geom += (g4[4 * t + qa] - g4[4 * u + qb]).norm();
          geom /= 16.0;
        } else {
          geom = d;
        }
        geom *= mesh.volume[t] * mesh.volume[u];
        const double* au = mb.avg_at(u);
        MatrixXd& acc = (u == t) ? dg : up;
        for (int i = 0; i < mb.n_perp; ++i)
          for (int j = 0; j < mb.n_perp; ++j) {
            const int pi = mb.n_par + i, pj = mb.n_par + j;
            acc(i, j) += geom * (at[pi] * au[pj] + at[Q + pi] * au[Q + pj] +
                                 at[2 * Q + pi] * au[2 * Q + pj]);
          }
      }
    }
    return up + up.transpose() + dg;
  }

  // int int U G_d(r - r'; s) U' with the configured per-tet rule
  MatrixXcd dynamic_term(complexd s) const {
    const ModeBasis& mb = *basis_;
    const VolumeMesh& mesh = *mb.mesh;
    const int Q = mb.n_modes();
    const int nt = mesh.n_tets();
    const int nq = dyn_nq_;

    const double* values = (nq == 1) ? mb.avg.data() : mb.val.data();
    std::vector<Vec3> cpts;
    const Vec3* pts;
    if (nq == 1) {
      cpts.resize(nt);
      for (int t = 0; t < nt; ++t) cpts[t] = mesh.tet_centroid(t);
      pts = cpts.data();
    } else {
      pts = mb.gauss_pts.data();
    }
    const double wq = 1.0 / (nq * nq);

    const std::size_t chunk = 4;
    const std::size_t nchunks = (static_cast<std::size_t>(nt) + chunk - 1) / chunk;
    std::vector<MatrixXcd> upper(nchunks, MatrixXcd::Zero(Q, Q));
    std::vector<MatrixXcd> diag(nchunks, MatrixXcd::Zero(Q, Q));

    parallel_chunks(static_cast<std::size_t>(nt), chunk,
                    [&](std::size_t ci, std::size_t t0, std::size_t t1) {
      std::vector<double> di(Q), dj(Q);
      for (std::size_t t = t0; t < t1; ++t) {
        for (int u = static_cast<int>(t); u < nt; ++u) {
          const double VV = wq * mesh.volume[t] * mesh.volume[u];
          MatrixXcd& acc = (u == static_cast<int>(t)) ? diag[ci] : upper[ci];
          for (int qa = 0; qa < nq; ++qa) {
            const std::size_t pa = static_cast<std::size_t>(nq) * t + qa;
            const double* va = values + pa * 3 * Q;
            for (int qb = 0; qb < nq; ++qb) {
              const std::size_t pb = static_cast<std::size_t>(nq) * u + qb;
              const double* vb = values + pb * 3 * Q;
              const Vec3 d = pts[pa] - pts[pb];
              const double rn = d.norm();
              if (rn < 1e-14 * mesh.a) {
                const complexd lim = -(s / (6.0 * constants::pi * c0_)) * VV;
                for (int i = 0; i < Q; ++i)
                  for (int j = 0; j < Q; ++j)
                    acc(i, j) += lim * (va[i] * vb[j] + va[Q + i] * vb[Q + j] +
                                        va[2 * Q + i] * vb[2 * Q + j]);
                continue;
              }
              const auto [A, B] = green_transverse_dynamic_coeffs(rn, s, c0_);
              const Vec3 e = d / rn;
              const complexd cab = (A + B) * VV;
              const complexd ca3b = (A + 3.0 * B) * VV;
              for (int i = 0; i < Q; ++i) {
                di[i] = va[i] * e[0] + va[Q + i] * e[1] + va[2 * Q + i] * e[2];
                dj[i] = vb[i] * e[0] + vb[Q + i] * e[1] + vb[2 * Q + i] * e[2];
              }
              for (int i = 0; i < Q; ++i)
                for (int j = 0; j < Q; ++j)
                  acc(i, j) += cab * (va[i] * vb[j] + va[Q + i] * vb[Q + j] +
                                      va[2 * Q + i] * vb[2 * Q + j]) -
                               ca3b * (di[i] * dj[j]);
            }
          }
        }
      }
    });
    MatrixXcd D = MatrixXcd::Zero(Q, Q);
    for (std::size_t c = 0; c < nchunks; ++c)
      D += upper[c] + upper[c].transpose() + diag[c];
    return D;
  }

  const ModeBasis* basis_;
  double c0_;
  int dyn_nq_;
  MatrixXd static_vol_;
  MatrixXd static_surf_;
};

}  // namespace dielmode
