#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <lapacke.h>

#include "dielmode/common.hpp"
#include "dielmode/gauss.hpp"
#include "dielmode/mesh.hpp"
#include "dielmode/parallel.hpp"
#include "dielmode/trianalytic.hpp"

namespace dielmode {

struct AssemblyDiagnostics {
  std::vector<std::string> warnings;
};

namespace detail {

// A x = lambda B x with B SPD; returns ascending eigenvalues, eigenvectors
// B-orthonormal in the columns of A.
inline void sygvd(MatrixXd& A, MatrixXd& B, VectorXd& w) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  w.resize(n);
  const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, A.data(), n, B.data(),
                                         n, w.data());
  if (info != 0)
    throw numeric_error("generalized symmetric eigensolver failed (info = " +
                        std::to_string(info) + ")");
}

}  // namespace detail

// Degenerate eigenvalues are grouped into multiplets when the relative gap
// stays below this threshold.
inline constexpr double kDegeneracyGap = 1e-3;

struct Multiplet {
  int first = 0;
  int count = 0;
};

inline std::vector<Multiplet> group_multiplets(const std::vector<double>& vals) {
  std::vector<Multiplet> groups;
  for (int i = 0; i < static_cast<int>(vals.size()); ++i) {
    if (!groups.empty()) {
      const int f = groups.back().first;
      if (std::abs(vals[i] - vals[f]) < kDegeneracyGap * std::abs(vals[f])) {
        groups.back().count++;
        continue;
      }
    }
    groups.push_back({i, 1});
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Electrostatic (longitudinal) surface eigenproblem
// ---------------------------------------------------------------------------

struct ElectrostaticOperators {
  VectorXd R_diag;  // R_jj = 1/A_j
  MatrixXd C;       // C_ij = (1/Ai Aj) int int (r-r') . n(r) / (2 pi |r-r'|^3)
};

// Analytic inner integration over the source triangle, Gauss rule over the
// outer one (3-point, upgraded to 7-point for close pairs). The self term of
// a flat panel vanishes identically.
inline ElectrostaticOperators assemble_electrostatic(const SurfaceMesh& surf,
                                                     AssemblyDiagnostics* diag = nullptr) {
  const int n = surf.n_triangles();
  if (n == 0) throw config_error("assemble_electrostatic: empty surface");
  ElectrostaticOperators ops;
  ops.R_diag.resize(n);
  for (int j = 0; j < n; ++j) ops.R_diag[j] = 1.0 / surf.area[j];

  if (diag) {
    for (int j = 0; j < n; ++j) {
      const Vec3 a = surf.vertex(j, 0), b = surf.vertex(j, 1), c = surf.vertex(j, 2);
      const double lmax =
          std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
      const double perim = (a - b).norm() + (b - c).norm() + (c - a).norm();
      if (lmax * perim / (4.0 * surf.area[j]) > 15.0)
        diag->warnings.push_back("near-degenerate surface triangle " + std::to_string(j));
    }
  }

  std::vector<double> scale(n);
  for (int j = 0; j < n; ++j) {
    const Vec3 a = surf.vertex(j, 0), b = surf.vertex(j, 1), c = surf.vertex(j, 2);
    scale[j] = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  }

  ops.C.setZero(n, n);
  parallel_chunks(static_cast<std::size_t>(n), 16, [&](std::size_t, std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      const Vec3 a = surf.vertex(static_cast<int>(i), 0);
      const Vec3 b = surf.vertex(static_cast<int>(i), 1);
      const Vec3 c = surf.vertex(static_cast<int>(i), 2);
      const Vec3 nhat = surf.normal[i];
      const auto& ti = surf.triangles[i];
      for (int j = 0; j < n; ++j) {
        if (static_cast<int>(i) == j) continue;  // flat-panel self term is zero
        const auto& tj = surf.triangles[j];
        bool adjacent = false;
        for (int u = 0; u < 3 && !adjacent; ++u)
          for (int v = 0; v < 3; ++v)
            if (ti[u] == tj[v]) {
              adjacent = true;
              break;
            }
        const double d = (surf.centroid[i] - surf.centroid[j]).norm();
        const bool close = d < 2.0 * (scale[i] + scale[j]);
        double acc = 0;
        auto kernel = [&](const Vec3& p) {
          return nhat.dot(
              tri_inv_r(p, surf.vertex(j, 0), surf.vertex(j, 1), surf.vertex(j, 2)).Ivec);
        };
        if (adjacent) {
          // the outer integrand varies sharply near the shared edge: one
          // level of panel subdivision with the degree-5 rule per piece
          const Vec3 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
          const Vec3 sub[4][3] = {
              {a, mab, mca}, {mab, b, mbc}, {mca, mbc, c}, {mab, mbc, mca}};
          for (const auto& tri : sub)
            for (const auto& q : tri_rule_7())
              acc += 0.25 * q.w * kernel(q.l1 * tri[0] + q.l2 * tri[1] + q.l3 * tri[2]);
        } else if (close) {
          for (const auto& q : tri_rule_7())
            acc += q.w * kernel(q.l1 * a + q.l2 * b + q.l3 * c);
        } else {
          for (const auto& q : tri_rule_3())
            acc += q.w * kernel(q.l1 * a + q.l2 * b + q.l3 * c);
        }
        ops.C(i, j) = acc / (2.0 * constants::pi * surf.area[j]);
      }
    }
  });
  return ops;
}

struct LongitudinalSpectrum {
  std::vector<double> kappa;  // descending, >= 2 up to discretization
  MatrixXd charge;            // column m: coefficients I_j (sigma = I_j / A_j on triangle j)
  std::vector<Multiplet> multiplets;
  double ortho_residual = 0;  // R-weighted eigenvector orthonormality defect
  const SurfaceMesh* surface = nullptr;
};

// Boundary eigenproblem (R - C) I = (2/kappa) R I restricted to the neutral
// subspace sum_j I_j = 0 (total charge zero). The neutral constraint is
// applied by a Householder deflation rather than dropping an unknown, which
// keeps the reduced pencil symmetric.
inline LongitudinalSpectrum solve_longitudinal(const SurfaceMesh& surf, int count,
                                               AssemblyDiagnostics* diag = nullptr) {
  const int n = surf.n_triangles();
  if (count < 1) throw config_error("solve_longitudinal: count must be >= 1");
  if (count > n - 1)
    throw config_error("solve_longitudinal: requested more modes than the neutral subspace holds");
  const ElectrostaticOperators ops = assemble_electrostatic(surf, diag);

  MatrixXd B = -0.5 * (ops.C + ops.C.transpose());
  B.diagonal() += ops.R_diag;

  // Householder vector mapping e1 <-> (1,...,1)/sqrt(n)
  VectorXd v = VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  v[0] -= 1.0;
  v.normalize();
  auto reflect = [&](MatrixXd& M) {
    const VectorXd Mv = M * v;
    const double vMv = v.dot(Mv);
    M.noalias() -= 2.0 * Mv * v.transpose();
    M.noalias() -= 2.0 * v * Mv.transpose();
    M.noalias() += 4.0 * vMv * v * v.transpose();
  };
  MatrixXd Rfull = MatrixXd::Zero(n, n);
  Rfull.diagonal() = ops.R_diag;
  reflect(B);
  reflect(Rfull);

  MatrixXd Bred = B.bottomRightCorner(n - 1, n - 1);
  MatrixXd Rred = Rfull.bottomRightCorner(n - 1, n - 1);
  VectorXd theta;
  detail::sygvd(Bred, Rred, theta);  // Bred now holds R-orthonormal eigenvectors

  // theta = 2/kappa: keep positive values, ascending theta = descending kappa
  std::vector<int> keep;
  for (int k = 0; k < n - 1; ++k)
    if (theta[k] > 1e-12) keep.push_back(k);
  if (static_cast<int>(keep.size()) < count)
    throw numeric_error("solve_longitudinal: fewer positive eigenvalues than requested");

  LongitudinalSpectrum spec;
  spec.surface = &surf;
  spec.charge.resize(n, count);
  for (int m = 0; m < count; ++m) {
    const int k = keep[m];
    spec.kappa.push_back(2.0 / theta[k]);
    // lift back through the reflector: I = H [0; x]
    VectorXd full = VectorXd::Zero(n);
    full.tail(n - 1) = Bred.col(k);
    full -= 2.0 * v * v.dot(full);
    // deterministic sign: largest-magnitude coefficient positive
    int imax = 0;
    for (int j = 1; j < n; ++j)
      if (std::abs(full[j]) > std::abs(full[imax])) imax = j;
    if (full[imax] < 0) full = -full;
    spec.charge.col(m) = full;
  }
  spec.multiplets = group_multiplets(spec.kappa);

  double resid = 0;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) {
      const double g = spec.charge.col(i).dot(ops.R_diag.asDiagonal() * spec.charge.col(j));
      resid = std::max(resid, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  spec.ortho_residual = resid;
  return spec;
}

// Raw (unnormalized) interior field of a charge layer: grad of the
// single-layer potential, summed exactly per panel. One pass accumulates all
// modes at once.
inline void eval_longitudinal_raw(const SurfaceMesh& surf, const MatrixXd& charge,
                                  const Vec3* points, int npts, Vec3* out /* npts x modes */) {
  const int n = surf.n_triangles();
  const int m = static_cast<int>(charge.cols());
  parallel_chunks(static_cast<std::size_t>(npts), 64, [&](std::size_t, std::size_t p0, std::size_t p1) {
    for (std::size_t p = p0; p < p1; ++p) {
      Vec3* row = out + p * m;
      for (int k = 0; k < m; ++k) row[k].setZero();
      for (int j = 0; j < n; ++j) {
        const Vec3 iv = tri_inv_r(points[p], surf.vertex(j, 0), surf.vertex(j, 1),
                                  surf.vertex(j, 2))
                            .Ivec;
        const double inv_area = 1.0 / (4.0 * constants::pi * surf.area[j]);
        for (int k = 0; k < m; ++k) row[k] -= charge(j, k) * inv_area * iv;
      }
    }
  });
}

// Distance from a point to the boundary, with the local edge length at the
// nearest triangle; used for the evaluation guard band.
inline std::pair<double, double> boundary_distance(const SurfaceMesh& surf, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  int best_t = 0;
  for (int t = 0; t < surf.n_triangles(); ++t) {
    const Vec3 a = surf.vertex(t, 0), b = surf.vertex(t, 1), c = surf.vertex(t, 2);
    // exact point-triangle distance
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    Vec3 q;
    if (d1 <= 0 && d2 <= 0) q = a;
    else {
      const Vec3 bp = p - b;
      const double d3 = ab.dot(bp), d4 = ac.dot(bp);
      if (d3 >= 0 && d4 <= d3) q = b;
      else {
        const Vec3 cp = p - c;
        const double d5 = ab.dot(cp), d6 = ac.dot(cp);
        if (d6 >= 0 && d5 <= d6) q = c;
        else {
          const double vc = d1 * d4 - d3 * d2;
          if (vc <= 0 && d1 >= 0 && d3 <= 0) q = a + ab * (d1 / (d1 - d3));
          else {
            const double vb = d5 * d2 - d1 * d6;
            if (vb <= 0 && d2 >= 0 && d6 <= 0) q = a + ac * (d2 / (d2 - d6));
            else {
              const double va = d3 * d6 - d5 * d4;
              const double w1 = d4 - d3, w2 = d5 - d6;
              if (va <= 0 && w1 >= 0 && w2 >= 0) q = b + (c - b) * (w1 / (w1 + w2));
              else {
                const Vec3 nrm = ab.cross(ac).normalized();
                q = p - nrm.dot(ap) * nrm;
              }
            }
          }
        }
      }
    }
    const double d = (p - q).norm();
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  const Vec3 a = surf.vertex(best_t, 0), b = surf.vertex(best_t, 1), c = surf.vertex(best_t, 2);
  const double mean_edge = ((a - b).norm() + (b - c).norm() + (c - a).norm()) / 3.0;
  return {best, mean_edge};
}

// ---------------------------------------------------------------------------
// Magnetostatic (transverse) volume eigenproblem on the loop basis
// ---------------------------------------------------------------------------

struct MagnetostaticOperators {
  MatrixXd R;  // overlap Gram, exact for piecewise-constant loops
  MatrixXd L;  // 1/(4 pi r) double-volume Gram, inner integral exact on
               // touching pairs
};

namespace detail {

// int_T int_T' dV dV' / |r - r'| for a tet pair; exact inner integral with a
// Gauss outer rule for touching or close pairs, tensor Gauss otherwise.
struct TetPairInvR {
  const VolumeMesh& mesh;
  std::vector<Vec3> gauss4;   // 4 points per tet
  std::vector<double> diam;

  explicit TetPairInvR(const VolumeMesh& m) : mesh(m) {
    gauss4.resize(4 * mesh.n_tets());
    diam.resize(mesh.n_tets());
    for (int t = 0; t < mesh.n_tets(); ++t) {
      const Vec3 v0 = mesh.vertex(t, 0), v1 = mesh.vertex(t, 1), v2 = mesh.vertex(t, 2),
                 v3 = mesh.vertex(t, 3);
      int q = 0;
      for (const auto& g : tet_rule_4())
        gauss4[4 * t + q++] = g.l1 * v0 + g.l2 * v1 + g.l3 * v2 + g.l4 * v3;
      diam[t] = std::max({(v0 - v1).norm(), (v0 - v2).norm(), (v0 - v3).norm(), (v1 - v2).norm(),
                          (v1 - v3).norm(), (v2 - v3).norm()});
    }
  }

  bool touching(int t, int u) const {
    const auto& a = mesh.tets[t];
    const auto& b = mesh.tets[u];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (a[i] == b[j]) return true;
    return false;
  }

  double eval(int t, int u) const {
    const Vec3 u0 = mesh.vertex(u, 0), u1 = mesh.vertex(u, 1), u2 = mesh.vertex(u, 2),
               u3 = mesh.vertex(u, 3);
    const double d = (mesh.tet_centroid(t) - mesh.tet_centroid(u)).norm();
    if (t == u || touching(t, u) || d < 1.5 * (diam[t] + diam[u])) {
      double acc = 0;
      for (int q = 0; q < 4; ++q) acc += 0.25 * tet_inv_r(gauss4[4 * t + q], u0, u1, u2, u3);
      return acc * mesh.volume[t];
    }
    double acc = 0;
    for (int q = 0; q < 4; ++q)
      for (int w = 0; w < 4; ++w)
        acc += 0.25 * 0.25 / (gauss4[4 * t + q] - gauss4[4 * u + w]).norm();
    return acc * mesh.volume[t] * mesh.volume[u];
  }
};

}  // namespace detail

inline MagnetostaticOperators assemble_magnetostatic(const VolumeMesh& mesh,
                                                     const LoopBasis& basis) {
  const int nl = basis.n_loops();
  if (nl == 0) throw config_error("assemble_magnetostatic: empty loop basis");
  MagnetostaticOperators ops;
  ops.R.setZero(nl, nl);
  ops.L.setZero(nl, nl);

  // loops attached to each tet
  std::vector<std::vector<std::pair<int, Vec3>>> tet_loops(mesh.n_tets());
  for (int p = 0; p < nl; ++p)
    for (const auto& piece : basis.loops[p]) tet_loops[piece.tet].push_back({p, piece.c});

  for (int t = 0; t < mesh.n_tets(); ++t)
    for (const auto& [p, cp] : tet_loops[t])
      for (const auto& [q, cq] : tet_loops[t])
        if (q >= p) {
          const double val = cp.dot(cq) * mesh.volume[t];
          ops.R(p, q) += val;
          if (q != p) ops.R(q, p) += val;
        }

  const detail::TetPairInvR pair(mesh);
  const int nt = mesh.n_tets();
  // K(t,u) enters symmetrically; evaluate each unordered pair once
  for (int t = 0; t < nt; ++t) {
    if (tet_loops[t].empty()) continue;
    for (int u = t; u < nt; ++u) {
      if (tet_loops[u].empty()) continue;
      const double K = pair.eval(t, u) / (4.0 * constants::pi);
      for (const auto& [p, cp] : tet_loops[t])
        for (const auto& [q, cq] : tet_loops[u]) {
          const double val = cp.dot(cq) * K;
          ops.L(p, q) += val;
          if (t != u) ops.L(q, p) += val;
        }
    }
  }
  // exact symmetry regardless of accumulation order
  ops.L = 0.5 * (ops.L + ops.L.transpose()).eval();
  return ops;
}

struct TransverseSpectrum {
  std::vector<double> kappa;  // ascending, > 0
  MatrixXd coeff;             // loop coefficients, unit V-norm columns
  std::vector<Multiplet> multiplets;
  double ortho_residual = 0;
  const LoopBasis* basis = nullptr;
};

// (kappa/a^2) L I = R I; returns the `count` smallest kappa with modes
// orthonormal in the volume scalar product.
inline TransverseSpectrum solve_transverse(const VolumeMesh& mesh, const LoopBasis& basis,
                                           int count) {
  const int nl = basis.n_loops();
  if (count < 1 || count > nl)
    throw config_error("solve_transverse: invalid mode count " + std::to_string(count));
  MagnetostaticOperators ops = assemble_magnetostatic(mesh, basis);
  MatrixXd A = ops.R;
  MatrixXd B = ops.L;
  VectorXd lambda;
  detail::sygvd(A, B, lambda);  // A holds L-orthonormal eigenvectors

  TransverseSpectrum spec;
  spec.basis = &basis;
  spec.coeff.resize(nl, count);
  for (int m = 0; m < count; ++m) {
    if (lambda[m] <= 0)
      throw numeric_error("solve_transverse: nonpositive eigenvalue encountered");
    spec.kappa.push_back(lambda[m] * mesh.a * mesh.a);
    VectorXd x = A.col(m) / std::sqrt(lambda[m]);  // x^T R x = 1
    int imax = 0;
    for (int j = 1; j < nl; ++j)
      if (std::abs(x[j]) > std::abs(x[imax])) imax = j;
    if (x[imax] < 0) x = -x;
    spec.coeff.col(m) = x;
  }
  spec.multiplets = group_multiplets(spec.kappa);

  double resid = 0;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) {
      const double g = spec.coeff.col(i).dot(ops.R * spec.coeff.col(j));
      resid = std::max(resid, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  spec.ortho_residual = resid;
  return spec;
}

// Piecewise-constant value of transverse mode m on each tet.
inline std::vector<Vec3> transverse_mode_on_tets(const VolumeMesh& mesh, const LoopBasis& basis,
                                                 const VectorXd& coeff) {
  std::vector<Vec3> val(mesh.n_tets(), Vec3::Zero());
  for (int p = 0; p < basis.n_loops(); ++p)
    for (const auto& piece : basis.loops[p]) val[piece.tet] += coeff[p] * piece.c;
  return val;
}

}  // namespace dielmode
