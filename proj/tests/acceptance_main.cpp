// Acceptance battery: one pass/fail line per criterion, nonzero exit on any
// failure. Quantitative thresholds are pinned in code next to each check.

#include <chrono>
#include <cstdio>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "dielmode/analytic.hpp"
#include "dielmode/coupling.hpp"
#include "dielmode/greens.hpp"
#include "dielmode/material.hpp"
#include "dielmode/meshgen.hpp"
#include "dielmode/modes.hpp"
#include "dielmode/quantum.hpp"
#include "dielmode/response.hpp"

using namespace dielmode;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("criterion %2d %s  %s  [%s]\n", id, pass ? "PASS" : "FAIL", what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) failures++;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Pipeline {
  VolumeMesh mesh;
  LoopBasis loops;
  LongitudinalSpectrum par;
  TransverseSpectrum perp;
  ModeBasis basis;
  std::unique_ptr<CouplingAssembler> coupling;

  Pipeline(VolumeMesh&& m, int npar, int nperp, double c0, int nq = 4, int dyn_nq = 1)
      : mesh(std::move(m)), loops(build_loop_basis(mesh)) {
    par = solve_longitudinal(mesh.boundary, npar);
    if (nperp > 0) perp = solve_transverse(mesh, loops, nperp);
    basis = build_mode_basis(mesh, loops, par, perp, nq);
    coupling = std::make_unique<CouplingAssembler>(basis, c0, dyn_nq);
  }
};

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// half-height width of the principal peak of |H(omega)|, linear interpolation
double peak_fwhm(const std::vector<double>& omega, const std::vector<double>& mag, int* kpeak) {
  int km = 0;
  for (std::size_t k = 1; k < mag.size(); ++k)
    if (mag[k] > mag[km]) km = static_cast<int>(k);
  if (kpeak) *kpeak = km;
  const double half = 0.5 * mag[km];
  double lo = omega.front(), hi = omega.back();
  for (int k = km; k > 0; --k)
    if (mag[k - 1] < half) {
      const double f = (half - mag[k - 1]) / (mag[k] - mag[k - 1]);
      lo = omega[k - 1] + f * (omega[k] - omega[k - 1]);
      break;
    }
  for (std::size_t k = km; k + 1 < mag.size(); ++k)
    if (mag[k + 1] < half) {
      const double f = (mag[k] - half) / (mag[k] - mag[k + 1]);
      hi = omega[k] + f * (omega[k + 1] - omega[k]);
      break;
    }
  return hi - lo;
}

// exponential decay rate of the envelope of h(t), fitted on local maxima
double envelope_decay_rate(const std::vector<double>& t, const std::vector<double>& h) {
  std::vector<double> pt, pv;
  double hmax = 0;
  for (double v : h) hmax = std::max(hmax, std::abs(v));
  for (std::size_t j = 1; j + 1 < h.size(); ++j) {
    if (t[j] <= 0) continue;
    const double a = std::abs(h[j]);
    if (a > std::abs(h[j - 1]) && a >= std::abs(h[j + 1]) && a > 1e-4 * hmax) {
      pt.push_back(t[j]);
      pv.push_back(std::log(a));
    }
  }
  if (pt.size() < 4) return 0.0;
  // use the first two thirds of the record to stay clear of wrap effects
  std::vector<double> xt, xv;
  const double tcut = t.back() * 2.0 / 3.0;
  for (std::size_t i = 0; i < pt.size(); ++i)
    if (pt[i] < tcut) {
      xt.push_back(pt[i]);
      xv.push_back(pv[i]);
    }
  return -lsq_slope(xt, xv);
}

}  // namespace

// --- criterion 1: sphere electrostatic eigenvalues -------------------------
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const VolumeMesh mesh = meshgen::icosphere_cone_ball(10, 1.0);  // 2000 panels
  const LongitudinalSpectrum spec = solve_longitudinal(mesh.boundary, 17);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool pass = seconds <= 120.0;
  std::string detail = "t=" + fmt(seconds) + "s";
  const int want_deg[3] = {3, 5, 7};
  for (int l = 1; l <= 3; ++l) {
    const double expect = sphere_kappa_longitudinal(l);
    const bool have = static_cast<int>(spec.multiplets.size()) >= l;
    const double got = have ? spec.kappa[spec.multiplets[l - 1].first] : 0.0;
    const int deg = have ? spec.multiplets[l - 1].count : 0;
    pass = pass && have && std::abs(got - expect) <= 0.02 * expect && deg == want_deg[l - 1];
    detail += " l" + std::to_string(l) + "=" + fmt(got) + "(x" + std::to_string(deg) + ")";
  }
  report(1, pass, "sphere electrostatic eigenvalues (2l+1)/l, degeneracies 3/5/7, <= 2 min",
         detail);
}

// prefix truncation that respects multiplet boundaries
LongitudinalSpectrum truncate_par(const LongitudinalSpectrum& in, int count) {
  LongitudinalSpectrum out = in;
  out.kappa.resize(count);
  out.charge = in.charge.leftCols(count).eval();
  out.multiplets = group_multiplets(out.kappa);
  return out;
}

TransverseSpectrum truncate_perp(const TransverseSpectrum& in, int count) {
  TransverseSpectrum out = in;
  out.kappa.resize(count);
  out.coeff = in.coeff.leftCols(count).eval();
  out.multiplets = group_multiplets(out.kappa);
  return out;
}

// --- criteria 2, 3, 7, 9, 10 share the cube-ball sphere pipeline -----------
void criteria_sphere_pipeline() {
  const double c0 = 1.0;  // scaled units: a = 1, omega in units of c0/a
  // 12 transverse modes reach past the magnetic quadrupole block to the
  // toroidal-dipole triple, the electric dipole's one allowed partner
  Pipeline p(meshgen::cube_ball(4, 1.0), 8, 12, c0);

  // criterion 2: orthonormality
  {
    const double field_resid = p.basis.field_gram_residual;
    const double vec_resid = std::max(p.par.ortho_residual, p.perp.ortho_residual);
    report(2, field_resid < 1e-2 && vec_resid < 1e-6,
           "mode orthonormality: fields < 1e-2, eigenvectors < 1e-6",
           "field=" + fmt(field_resid) + " vec=" + fmt(vec_resid));
  }

  // criterion 3: small-size scaling laws and Sigma consistency
  {
    const std::vector<double> gammas = {1e-3, 3.1623e-3, 1e-2, 3.1623e-2, 1e-1};
    std::vector<double> lg, pp, pt, tt;
    for (double g : gammas) {
      const CouplingMatrix S = p.coupling->evaluate(complexd(0.0, g * c0 / p.mesh.a));
      lg.push_back(std::log(g));
      pp.push_back(std::log((S.s * S.S.topLeftCorner(p.basis.n_par, p.basis.n_par)).norm()));
      pt.push_back(std::log((S.s * S.S.topRightCorner(p.basis.n_par, p.basis.n_perp)).norm()));
      tt.push_back(std::log((S.s * S.S.bottomRightCorner(p.basis.n_perp, p.basis.n_perp)).norm()));
    }
    const double s_pp = lsq_slope(lg, pp);
    const double s_pt = lsq_slope(lg, pt);
    const double s_tt = lsq_slope(lg, tt);

    const SmallSizeConstants sig = p.coupling->small_size();
    const CouplingMatrix S = p.coupling->evaluate(complexd(0.0, 1e-2 * c0 / p.mesh.a));
    double worst = 0;
    for (int m = 0; m < p.basis.n_par; ++m) {
      const double got = std::abs(S.s * S.S(m, m)) / 1e-4;
      worst = std::max(worst, std::abs(got - sig.sigma_par_par(m, m)) / sig.sigma_par_par(m, m));
    }
    const bool pass = std::abs(s_pp - 2.0) <= 0.1 && std::abs(s_pt - 2.0) <= 0.1 &&
                      std::abs(s_tt - 4.0) <= 0.2 && worst <= 0.005;
    report(3, pass, "small-size scaling: slopes 2/2/4, Sigma consistency 0.5% at gamma=1e-2",
           "slopes=" + fmt(s_pp) + "/" + fmt(s_pt) + "/" + fmt(s_tt) + " dSigma=" + fmt(worst));
  }

  // criterion 7 (sphere half): reciprocity across a beta = pi sweep, on the
  // dipole triples (full blocks would only repeat the same check at Q = 20)
  double sphere_recip = 0;
  {
    const LongitudinalSpectrum par3 = truncate_par(p.par, 3);
    const TransverseSpectrum perp3 = truncate_perp(p.perp, 3);
    const ModeBasis small = build_mode_basis(p.mesh, p.loops, par3, perp3, 4);
    const CouplingAssembler coup(small, c0, 1);
    const DrudeLorentz mat{constants::pi * c0 / p.mesh.a, 0.0, 0.0};  // beta = pi
    ModeSelection sel = ModeSelection::all(small);
    SweepConfig cfg;
    cfg.n_freq = 1024;
    cfg.omega_max = 3.0 * mat.omega_p;
    cfg.coupling_nodes = 33;
    const double sigma_c = cfg.contour_alpha * cfg.omega_max / cfg.n_freq;
    const TransferSample ts = frequency_sweep(coup, mat, sel, cfg, sigma_c, c0);
    for (const auto& H : ts.H)
      sphere_recip = std::max(
          sphere_recip, (H - H.transpose()).cwiseAbs().maxCoeff() / H.cwiseAbs().maxCoeff());
  }

  // criterion 9: selection rules at beta = pi through mode parity
  {
    // antipodal tet map (the cube-ball is exactly inversion symmetric)
    const VolumeMesh& mesh = p.mesh;
    std::map<std::array<long long, 3>, int> cmap;
    auto key_of = [](const Vec3& v) {
      const double q = 1e12;
      return std::array<long long, 3>{std::llround(v[0] * q), std::llround(v[1] * q),
                                      std::llround(v[2] * q)};
    };
    for (int t = 0; t < mesh.n_tets(); ++t) cmap[key_of(mesh.tet_centroid(t))] = t;
    std::vector<int> antipode(mesh.n_tets());
    for (int t = 0; t < mesh.n_tets(); ++t) {
      auto it = cmap.find(key_of(Vec3(-mesh.tet_centroid(t))));
      antipode[t] = it == cmap.end() ? -1 : it->second;
    }
    const int Q = p.basis.n_modes();
    auto parity = [&](int m) {
      double num = 0, den = 0;
      for (int t = 0; t < mesh.n_tets(); ++t) {
        const double* a = p.basis.avg_at(t);
        const double* b = p.basis.avg_at(antipode[t]);
        const Vec3 ut(a[m], a[Q + m], a[2 * Q + m]);
        const Vec3 us(b[m], b[Q + m], b[2 * Q + m]);
        num += -mesh.volume[t] * ut.dot(us);  // <U, PU>, (PU)(r) = -U(-r)
        den += mesh.volume[t] * ut.squaredNorm();
      }
      return num / den;
    };

    const CouplingMatrix S = p.coupling->evaluate(complexd(0.0, constants::pi * c0 / p.mesh.a));
    const Multiplet dipole = p.basis.par_multiplets[0];  // electric dipole triple
    double allowed = 0, forbidden = 0;
    std::string tags;
    for (const auto& g : p.basis.perp_multiplets) {
      double blk = 0;
      double par_avg = 0;
      for (int c = 0; c < g.count; ++c) {
        par_avg += parity(p.basis.n_par + g.first + c) / g.count;
        for (int rM = 0; rM < dipole.count; ++rM)
          blk += std::norm(S.S(dipole.first + rM, p.basis.n_par + g.first + c));
      }
      blk = std::sqrt(blk);
      if (par_avg > 0.5)
        forbidden = std::max(forbidden, blk);  // even modes: parity-forbidden
      else
        allowed = std::max(allowed, blk);
      tags += (par_avg > 0.5 ? "e" : "o");
    }
    const double ratio = forbidden / allowed;
    report(9, ratio < 1e-3,
           "selection rules: parity-forbidden |S| < 1e-3 of the allowed pair at beta = pi",
           "ratio=" + fmt(ratio) + " multiplets=" + tags);
  }

  // criterion 10: static exterior field against the Coulomb sum (finer
  // volume mesh; only the dipole modes are needed)
  {
    VolumeMesh mesh10 = meshgen::cube_ball(5, 1.0);
    LoopBasis loops10;  // no transverse modes in this run
    const LongitudinalSpectrum par10 = solve_longitudinal(mesh10.boundary, 3);
    const TransverseSpectrum perp10;
    const ModeBasis basis10 = build_mode_basis(mesh10, loops10, par10, perp10, 4);
    const int Q = basis10.n_modes();
    TransferSample ts;
    ts.sigma_c = 0.0;
    ts.omega = {1e-8 * c0 / mesh10.a};
    ts.omega_max = ts.omega[0];
    ts.H.assign(1, MatrixXcd::Identity(Q, Q));
    ts.H_dc = ts.H[0];
    ModeSelection sel = ModeSelection::all(basis10);
    MatrixXcd coords = MatrixXcd::Zero(1, Q);
    coords(0, 0) = 1.0;  // pure electric-dipole polarization
    const ModePointEvaluator eval(basis10);
    std::mt19937 gen(991);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts;
    while (pts.size() < 20) {
      Vec3 v(u(gen), u(gen), u(gen));
      if (v.norm() < 0.3) continue;
      pts.push_back(v.normalized() * (2.0 + 1.5 * std::abs(u(gen))));
    }
    const FieldSample fs = efield_outside(coords, ts, sel, eval, pts, c0);
    double worst = 0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Eigen::Vector3d oracle = coulomb_field_of_mode(basis10, 0, pts[q]);
      const Eigen::Vector3d got = fs.values[0][q].real();
      worst = std::max(worst, (got - oracle).norm() / oracle.norm());
    }
    report(10, worst < 0.02,
           "static exterior field matches the surface-charge Coulomb sum within 2%",
           "worst=" + fmt(worst) + " at 20 points");
  }

  // criterion 7 (disk half) and criterion 8 run on the rounded disk
  {
    Pipeline d(meshgen::rounded_disk(4, 1.0), 4, 6, c0);
    const double beta = constants::pi;
    DrudeLorentz metal{beta * c0 / d.mesh.a, 0.0, 0.0};
    ModeSelection sel = ModeSelection::all(d.basis);
    SweepConfig cfg;
    cfg.n_freq = 2048;
    cfg.omega_max = 2.5 * metal.omega_p;
    cfg.coupling_nodes = 33;
    const double sigma_c = cfg.contour_alpha * cfg.omega_max / cfg.n_freq;

    double disk_recip = 0;
    auto run = [&](const DrudeLorentz& mat, double* fwhm, double* rate) {
      const TransferSample ts = frequency_sweep(*d.coupling, mat, sel, cfg, sigma_c, c0);
      for (const auto& H : ts.H)
        disk_recip = std::max(
            disk_recip, (H - H.transpose()).cwiseAbs().maxCoeff() / H.cwiseAbs().maxCoeff());
      std::vector<double> mag;
      for (const auto& H : ts.H) mag.push_back(std::abs(H(0, 0)));
      int kpeak = 0;
      *fwhm = peak_fwhm(ts.omega, mag, &kpeak);
      const ImpulseResponse ir = impulse_from_transfer(ts);
      std::vector<double> h11;
      for (const auto& h : ir.h) h11.push_back(h(0, 0));
      *rate = envelope_decay_rate(ir.t, h11);
    };
    double fwhm0 = 0, rate0 = 0, fwhm1 = 0, rate1 = 0;
    run(metal, &fwhm0, &rate0);
    DrudeLorentz lossy = metal;
    lossy.gamma = 0.1 * metal.omega_p;
    run(lossy, &fwhm1, &rate1);

    report(7, sphere_recip < 1e-6 && disk_recip < 1e-6,
           "reciprocity of H at every sweep frequency (sphere and disk)",
           "sphere=" + fmt(sphere_recip) + " disk=" + fmt(disk_recip));
    report(8, fwhm1 > fwhm0 && rate1 > rate0,
           "raising Gamma to 0.1 wp broadens the peak and speeds the decay",
           "fwhm " + fmt(fwhm0) + "->" + fmt(fwhm1) + ", rate " + fmt(rate0) + "->" +
               fmt(rate1));
  }
}

// --- criterion 4: small-size pipeline equivalence ---------------------------
void criterion_4() {
  const double c0 = 1.0;
  const double beta = 0.1;
  VolumeMesh mesh = meshgen::icosphere_cone_ball(14, 1.0);
  LoopBasis loops;  // no transverse modes needed for the Q=1 run
  LongitudinalSpectrum par = solve_longitudinal(mesh.boundary, 3);
  TransverseSpectrum perp;
  ModeBasis basis = build_mode_basis(mesh, loops, par, perp, 4);
  CouplingAssembler coupling(basis, c0, 1);

  const DrudeLorentz metal{beta * c0 / mesh.a, 0.0, 0.0};
  ModeSelection sel;
  sel.modes = {0};
  SweepConfig cfg;
  cfg.n_freq = 4096;
  cfg.omega_max = 3.0 * metal.omega_p;
  cfg.coupling_nodes = 17;
  const double sigma_c = cfg.contour_alpha * cfg.omega_max / cfg.n_freq;
  const TransferSample ts = frequency_sweep(coupling, metal, sel, cfg, sigma_c, c0);
  const ImpulseResponse ir = impulse_from_transfer(ts);

  const double Omega = metal.omega_p / std::sqrt(3.0);
  const double Twindow = 10.0 * 2.0 * constants::pi / Omega;
  double num = 0, den = 0;
  for (std::size_t j = 0; j < ir.t.size(); ++j) {
    const double t = ir.t[j];
    if (t < 0 || t > Twindow) continue;
    const double ref = metal.omega_p * metal.omega_p / Omega * std::sin(Omega * t);
    num += (ir.h[j](0, 0) - ref) * (ir.h[j](0, 0) - ref);
    den += ref * ref;
  }
  const double l2 = std::sqrt(num / den);
  report(4, l2 <= 0.05,
         "pipeline h_par11 matches (wp^2/W) sin(W t), W = wp/sqrt(3), over 10 periods",
         "relative L2 = " + fmt(l2) + ", kappa1 = " + fmt(par.kappa[0]));
}

// --- criterion 5: bulk-medium identity --------------------------------------
void criterion_5() {
  DrudeLorentz m{1.0, 0.25, 0.05};
  std::mt19937 gen(5150);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const complexd s(u(gen), 2.0 * u(gen) - 2.0);
    const double wmu = u(gen);
    const complexd route1 = 1.0 / (m.inv_chi(s) + s * (s / (s * s + wmu * wmu)));
    const complexd route2 = infinite_medium_transfer(m, wmu, s);
    worst = std::max(worst, std::abs(route1 - route2) / std::abs(route2));
  }
  report(5, worst < 1e-12, "bulk-medium transfer identity at 100 random (s, w_mu)",
         "worst rel = " + fmt(worst));
}

// --- criterion 6: slab pipeline ---------------------------------------------
void criterion_6() {
  const double c0 = 1.0;
  SlabModel slab;
  slab.material = DrudeLorentz{1.0, 0.0, 0.0};
  slab.a = 0.1 * slab.material.lambda_c(c0);

  const complexd sref(1e-4, 0.35 * slab.material.omega_p);
  const double trunc = slab_truncation_change(slab, sref, 8, 2, c0);

  const MatrixXcd H = slab_transfer(slab, sref, 8, c0);
  double offmax = 0, diagmin = 1e300, recip = 0;
  for (int i = 0; i < H.rows(); ++i) {
    diagmin = std::min(diagmin, std::abs(H(i, i)));
    for (int j = 0; j < H.cols(); ++j)
      if (i != j) offmax = std::max(offmax, std::abs(H(i, j)));
  }
  recip = (H - H.transpose()).cwiseAbs().maxCoeff() / H.cwiseAbs().maxCoeff();

  const int nf = 2048, M = 4;
  const double wmax = 3.0 * slab.material.omega_p;
  TransferSample ts;
  ts.omega_max = wmax;
  ts.sigma_c = wmax / nf;
  ts.window_fraction = 0.1;
  for (int k = 1; k <= nf; ++k) {
    ts.omega.push_back(wmax * k / nf);
    ts.H.push_back(slab_transfer(slab, complexd(ts.sigma_c, ts.omega.back()), M, c0));
  }
  ts.H_dc = slab_transfer(slab, complexd(ts.sigma_c, 0.0), M, c0);
  const ImpulseResponse ir = impulse_from_transfer(ts);

  const bool pass = trunc < 0.01 && offmax < 1e-2 * diagmin && ir.imag_residue_rel < 1e-10 &&
                    ir.anticausal_fraction < 1e-3 && recip < 1e-10;
  report(6, pass, "slab: truncation < 1%, decoupled, h real and causal",
         "trunc=" + fmt(trunc) + " off/diag=" + fmt(offmax / diagmin) +
             " imag=" + fmt(ir.imag_residue_rel) + " anticausal=" + fmt(ir.anticausal_fraction));
}

// --- criterion 11: Green-function identities --------------------------------
void criterion_11() {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_decomp = 0, worst_split = 0;
  for (int k = 0; k < 200; ++k) {
    const Vec3 r = Vec3(u(gen), u(gen), u(gen)).normalized() * (0.2 + 2.0 * std::abs(u(gen)));
    const complexd s(0.1 + std::abs(u(gen)), 2.0 * u(gen));
    const Dyad3c total_minus_long = green_total(r, s, 1.0) - green_longitudinal(r, s, 1.0);
    const Dyad3c split =
        green_transverse_static(r).cast<complexd>() + green_transverse_dynamic(r, s, 1.0);
    const Dyad3c direct = green_transverse(r, s, 1.0);
    worst_decomp = std::max(worst_decomp, (split - direct).norm() / direct.norm());
    worst_split = std::max(worst_split, (total_minus_long - split).norm() / split.norm());
  }
  const double f1_err = std::abs(greens::f1(complexd(0, 0)) - 1.0);
  const double f2_err = std::abs(greens::f2(complexd(0, 0)) - 1.0);
  const bool pass =
      worst_decomp < 1e-12 && worst_split < 1e-12 && f1_err < 1e-12 && f2_err < 1e-12;
  report(11, pass, "Green kernel identities at 1e-12; f1(0) = f2(0) = 1 via series",
         "decomp=" + fmt(worst_decomp) + " split=" + fmt(worst_split));
}

// --- criterion 12: Kramers-Kronig self-test ----------------------------------
void criterion_12() {
  DrudeLorentz m{1.0, 0.25, 0.1};
  std::vector<double> grid;
  const int n = 50000;
  for (int i = 1; i <= n; ++i) grid.push_back(40.0 * i / n);
  const double resid = kk_residual(m, grid);
  double chimax = 0;
  for (int i = 0; i < n; i += 7)
    chimax = std::max(chimax, std::abs(m.chi(complexd(0.0, grid[i])).real()));
  report(12, resid < 0.01 * chimax, "Kramers-Kronig residual < 1% of max |chi_r|",
         "resid/max=" + fmt(resid / chimax));
}

int main() {
  std::printf("acceptance battery\n");
  criterion_1();
  criteria_sphere_pipeline();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_11();
  criterion_12();
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
