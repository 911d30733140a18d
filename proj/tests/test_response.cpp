#include <catch2/catch_amalgamated.hpp>

#include "dielmode/analytic.hpp"
#include "dielmode/meshgen.hpp"
#include "dielmode/response.hpp"
#include "test_support.hpp"

using namespace dielmode;
using Catch::Approx;
using testsup::urand;

namespace {

struct SmallPipeline {
  VolumeMesh mesh;
  LoopBasis loops;
  LongitudinalSpectrum par;
  TransverseSpectrum perp;
  ModeBasis basis;
  std::unique_ptr<CouplingAssembler> coupling;

  SmallPipeline(int n, double radius, int npar, int nperp, double c0)
      : mesh(meshgen::cube_ball(n, radius)),
        loops(build_loop_basis(mesh)),
        par(solve_longitudinal(mesh.boundary, npar)),
        perp(solve_transverse(mesh, loops, nperp)),
        basis(build_mode_basis(mesh, loops, par, perp, 4)) {
    coupling = std::make_unique<CouplingAssembler>(basis, c0, 1);
  }
};

const SmallPipeline& ball_pipeline() {
  static SmallPipeline p(3, 1.0, 3, 3, 1.0);  // c0 = 1 units
  return p;
}

}  // namespace

TEST_CASE("fft round trip and delta spectrum") {
  std::vector<complexd> x(16, complexd(0, 0));
  x[3] = complexd(1.0, -0.5);
  auto y = x;
  fft_radix2(y);
  ifft_radix2(y);
  for (int i = 0; i < 16; ++i) REQUIRE(std::abs(y[i] - x[i]) < 1e-14);

  std::vector<complexd> d(8, complexd(0, 0));
  d[0] = 1.0;
  fft_radix2(d);
  for (const auto& v : d) REQUIRE(std::abs(v - complexd(1, 0)) < 1e-14);

  std::vector<complexd> bad(12);
  REQUIRE_THROWS_AS(fft_radix2(bad), Error);
}

TEST_CASE("system matrix with zeroed coupling blocks") {
  const auto& p = ball_pipeline();
  const DrudeLorentz mat{1.0, 0.25, 0.05};
  ModeSelection sel;
  sel.modes = {0, 1, 2, p.basis.n_par, p.basis.n_par + 1};

  CouplingMatrix S;
  S.s = complexd(0.0, 0.6);
  S.n_par = p.basis.n_par;
  S.n_perp = p.basis.n_perp;
  S.S = MatrixXcd::Zero(p.basis.n_modes(), p.basis.n_modes());

  const complexd s = S.s;
  const MatrixXcd M = assemble_M(sel, mat, p.basis, S, s, 1.0);
  for (int i = 0; i < sel.size(); ++i)
    for (int j = 0; j < sel.size(); ++j)
      if (i != j) REQUIRE(std::abs(M(i, j)) == 0.0);
  const complexd chi = mat.chi(s);
  for (int i = 0; i < 3; ++i) {
    const complexd expect = 1.0 / chi + 1.0 / p.basis.kappa_par[i];
    REQUIRE(std::abs(M(i, i) - expect) < 1e-14 * std::abs(expect));
  }
  for (int i = 3; i < 5; ++i) {
    const double kp = p.basis.kappa_perp[sel.modes[i] - p.basis.n_par];
    const complexd expect = 1.0 / chi + p.mesh.a * p.mesh.a * s * s / kp;
    REQUIRE(std::abs(M(i, i) - expect) < 1e-14 * std::abs(expect));
  }

  // diagonal M inverts elementwise, and H_par = chi kappa / (kappa + chi)
  const auto r = transfer_at(M);
  REQUIRE(r.residual < 1e-12);
  for (int i = 0; i < 3; ++i) {
    const double kap = p.basis.kappa_par[i];
    const complexd expect = chi * kap / (kap + chi);
    REQUIRE(std::abs(r.H(i, i) - expect) < 1e-12 * std::abs(expect));
  }

  // conjugate symmetry of the assembled matrix
  const MatrixXcd Mc = assemble_M(sel, mat, p.basis, S, std::conj(s), 1.0);
  REQUIRE((Mc - M.conjugate()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("single-mode composition check") {
  const auto& p = ball_pipeline();
  const DrudeLorentz mat{1.0, 0.0, 0.0};
  ModeSelection sel;
  sel.modes = {0};
  const complexd s(1e-4, 0.5);
  const CouplingMatrix S = p.coupling->evaluate(s);
  const MatrixXcd M = assemble_M(sel, mat, p.basis, S, s, 1.0);
  const complexd hand = 1.0 / mat.chi(s) + 1.0 / p.basis.kappa_par[0] + s * S.S(0, 0);
  REQUIRE(std::abs(M(0, 0) - hand) < 1e-14 * std::abs(hand));
}

TEST_CASE("impulse synthesis: boxcar spectrum peaks at t = 0") {
  TransferSample ts;
  const int nf = 128;
  const double wmax = 10.0;
  ts.omega_max = wmax;
  ts.sigma_c = 0.0;
  ts.window_fraction = 0.1;
  for (int k = 1; k <= nf; ++k) {
    ts.omega.push_back(wmax * k / nf);
    ts.H.push_back(MatrixXcd::Constant(1, 1, complexd(2.5, 0)));
  }
  ts.H_dc = MatrixXcd::Constant(1, 1, complexd(2.5, 0));
  const ImpulseResponse ir = impulse_from_transfer(ts);
  REQUIRE(ir.imag_residue_rel < 1e-12);
  int jmax = 0;
  for (int j = 1; j < static_cast<int>(ir.t.size()); ++j)
    if (std::abs(ir.h[j](0, 0)) > std::abs(ir.h[jmax](0, 0))) jmax = j;
  REQUIRE(ir.t[jmax] == Approx(0.0).margin(1e-12));
  REQUIRE(ir.h[jmax](0, 0) > 0.5 * 2.5 * wmax / constants::pi);
}

TEST_CASE("impulse synthesis reproduces a damped oscillator") {
  const double wp = 1.0, W = 0.5, G = 0.05;
  const int nf = 1024;
  const double wmax = 8.0;
  const double domega = wmax / nf;
  TransferSample ts;
  ts.omega_max = wmax;
  ts.sigma_c = 1.0 * domega;
  ts.window_fraction = 0.1;
  auto H = [&](complexd s) { return wp * wp / (s * s + G * s + W * W); };
  for (int k = 1; k <= nf; ++k) {
    const double w = k * domega;
    ts.omega.push_back(w);
    ts.H.push_back(MatrixXcd::Constant(1, 1, H(complexd(ts.sigma_c, w))));
  }
  ts.H_dc = MatrixXcd::Constant(1, 1, H(complexd(ts.sigma_c, 0)));
  const ImpulseResponse ir = impulse_from_transfer(ts);

  REQUIRE(ir.imag_residue_rel < 1e-10);
  REQUIRE(ir.anticausal_fraction < 1e-3);

  const double Om = std::sqrt(W * W - G * G / 4);
  double num = 0, den = 0;
  for (std::size_t j = 0; j < ir.t.size(); ++j) {
    const double t = ir.t[j];
    if (t < 0 || t > 0.6 * ir.t.back()) continue;
    const double ref = wp * wp / Om * std::exp(-0.5 * G * t) * std::sin(Om * t);
    num += (ir.h[j](0, 0) - ref) * (ir.h[j](0, 0) - ref);
    den += ref * ref;
  }
  REQUIRE(std::sqrt(num / den) < 0.01);
}

TEST_CASE("small-size closed forms") {
  {
    const DrudeLorentz m{2.0, 0.5, 0.0};
    const auto r = small_size_closed_form(m, 3.0, false, 0.0);
    REQUIRE(!r.overdamped);
    REQUIRE(r.Omega == Approx(0.5));
    for (double t : {0.3, 1.7, 4.0})
      REQUIRE(r.h(t) == Approx(m.omega_p * m.omega_p / m.omega_0 * std::sin(m.omega_0 * t))
                            .epsilon(1e-12));
    REQUIRE(r.h(-1.0) == 0.0);
  }
  // metal perp, lossless: the response degenerates to a ramp
  {
    const DrudeLorentz m{2.0, 0.0, 0.0};
    const auto r = small_size_closed_form(m, 2.0, false, 0.5);
    REQUIRE(r.ramp);
    const double delta = 1.0 + 0.25 / 2.0;
    REQUIRE(r.h(2.0) == Approx(m.omega_p * m.omega_p / delta * 2.0));
  }
  // parallel family: pole location and decay time
  {
    const DrudeLorentz m{1.0, 0.25, 0.1};
    const double kappa = 3.0;
    const auto r = small_size_closed_form(m, kappa, true, 0.1);
    REQUIRE(r.inv_tau == Approx(m.gamma / 2.0));  // tau = 2/Gamma
    const double w2 = m.omega_0 * m.omega_0 + m.omega_p * m.omega_p / kappa;
    const complexd pole(-m.gamma / 2.0, std::sqrt(w2 - m.gamma * m.gamma / 4));
    REQUIRE(std::abs(pole * pole + pole * m.gamma + w2) < 1e-14);
    REQUIRE(std::abs(r.H(0.99 * pole)) > 1e2);
  }
  // overdamped branch is flagged and decays monotonically
  {
    const DrudeLorentz m{1.0, 0.01, 1.0};
    const auto r = small_size_closed_form(m, 1e6, true, 0.0);
    REQUIRE(r.overdamped);
    REQUIRE(r.h(1.0) > 0);
    REQUIRE(r.h(30.0) < r.h(10.0));
  }
}

TEST_CASE("sweep: peak near the quasistatic frequency, reciprocity, determinism") {
  const auto& p = ball_pipeline();
  const double beta = 0.1;
  const double c0 = 1.0;
  const DrudeLorentz mat{beta * c0 / p.mesh.a, 0.0, 0.0};  // metal, lossless

  ModeSelection sel;
  for (int i = 0; i < p.basis.n_modes(); ++i) sel.modes.push_back(i);

  SweepConfig cfg;
  cfg.n_freq = 512;
  cfg.omega_max = 1.2 * mat.omega_p;
  cfg.coupling_nodes = 17;
  const double sigma_c = cfg.contour_alpha * cfg.omega_max / cfg.n_freq;
  const TransferSample ts = frequency_sweep(*p.coupling, mat, sel, cfg, sigma_c, c0);

  REQUIRE(ts.n_flagged == 0);
  for (double r : ts.residual) REQUIRE(r < 1e-8);

  int kmax = 0;
  for (int k = 1; k < cfg.n_freq; ++k)
    if (std::abs(ts.H[k](0, 0)) > std::abs(ts.H[kmax](0, 0))) kmax = k;
  const double expected = mat.omega_p / std::sqrt(p.basis.kappa_par[0]);
  REQUIRE(ts.omega[kmax] == Approx(expected).epsilon(0.02));

  // reciprocity: M is complex symmetric by construction, so H is too
  for (int k = 0; k < cfg.n_freq; k += 37) {
    const double defect = (ts.H[k] - ts.H[k].transpose()).cwiseAbs().maxCoeff();
    REQUIRE(defect < 1e-6 * ts.H[k].cwiseAbs().maxCoeff());
  }

  // determinism: a second run gives bit-identical samples
  const TransferSample ts2 = frequency_sweep(*p.coupling, mat, sel, cfg, sigma_c, c0);
  for (int k = 0; k < cfg.n_freq; k += 53)
    REQUIRE((ts.H[k] - ts2.H[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("damping shifts the peak by less than Gamma/2") {
  const auto& p = ball_pipeline();
  const double c0 = 1.0;
  const DrudeLorentz m0{0.1 * c0 / p.mesh.a, 0.0, 0.0};
  DrudeLorentz m1 = m0;
  m1.gamma = 0.08 * m0.omega_p;

  ModeSelection sel;
  sel.modes = {0};
  SweepConfig cfg;
  cfg.n_freq = 1024;
  cfg.omega_max = 1.2 * m0.omega_p;
  cfg.coupling_nodes = 9;

  auto peak = [&](const DrudeLorentz& mat) {
    const TransferSample ts =
        frequency_sweep(*p.coupling, mat, sel, cfg, mat.epsilon_shift(), c0);
    int kmax = 0;
    for (int k = 1; k < cfg.n_freq; ++k)
      if (std::abs(ts.H[k](0, 0)) > std::abs(ts.H[kmax](0, 0))) kmax = k;
    return ts.omega[kmax];
  };
  REQUIRE(std::abs(peak(m1) - peak(m0)) < 0.5 * m1.gamma);
}

TEST_CASE("nondimensional response depends only on (beta, w0/wp, G/wp)") {
  const double c0 = 1.0;
  SmallPipeline p1(2, 1.0, 2, 2, c0);
  SmallPipeline p2(2, 0.5, 2, 2, c0);  // exactly halved geometry

  const double beta = 0.4;
  const DrudeLorentz mat1{beta * c0 / 1.0, 0.25 * beta * c0, 0.1 * beta * c0};
  const DrudeLorentz mat2{beta * c0 / 0.5, 0.5 * beta * c0, 0.2 * beta * c0};

  ModeSelection sel;
  sel.modes = {0, 1, 2, 3};
  SweepConfig cfg;
  cfg.n_freq = 64;
  cfg.coupling_nodes = 9;
  cfg.omega_max = 2.0 * mat1.omega_p;
  const TransferSample t1 = frequency_sweep(*p1.coupling, mat1, sel, cfg, 0.0, c0);
  cfg.omega_max = 2.0 * mat2.omega_p;
  const TransferSample t2 = frequency_sweep(*p2.coupling, mat2, sel, cfg, 0.0, c0);

  for (int k = 0; k < cfg.n_freq; k += 7) {
    REQUIRE(t1.omega[k] / mat1.omega_p == Approx(t2.omega[k] / mat2.omega_p).epsilon(1e-12));
    REQUIRE((t1.H[k] - t2.H[k]).cwiseAbs().maxCoeff() < 1e-9 * t1.H[k].cwiseAbs().maxCoeff());
  }
}
