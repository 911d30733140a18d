#include <catch2/catch_amalgamated.hpp>

#include "dielmode/analytic.hpp"
#include "dielmode/response.hpp"
#include "test_support.hpp"

using namespace dielmode;
using Catch::Approx;
using testsup::urand;

TEST_CASE("bulk transfer function limits and identity") {
  // vacuum limit: chi -> 0 gives H -> 0
  {
    DrudeLorentz nearly_vacuum{1e-6, 0.3, 0.0};
    REQUIRE(std::abs(infinite_medium_transfer(nearly_vacuum, 1.0, complexd(0.1, 0.7))) < 1e-10);
  }
  // lossless metal: H = (wp^2/s^2)(s^2 + wmu^2)/(s^2 + wp^2 + wmu^2)
  {
    DrudeLorentz metal{1.3, 0.0, 0.0};
    const complexd s(0.2, 0.9);
    const double wmu = 0.6;
    const complexd expect = (metal.omega_p * metal.omega_p / (s * s)) * (s * s + wmu * wmu) /
                            (s * s + metal.omega_p * metal.omega_p + wmu * wmu);
    REQUIRE(std::abs(infinite_medium_transfer(metal, wmu, s) - expect) <
            1e-13 * std::abs(expect));
    // polariton pole at w^2 = wp^2 + wmu^2
    const double wpol = std::sqrt(metal.omega_p * metal.omega_p + wmu * wmu);
    REQUIRE_THROWS_AS(infinite_medium_transfer(metal, wmu, complexd(0.0, wpol)), Error);
  }
  // cross-module identity: the single-coordinate system with
  // S = s/(s^2 + wmu^2) reproduces the closed form to near machine precision
  {
    DrudeLorentz m{1.0, 0.25, 0.05};
    for (int k = 0; k < 100; ++k) {
      const complexd s(urand(0.01, 1.0), urand(-2.0, 2.0));
      const double wmu = urand(0.05, 2.0);
      const complexd Ssw = s / (s * s + wmu * wmu);
      const complexd M = 1.0 / m.chi(s) + s * Ssw;
      const complexd route1 = 1.0 / M;
      const complexd route2 = infinite_medium_transfer(m, wmu, s);
      REQUIRE(std::abs(route1 - route2) < 1e-12 * std::abs(route2));
    }
  }
}

TEST_CASE("slab coupling coefficients") {
  SlabModel slab;
  slab.a = 1.0;
  slab.material = DrudeLorentz{1.0, 0.0, 0.0};
  const double c0 = 1.0;

  // m = m' = 0: B+- = (c0/as)^2 and bracket = e^{-as/c0} - 1
  {
    const complexd s(0.3, 0.8);
    const complexd B = std::pow(c0 / (slab.a * s), 2);
    const complexd expect =
        (slab.a / (4.0 * c0)) * 2.0 * B * (std::exp(-slab.a * s / c0) - 1.0);
    REQUIRE(std::abs(slab_coupling(slab, 0, 0, s, c0) - expect) < 1e-13 * std::abs(expect));
  }
  // parity pattern of the bracket
  {
    const complexd s(0.5, 0.0);
    const complexd e = std::exp(-slab.a * s / c0);
    auto bracket = [&](int m, int mp) {
      const double s1 = ((m + mp) % 2 == 0) ? 1.0 : -1.0;
      const double s2 = ((mp - m) % 2 == 0) ? 1.0 : -1.0;
      return s1 * e - s2;
    };
    for (int m = -2; m <= 2; ++m)
      for (int mp = -2; mp <= 2; ++mp) {
        const complexd lhs = slab_coupling(slab, m, mp, s, c0);
        // reconstruct from B and the printed bracket
        auto B = [&](double sign) {
          return (c0 / (slab.a * s + complexd(0, sign * m * constants::pi * c0))) *
                 (c0 / (slab.a * s + complexd(0, sign * mp * constants::pi * c0)));
        };
        const complexd rhs = slab.a / (4.0 * c0) * (B(1) + B(-1)) * bracket(m, mp);
        REQUIRE(std::abs(lhs - rhs) < 1e-13 * std::max(1.0, std::abs(rhs)));
      }
  }
  // conjugate symmetry in s
  for (int k = 0; k < 20; ++k) {
    const complexd s(urand(0.05, 1.0), urand(-3.0, 3.0));
    const complexd a = slab_coupling(slab, 1, -2, std::conj(s), c0);
    const complexd b = std::conj(slab_coupling(slab, 1, -2, s, c0));
    REQUIRE(std::abs(a - b) < 1e-12 * std::abs(b));
  }
  // pole guard
  REQUIRE_THROWS_AS(
      slab_coupling(slab, 1, 0, complexd(0.0, -constants::pi * c0 / slab.a), c0), Error);
}

TEST_CASE("slab transfer: decoupling, truncation convergence, reciprocity") {
  const double c0 = 1.0;
  SlabModel slab;
  slab.material = DrudeLorentz{1.0, 0.0, 0.0};  // metal: lambda_c = c0/wp
  slab.a = 0.1 * slab.material.lambda_c(1.0);  // working units c0 = 1

  const complexd s(1e-3, 0.35 * slab.material.omega_p);

  // small slab: the modes are decoupled and the diagonal follows the
  // single-mode reduction H = chi / (1 + s S chi)
  const int M = 8;
  const MatrixXcd H = slab_transfer(slab, s, M, c0);
  const complexd chi = slab.material.chi(s);
  for (int m = -2; m <= 2; ++m) {
    const complexd smm = s * slab_coupling(slab, m, m, s, c0);
    const complexd expect = chi / (1.0 + smm * chi);
    const complexd got = H(m + M, m + M);
    REQUIRE(std::abs(got - expect) < 5e-3 * std::abs(expect));
  }
  // off-diagonals are small compared to diagonals
  double offmax = 0, diagmin = 1e300;
  for (int i = 0; i < 2 * M + 1; ++i) {
    diagmin = std::min(diagmin, std::abs(H(i, i)));
    for (int j = 0; j < 2 * M + 1; ++j)
      if (i != j) offmax = std::max(offmax, std::abs(H(i, j)));
  }
  REQUIRE(offmax < 1e-2 * diagmin);

  // truncation convergence: < 1% diagonal change from M to M+4
  REQUIRE(slab_truncation_change(slab, s, M, 2, c0) < 0.01);

  // reciprocity
  REQUIRE((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-12 * H.cwiseAbs().maxCoeff());
}

TEST_CASE("slab pipeline: synthesized impulse response is real and causal") {
  const double c0 = 1.0;
  SlabModel slab;
  slab.material = DrudeLorentz{1.0, 0.0, 0.0};
  slab.a = 0.1 * slab.material.lambda_c(1.0);  // working units c0 = 1

  const int nf = 1024;
  const int M = 4;
  const double wmax = 3.0 * slab.material.omega_p;
  const double domega = wmax / nf;
  TransferSample ts;
  ts.omega_max = wmax;
  ts.sigma_c = domega;
  ts.window_fraction = 0.1;
  for (int k = 1; k <= nf; ++k) {
    const double w = k * domega;
    ts.omega.push_back(w);
    ts.H.push_back(slab_transfer(slab, complexd(ts.sigma_c, w), M, c0));
  }
  ts.H_dc = slab_transfer(slab, complexd(ts.sigma_c, 0.0), M, c0);
  const ImpulseResponse ir = impulse_from_transfer(ts);
  REQUIRE(ir.imag_residue_rel < 1e-10);
  REQUIRE(ir.anticausal_fraction < 1e-3);
}

TEST_CASE("sphere eigenvalue oracle") {
  REQUIRE(sphere_kappa_longitudinal(1) == Approx(3.0));
  REQUIRE(sphere_kappa_longitudinal(2) == Approx(2.5));
  REQUIRE(sphere_kappa_longitudinal(3) == Approx(7.0 / 3.0));
  REQUIRE(sphere_kappa_degeneracy(1) == 3);
  REQUIRE_THROWS_AS(sphere_kappa_longitudinal(0), Error);
}
