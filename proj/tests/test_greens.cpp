#include <catch2/catch_amalgamated.hpp>

#include "dielmode/greens.hpp"
#include "test_support.hpp"

using namespace dielmode;
using Catch::Approx;
using testsup::random_rotation;
using testsup::random_unit;
using testsup::urand;

namespace {
complexd random_s() {
  // right half plane plus imaginary axis, the domain the kernels are used on
  return complexd(urand(0.0, 2.0), urand(-3.0, 3.0));
}
}  // namespace

TEST_CASE("total kernel: trace identity and principal-axis form") {
  const double c0 = 1.0;
  for (int k = 0; k < 10; ++k) {
    const Vec3 r = urand(0.5, 2.0) * random_unit();
    const complexd s = random_s();
    if (std::abs(s) < 0.1) continue;
    const Dyad3c G = green_total(r, s, c0);
    const complexd expected = std::exp(-s * r.norm() / c0) / (4 * constants::pi * r.norm()) * 2.0;
    REQUIRE(std::abs(G.trace() - expected) < 1e-13 * std::abs(expected));
  }
  // r along z: diagonal in the Cartesian basis
  const Dyad3c G = green_total(Vec3(0, 0, 1.3), complexd(0.4, 1.1), 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) REQUIRE(std::abs(G(i, j)) < 1e-15);
}

TEST_CASE("longitudinal kernel: trace, scaling in s and r") {
  const double c0 = 1.0;
  const Vec3 r = Vec3(0.3, -0.4, 0.8);
  const complexd s(0.2, 1.5);
  const Dyad3c G = green_longitudinal(r, s, c0);
  REQUIRE(std::abs(G.trace()) < 1e-15 * G.norm());
  const Dyad3c G2 = green_longitudinal(r, 2.0 * s, c0);
  REQUIRE((G - 4.0 * G2).norm() < 1e-13 * G.norm());
  const Dyad3c Gr2 = green_longitudinal(2.0 * r, s, c0);
  REQUIRE((G - 8.0 * Gr2).norm() < 1e-13 * G.norm());
  REQUIRE_THROWS_AS(green_longitudinal(r, complexd(0, 0), c0), Error);
  REQUIRE_THROWS_AS(green_total(Vec3::Zero(), s, c0), Error);
}

TEST_CASE("transverse decomposition identities hold to 1e-12") {
  const double c0 = 1.0;
  for (int k = 0; k < 50; ++k) {
    const Vec3 r = urand(0.2, 3.0) * random_unit();
    complexd s = random_s();
    if (std::abs(s) < 0.2) s += complexd(0.5, 0);
    const Dyad3c route1 = green_total(r, s, c0) - green_longitudinal(r, s, c0);
    const Dyad3c route2 =
        green_transverse_static(r).cast<complexd>() + green_transverse_dynamic(r, s, c0);
    REQUIRE((route1 - route2).norm() < 1e-12 * route1.norm());
    const Dyad3c route3 = green_transverse(r, s, c0);
    REQUIRE((route1 - route3).norm() < 1e-14 * route1.norm());
  }
}

TEST_CASE("f1, f2 are one at zero and consistent across the series switch") {
  REQUIRE(greens::f1(complexd(0, 0)) == complexd(1, 0));
  REQUIRE(greens::f2(complexd(0, 0)) == complexd(1, 0));

  // same-point dual-path agreement: evaluate the Taylor polynomials here and
  // compare against the closed forms the library uses above the switch.
  auto f1_series = [](complexd x) {
    const complexd x2 = x * x;
    return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0));
  };
  auto f2_series = [](complexd x) {
    return 1.0 + x * (-3.0 / 8.0 +
                      x * (1.0 / 10.0 + x * (-1.0 / 48.0 + x * (1.0 / 280.0 - x / 1920.0))));
  };
  for (double xi : {1.05e-2, 2e-2, 3e-2}) {
    const complexd x(xi, 0.3 * xi);
    // closed-form path (|x| above switch) vs series; series truncation is
    // ~x^6, closed-form cancellation ~eps/x^3
    const double tol = 1e-15 / (xi * xi * xi) + std::pow(xi, 6);
    REQUIRE(std::abs(greens::f2(x) - f2_series(x)) < tol);
    REQUIRE(std::abs(greens::f1(x) - f1_series(x)) < 1e-13);
  }

  // f1's closed form is stable arbitrarily small; dual path at 1e-6
  const complexd xi(1e-6, 0);
  REQUIRE(std::abs(std::sinh(xi) / xi - greens::f1(xi)) < 1e-12);
}

TEST_CASE("dynamic part vanishes linearly in s") {
  const Vec3 r(0.4, 0.1, -0.3);
  const double c0 = 1.0;
  const Dyad3c d1 = green_transverse_dynamic(r, complexd(0, 1e-3), c0);
  const Dyad3c d2 = green_transverse_dynamic(r, complexd(0, 2e-3), c0);
  // deviation from linearity is the quadratic term, O(|s| r / c0) relative
  REQUIRE((2.0 * d1 - d2).norm() < 2e-3 * r.norm() * d2.norm());

  // the limit slope is isotropic: G_d / s -> -(1/6 pi c0) I independent of r
  for (int k = 0; k < 5; ++k) {
    const Vec3 rr = urand(0.1, 1.0) * random_unit();
    const complexd s(0, 1e-5);
    const Dyad3c slope = green_transverse_dynamic(rr, s, c0) / s;
    const Dyad3c expected = -1.0 / (6 * constants::pi * c0) * Dyad3c::Identity();
    REQUIRE((slope - expected).norm() < 1e-4 * expected.norm());
  }
}

TEST_CASE("static transverse kernel values") {
  const Dyad3 g = green_transverse_static(Vec3(0, 0, 1.0));
  const double p = 1.0 / (8 * constants::pi);
  REQUIRE(g(0, 0) == Approx(p));
  REQUIRE(g(1, 1) == Approx(p));
  REQUIRE(g(2, 2) == Approx(2 * p));
  REQUIRE(std::abs(g(0, 1)) < 1e-18);
  const double r = 0.7;
  REQUIRE(green_transverse_static(r * random_unit()).trace() ==
          Approx(4.0 / (8 * constants::pi * r)));
}

TEST_CASE("rotation equivariance and reciprocity of all kernels") {
  const double c0 = 1.0;
  for (int k = 0; k < 10; ++k) {
    const Vec3 r = urand(0.3, 2.0) * random_unit();
    const complexd s = complexd(0.3, 0) + random_s();
    const Eigen::Matrix3d R = random_rotation();
    auto check = [&](auto&& kernel) {
      const Dyad3c K = kernel(r);
      const Dyad3c KR = kernel(Vec3(R * r));
      REQUIRE((R.cast<complexd>() * K * R.transpose().cast<complexd>() - KR).norm() <
              1e-12 * K.norm());
      REQUIRE((K - K.transpose()).norm() < 1e-13 * K.norm());          // symmetric
      REQUIRE((K - kernel(Vec3(-r)).transpose()).norm() < 1e-13 * K.norm());  // reciprocity
    };
    check([&](const Vec3& x) { return green_total(x, s, c0); });
    check([&](const Vec3& x) { return green_longitudinal(x, s, c0); });
    check([&](const Vec3& x) { return green_transverse(x, s, c0); });
    check([&](const Vec3& x) { return Dyad3c(green_transverse_static(x).cast<complexd>()); });
    check([&](const Vec3& x) { return green_transverse_dynamic(x, s, c0); });
  }
}

TEST_CASE("small-size expansion tracks the exact transverse kernel") {
  const double c0 = 1.0;
  const Vec3 r = 1.0 * random_unit();
  // sr/c0 = 0 reproduces the static kernel exactly
  REQUIRE((green_asymptotic_small(r, complexd(0, 0), c0) -
           green_transverse_static(r).cast<complexd>())
              .norm() == 0.0);
  // sr/c0 = 1e-3: agreement to cubic order
  const complexd s(0, 1e-3);
  const Dyad3c exact = green_transverse(r, s, c0);
  const Dyad3c asym = green_asymptotic_small(r, s, c0);
  REQUIRE((exact - asym).norm() < 1e-9 * exact.norm());
}

TEST_CASE("scaled-total kernel is stable at s = 0") {
  const Vec3 r(0.2, 0.5, -0.1);
  const double c0 = 1.0;
  const complexd s(0.3, 0.9);
  const Dyad3c a = green_total_scaled_s2(r, s, c0);
  const Dyad3c b = s * s * green_total(r, s, c0);
  REQUIRE((a - b).norm() < 1e-12 * a.norm());
  // finite static limit: (c0^2/r^2)(I - 3 e e)/(4 pi r)
  const Dyad3c zero = green_total_scaled_s2(r, complexd(0, 0), c0);
  const Vec3 e = r.normalized();
  const Dyad3c expected = (c0 * c0 / r.squaredNorm() / (4 * constants::pi * r.norm())) *
                          (Dyad3::Identity() - 3.0 * e * e.transpose()).cast<complexd>();
  REQUIRE((zero - expected).norm() < 1e-13 * expected.norm());
}
