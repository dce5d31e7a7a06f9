#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "billiard/reference.hpp"
#include "billiard/specfun.hpp"

using namespace billiard;

TEST(BesselJ, MatchesExtendedPrecisionSeries) {
  for (int m = 0; m <= 12; ++m) {
    for (double x : {1e-3, 0.1, 0.9, 1.0, 2.5, 5.0, 8.0, 10.0, 12.0}) {
      const double ref = static_cast<double>(reference::bessel_j_series(m, x));
      EXPECT_NEAR(bessel_j(m, x), ref, 1e-14 * std::max(1.0, std::abs(ref)) + 1e-15) << "m=" << m << " x=" << x;
    }
  }
}

TEST(BesselJ, MatchesStdLibraryAtLargeArgument) {
  for (int m = 0; m <= 8; ++m)
    for (double x : {15.0, 20.0, 33.7, 40.0}) EXPECT_NEAR(bessel_j(m, x), std::cyl_bessel_j(m, x), 1e-13);
}

TEST(BesselJ, ValueAtOriginAndNegativeOrderRejected) {
  EXPECT_EQ(bessel_j(0, 0.0), 1.0);
  EXPECT_EQ(bessel_j(3, 0.0), 0.0);
  EXPECT_THROW(bessel_j(-1, 1.0), std::invalid_argument);
}

TEST(BesselJ, TripleSatisfiesBesselEquation) {
  for (int m = 0; m <= 6; ++m)
    for (double x : {0.3, 2.0, 7.5, 19.0}) {
      const auto t = bessel_j_triple(m, x);
      EXPECT_NEAR(x * x * t.d2j + x * t.dj + (x * x - m * m) * t.j, 0.0, 1e-11 * x * x);
      const double h = 1e-5;
      const double fd = (bessel_j(m, x + h) - bessel_j(m, x - h)) / (2.0 * h);
      EXPECT_NEAR(t.dj, fd, 1e-9);
    }
}

TEST(BesselZero, KnownLowZerosAgainstBisectionOracle) {
  EXPECT_NEAR(bessel_zero(0, 1), reference::bessel_zero_bisect(0, 2.0, 3.0), 1e-12);
  EXPECT_NEAR(bessel_zero(1, 1), reference::bessel_zero_bisect(1, 3.5, 4.2), 1e-12);
  EXPECT_NEAR(bessel_zero(0, 2), reference::bessel_zero_bisect(0, 5.0, 6.0), 1e-12);
  EXPECT_NEAR(bessel_zero(0, 1), 2.404825557695773, 1e-13);
  EXPECT_NEAR(bessel_zero(1, 1), 3.831705970207512, 1e-13);
}

TEST(BesselZero, FunctionVanishesAndZerosInterlace) {
  for (int m = 0; m <= 10; ++m)
    for (int n = 1; n <= 10; ++n) {
      const double a = bessel_zero(m, n);
      EXPECT_LT(std::abs(bessel_j(m, a)), 1e-13);
      EXPECT_LT(a, bessel_zero(m + 1, n));
      EXPECT_LT(bessel_zero(m + 1, n), bessel_zero(m, n + 1));
    }
}

TEST(BesselZero, RejectsBadIndices) {
  EXPECT_THROW(bessel_zero(0, 0), std::invalid_argument);
  EXPECT_THROW(bessel_zero(-1, 1), std::invalid_argument);
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  const auto rule = gauss_legendre(12, -0.5, 2.0);
  for (int k = 0; k <= 23; ++k) {
    const double exact = (std::pow(2.0, k + 1) - std::pow(-0.5, k + 1)) / (k + 1);
    EXPECT_NEAR(rule.integrate([&](double x) { return std::pow(x, k); }), exact, 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Modes, NormMatchesClosedForm) {
  for (int m = -5; m <= 5; ++m)
    for (int n = 1; n <= 8; ++n) {
      const auto mode = mode_make(m, n, 1.0, 1.0, 1.0);
      EXPECT_NEAR(mode.norm, reference::mode_norm(m, mode.zero, 1.0), 1e-12 * mode.norm);
      EXPECT_NEAR(mode.energy, 0.5 * mode.zero * mode.zero, 1e-12 * mode.energy);
    }
}

TEST(Modes, RadiusAndMassScaling) {
  const auto a = mode_make(2, 3, 2.0, 1.0, 0.5);
  EXPECT_NEAR(a.k, bessel_zero(2, 3) / 2.0, 1e-14);
  EXPECT_NEAR(a.energy, a.k * a.k / (2.0 * 0.5), 1e-12);
  EXPECT_NEAR(mode_norm_closed_form(a), a.norm, 1e-12 * a.norm);
}

TEST(Modes, NegativeOrderIsConjugate) {
  const auto p = mode_make(3, 2, 1.0, 1.0, 1.0);
  const auto q = mode_make(-3, 2, 1.0, 1.0, 1.0);
  for (double th : {0.0, 0.7, 2.9})
    EXPECT_NEAR(std::abs(eigenmode_value(q, 0.6, th) - std::conj(eigenmode_value(p, 0.6, th))), 0.0, 1e-15);
}

TEST(ModeSet, OrderingAndSize) {
  const auto set = make_mode_set(5, 8, 1.0, 1.0, 1.0);
  ASSERT_EQ(set.size(), 88u);
  EXPECT_EQ(set.modes.front().m, -5);
  EXPECT_EQ(set.modes.front().n, 1);
  EXPECT_EQ(set.at(0, 1).m, 0);
  EXPECT_EQ(set.at(0, 1).n, 1);
  EXPECT_EQ(set.at(-2, 7).n, 7);
  EXPECT_THROW(set.at(6, 1), std::out_of_range);
}

TEST(ModeSet, RandomPairsAreOrthonormal) {
  const auto set = make_mode_set(5, 8, 1.0, 1.0, 1.0);
  const DiskQuadrature quad(1.0, default_radial_order, 32);
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
  for (int i = 0; i < 30; ++i) {
    const auto& a = set.modes[pick(rng)];
    const auto& b = set.modes[pick(rng)];
    const cplx g = quad.inner([&](double r, double t) { return eigenmode_value(a, r, t); },
                              [&](double r, double t) { return eigenmode_value(b, r, t); });
    EXPECT_NEAR(std::abs(g - (a.same_index(b) ? 1.0 : 0.0)), 0.0, 1e-10);
  }
}
