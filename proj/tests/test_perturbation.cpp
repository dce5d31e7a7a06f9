#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "billiard/oracle.hpp"
#include "billiard/perturbation.hpp"

using namespace billiard;

namespace {

DomainSpec spec05() {
  DomainSpec s;
  s.kappa = 0.1;
  s.gamma = 0.5;
  s.epsilon = 0.05;
  return s;
}

double jp(int m, double x) {
  return m == 0 ? -std::cyl_bessel_j(1, x) : 0.5 * (std::cyl_bessel_j(m - 1, x) - std::cyl_bessel_j(m + 1, x));
}

// W(k) with the standard library's Bessel functions and a different rule.
double w_oracle(int k, const BesselMode& a, const BesselMode& b) {
  const auto rule = gauss_legendre(300, 0.0, a.r0);
  return rule.integrate([&](double r) {
    const double ja = a.norm * std::cyl_bessel_j(a.order(), a.k * r);
    const double jb = b.norm * std::cyl_bessel_j(b.order(), b.k * r);
    const double djb = b.norm * b.k * jp(b.order(), b.k * r);
    switch (k) {
      case 1: return ja * jb / r + ja * djb;
      case 2: return r * ja * jb;
      case 3: return r * r * r * ja * jb;
      default: return r * r * ja * djb;
    }
  });
}

// F(1..5) by a fixed fine composite rule, integrands written out directly.
FValues f_oracle(const ModePair& p, const DomainSpec& s, double t) {
  FValues acc{};
  const int panels = 4000;
  for (int i = 0; i < panels; ++i) {
    const auto rule = gauss_legendre(8, t * i / panels, t * (i + 1) / panels);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = rule.nodes[q];
      const double lam = 1.0 + s.kappa * u;
      const double g = 1.0 - std::exp(-s.gamma * u);
      const double gd = s.gamma * std::exp(-s.gamma * u);
      const cplx e = std::exp(cplx(0.0, (p.target.energy - p.source.energy) * u / lam));
      const double w = rule.weights[q];
      acc[0] += w * e * (0.5 * g / (lam * lam));
      acc[1] += w * e * cplx(0.0, g * s.kappa / lam);
      acc[2] += w * e * (-g * s.kappa * s.kappa);
      acc[3] += w * e * cplx(0.0, 0.5 * gd);
      acc[4] += w * e * (-0.5 * gd * lam * s.kappa);
    }
  }
  return acc;
}

}  // namespace

TEST(SelectionRule, OnlyNeighbouringAngularIndicesCouple) {
  const auto s = spec05();
  const auto a = mode_make(1, 1, s);
  for (int m : {-2, 1, 3, 4}) {
    const ModePair p{a, mode_make(m, 1, s)};
    EXPECT_FALSE(p.allowed());
    EXPECT_EQ(element(p, s, 2.0).total(), cplx(0.0));
  }
  EXPECT_TRUE((ModePair{a, mode_make(0, 2, s)}.allowed()));
  EXPECT_TRUE((ModePair{a, mode_make(2, 3, s)}.allowed()));
}

TEST(RadialIntegrals, MatchStdLibraryOracle) {
  const auto s = spec05();
  for (auto [m, n, mp, np] : {std::array{1, 1, 0, 1}, {0, 2, 1, 1}, {3, 2, 2, 4}, {-1, 3, -2, 1}})
    for (int k = 1; k <= 4; ++k) {
      const ModePair p{mode_make(mp, np, s), mode_make(m, n, s)};
      const double ref = w_oracle(k, p.target, p.source);
      EXPECT_NEAR(w_integral(k, p), ref, 1e-11 * std::max(1.0, std::abs(ref))) << "k=" << k;
    }
}

TEST(RadialIntegrals, BothOrdersZeroDiverges) {
  const auto s = spec05();
  const ModePair p{mode_make(0, 1, s), mode_make(0, 2, s)};
  EXPECT_TRUE(std::isinf(w_integral(1, p)));
  EXPECT_THROW(w_integral(5, p), std::invalid_argument);
}

TEST(TimeIntegrals, MatchFineCompositeRule) {
  const auto s = spec05();
  const ModePair p{mode_make(0, 1, s), mode_make(1, 3, s)};
  for (double t : {0.5, 5.0, 20.0}) {
    const auto ref = f_oracle(p, s, t);
    for (int k = 1; k <= 5; ++k)
      EXPECT_NEAR(std::abs(f_integral(k, p, s, t) - ref[static_cast<std::size_t>(k - 1)]), 0.0, 1e-10) << "k=" << k;
  }
}

TEST(TimeIntegrals, CumulativeGridMatchesDirect) {
  const auto s = spec05();
  const ModePair p{mode_make(1, 2, s), mode_make(2, 1, s)};
  const auto times = uniform_times(12.0, 7);
  const auto grid = f_integrals_on_grid(p, s, times);
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t k = 0; k < 5; ++k)
      EXPECT_NEAR(std::abs(grid[i][k] - f_integral(static_cast<int>(k) + 1, p, s, times[i])), 0.0, 1e-10);
}

TEST(Element, DerivedFormMatchesBruteForce) {
  const auto s = spec05();
  for (auto [m, n, mp, np] : {std::array{1, 1, 0, 1}, {-1, 2, 0, 1}, {2, 1, 1, 2}, {0, 3, -1, 2}, {-3, 1, -2, 2}}) {
    const auto src = mode_make(mp, np, s);
    const auto tg = mode_make(m, n, s);
    const BruteElement brute(tg, src, s);
    for (double t : {0.5, 2.0, 5.0}) {
      const cplx b = brute.integrate(t);
      EXPECT_LT(std::abs(element({src, tg}, s, t).total() - b), 1e-9 * std::abs(b));
    }
  }
}

TEST(Element, PrintedCoefficientsDisagreeWithBruteForce) {
  const auto s = spec05();
  const auto src = mode_make(0, 1, s);
  const auto tg = mode_make(1, 1, s);
  const cplx b = BruteElement(tg, src, s).integrate(2.0);
  EXPECT_GT(std::abs(element({src, tg}, s, 2.0, ElementForm::as_printed).total() - b), 1e-2 * std::abs(b));
}

TEST(Element, VanishesAtTimeZeroAndForZeroEpsilon) {
  auto s = spec05();
  const ModePair p{mode_make(0, 1, s), mode_make(1, 1, s)};
  EXPECT_EQ(element(p, s, 0.0).total(), cplx(0.0));
  s.epsilon = 0.0;
  EXPECT_EQ(element(p, s, 3.0).total(), cplx(0.0));
}

TEST(Amplitudes, MirrorSymmetryAndEpsilonSquaredScaling) {
  auto s = spec05();
  const auto init = mode_make(0, 1, s);
  std::vector<BesselMode> targets{mode_make(1, 1, s), mode_make(-1, 1, s), mode_make(1, 3, s), mode_make(-1, 3, s)};
  const auto times = uniform_times(50.0, 26);
  const auto a = amplitudes(init, targets, s, times);
  s.epsilon = 0.1;
  const auto b = amplitudes(init, targets, s, times);
  for (std::size_t it = 0; it < times.size(); ++it) {
    EXPECT_NEAR(a.populations(0)[it], a.populations(1)[it], 1e-15);
    EXPECT_NEAR(a.populations(2)[it], a.populations(3)[it], 1e-15);
    EXPECT_NEAR(b.populations(0)[it], 4.0 * a.populations(0)[it], 1e-14);
  }
  EXPECT_EQ(a.populations(0)[0], 0.0);
  EXPECT_EQ(a.index_of(-1, 3), 3u);
  EXPECT_THROW(a.index_of(5, 5), std::out_of_range);
}

TEST(Amplitudes, InitialModeKeepsUnitAmplitudeAndZeroEpsilonIsSilent) {
  auto s = spec05();
  s.epsilon = 0.0;
  const auto init = mode_make(0, 1, s);
  const auto t = amplitudes(init, {init, mode_make(1, 1, s)}, s, uniform_times(10.0, 5));
  for (std::size_t it = 0; it < 5; ++it) {
    EXPECT_EQ(t.amplitudes[0][it], cplx(1.0));
    EXPECT_EQ(t.amplitudes[1][it], cplx(0.0));
  }
}

TEST(Amplitudes, LargeTransferIsFlagged) {
  auto s = spec05();
  s.epsilon = 0.9;
  std::string seen;
  auto old = set_warning_handler([&](std::string_view m) { seen = m; });
  const auto t = amplitudes(mode_make(0, 1, s), {mode_make(1, 1, s), mode_make(-1, 1, s)}, s, uniform_times(50.0, 11),
                            AmplitudeOptions{ElementForm::derived, {}, default_radial_order, 0.01});
  set_warning_handler(old);
  EXPECT_FALSE(t.perturbative);
  EXPECT_NE(seen.find("first-order"), std::string::npos);
}
