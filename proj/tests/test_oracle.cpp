#include <gtest/gtest.h>

#include <random>

#include "billiard/oracle.hpp"

using namespace billiard;

namespace {

DomainSpec spec(double eps, double kappa = 0.1) {
  DomainSpec s;
  s.kappa = kappa;
  s.gamma = 0.5;
  s.epsilon = eps;
  return s;
}

GridWavefunction random_field(const PolarGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  GridWavefunction w(g);
  for (auto& v : w.values) v = {d(rng), d(rng)};
  w.enforce_dirichlet();
  return w;
}

// Smooth, vanishing at r = 1, regular at the origin.
cplx smooth(double r, double th) {
  const double x = r * std::cos(th), y = r * std::sin(th);
  return (1.0 - r * r) * cplx(1.0 + 0.5 * x + y * y, 0.3 * x * y);
}

}  // namespace

TEST(PolarGrid, RejectsBadShapes) {
  EXPECT_THROW(PolarGrid(8, 32, 1.0), std::invalid_argument);
  EXPECT_THROW(PolarGrid(32, 33, 1.0), std::invalid_argument);
  const PolarGrid g(32, 16, 2.0);
  EXPECT_NEAR(g.r(g.nr - 1), 2.0, 1e-14);
  EXPECT_EQ(g.wavenumber(15), -1);
}

TEST(EffectiveOperator, PantographicPartsAreHermitian) {
  const PolarGrid g(48, 32, 1.0);
  const auto s = spec(0.0);
  const EffectiveOperator op(g, pantographic_boundary(s), s, 3.0);
  const auto u = random_field(g, 1), v = random_field(g, 2);
  for (auto part : {HeffParts::kinetic, HeffParts::dilation}) {
    const cplx a = u.inner(op.apply(v, part));
    const cplx b = std::conj(v.inner(op.apply(u, part)));
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-10 * std::abs(a));
  }
}

TEST(EffectiveOperator, StaticModeIsNearEigenvector) {
  const auto s = spec(0.0, 0.0);
  const auto mode = mode_make(2, 1, s);
  double last = 0.0;
  for (int nr : {64, 128}) {
    const PolarGrid g(nr, 32, 1.0);
    const auto psi = sample_grid(g, [&](double r, double th) { return eigenmode_value(mode, r, th); });
    const EffectiveOperator op(g, constant_boundary(1.0), s, 0.0);
    const auto h = op.apply(psi);
    GridWavefunction res = h;
    for (std::size_t i = 0; i < res.values.size(); ++i) res.values[i] -= mode.energy * psi.values[i];
    const double rel = std::sqrt(res.norm2() / psi.norm2()) / mode.energy;
    if (last > 0.0) EXPECT_LT(rel, 0.35 * last);  // second order
    last = rel;
  }
  EXPECT_LT(last, 1e-3);
}

TEST(EffectiveOperator, DeformedKineticTermMatchesTransformedLaplacian) {
  // (U H U^dag phi)(r, th) = R(th) (H psi)(r R(th), th) with psi = phi(rho / R, th) / R;
  // the oracle differentiates psi by finite differences in (rho, th).
  const auto s = spec(0.2, 0.0);
  const double t = 6.0;
  const auto b = ellipse_boundary(s);
  auto psi = [&](double rho, double th) {
    const double R = radius(s, th, t);
    return smooth(rho / R, th) / R;
  };
  const PolarGrid g(256, 64, 1.0);
  const EffectiveOperator op(g, b, s, t);
  const auto h = op.apply(sample_grid(g, smooth), HeffParts::kinetic);
  const double e = 1e-4;
  for (int j : {40, 120, 200})
    for (int l : {3, 17, 40}) {
      const double r = g.r(j), th = g.theta(l);
      const double R = radius(s, th, t);
      const double rho = r * R;
      const cplx c = psi(rho, th);
      const cplx lap = (psi(rho + e, th) - 2.0 * c + psi(rho - e, th)) / (e * e) +
                       (psi(rho + e, th) - psi(rho - e, th)) / (2 * e * rho) +
                       (psi(rho, th + e) - 2.0 * c + psi(rho, th - e)) / (e * e * rho * rho);
      const cplx expect = -0.5 * R * lap;
      EXPECT_NEAR(std::abs(h.at(j, l) - expect), 0.0, 2e-3 * std::max(1.0, std::abs(expect))) << j << "," << l;
    }
}

TEST(EffectiveOperator, NonPantographicFlagWithCircleMatchesPantographic) {
  const PolarGrid g(32, 16, 1.0);
  const auto s = spec(0.0);
  BoundaryFunction circle{pantographic_boundary(s).eval, false};
  const auto u = random_field(g, 3);
  const auto a = EffectiveOperator(g, pantographic_boundary(s), s, 2.0).apply(u);
  const auto c = EffectiveOperator(g, circle, s, 2.0).apply(u);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(std::abs(a.values[i] - c.values[i]), 0.0, 1e-12);
}

TEST(CrankNicolson, PantographicNormConserved) {
  const PolarGrid g(64, 32, 1.0);
  const auto s = spec(0.0);
  auto psi = random_field(g, 4);
  const double n0 = psi.norm2();
  psi = propagate(pantographic_boundary(s), s, psi, 2.0, 0.01);
  EXPECT_NEAR(psi.norm2() / n0, 1.0, 2e-8);
  EXPECT_NEAR(psi.time, 2.0, 1e-12);
}

TEST(CrankNicolson, PantographicFollowsExactSolution) {
  const PolarGrid g(128, 32, 1.0);
  const auto s = spec(0.0);
  const auto mode = mode_make(1, 2, s);
  auto psi = sample_grid(g, [&](double r, double th) { return phi_exact(mode, s, r, th, 0.0); });
  psi = propagate(pantographic_boundary(s), s, psi, 5.0, 0.01);
  const auto ex = sample_grid(g, [&](double r, double th) { return phi_exact(mode, s, r, th, 5.0); }, 5.0);
  EXPECT_GT(fidelity(ex, psi), 1.0 - 1e-4);
  EXPECT_NEAR(std::norm(project(psi, mode, s, 5.0)), 1.0, 1e-4);
}

TEST(CrankNicolson, DeformedStepConvergesAndNearlyConservesNorm) {
  const PolarGrid g(64, 32, 1.0);
  const auto s = spec(0.05);
  const auto mode = mode_make(0, 1, s);
  auto psi = sample_grid(g, [&](double r, double th) { return phi_exact(mode, s, r, th, 0.0); });
  const double n0 = psi.norm2();
  CrankNicolson cn(g, ellipse_boundary(s), s, 0.01);
  for (int i = 0; i < 200; ++i) cn.step(psi);
  EXPECT_LT(cn.last_iterations(), 20);
  EXPECT_NEAR(psi.norm2() / n0, 1.0, 1e-3);
}

TEST(Projection, SampledModeProjectsToOne) {
  const PolarGrid g(64, 32, 1.0);
  const auto s = spec(0.0);
  const auto a = mode_make(1, 1, s), b = mode_make(-1, 2, s);
  const auto psi = sample_grid(g, [&](double r, double th) { return phi_exact(a, s, r, th, 4.0); }, 4.0);
  EXPECT_NEAR(std::abs(project(psi, a, s, 4.0) - 1.0), 0.0, 1e-12);
  EXPECT_LT(std::abs(project(psi, b, s, 4.0)), 1e-12);
}

TEST(FiniteDifference, ExactForQuartics) {
  std::vector<double> y;
  const double h = 0.1;
  for (int i = 0; i < 9; ++i) {
    const double x = i * h;
    y.push_back(1.0 + x - 2 * x * x + 0.5 * std::pow(x, 4));
  }
  const auto d = fd_derivative(y, h);
  for (int i = 0; i < 9; ++i) {
    const double x = i * h;
    EXPECT_NEAR(d[static_cast<std::size_t>(i)], 1.0 - 4 * x + 2 * x * x * x, 1e-12);
  }
}

TEST(FiniteDifference, GridEnergyRateMatchesContactFormula) {
  const PolarGrid g(192, 32, 1.0);
  const auto s = spec(0.0);
  const auto mode = mode_make(0, 1, s);
  auto psi = sample_grid(g, [&](double r, double th) { return phi_exact(mode, s, r, th, 0.0); });
  std::vector<GridWavefunction> traj{psi};
  propagate(pantographic_boundary(s), s, psi, 1.0, 0.01, [&](const GridWavefunction& w) {
    traj.push_back(w);
  });
  const auto rate = fd_energy_rate(traj, s);
  const double exact = energy_rate(PantographicState::single(mode), s, 0.5);
  EXPECT_NEAR(rate[50], exact, 2e-3 * std::abs(exact));
}

TEST(BruteElement, ForbiddenPairsVanish) {
  const auto s = spec(0.05);
  const BruteElement e(mode_make(2, 1, s), mode_make(0, 1, s), s);
  EXPECT_LT(std::abs(e.integrate(3.0)), 1e-12);
  const BruteElement f(mode_make(1, 2, s), mode_make(1, 1, s), s);
  EXPECT_LT(std::abs(f(1.0)), 1e-12);
}
