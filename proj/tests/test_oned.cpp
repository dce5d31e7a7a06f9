#include <gtest/gtest.h>

#include <string>

#include "billiard/oned.hpp"
#include "billiard/oracle.hpp"

using namespace billiard;

namespace {

Box1DSpec box(int nx = 801, double kappa = 0.1, double x0 = 1.0) {
  Box1DSpec s;
  s.nx = nx;
  s.kappa = kappa;
  s.x0 = x0;
  return s;
}

// exp(i mu R Rdot x^2 / (2 hbar)) times a box mode, at t = 0
std::vector<cplx> dressed(const Box1DSpec& s, int n) {
  return sample_1d(s, [&](double x) { return std::polar(box_mode_1d(s, n, x), s.mu * s.kappa * x * x / (2 * s.hbar)); });
}

double rate_mismatch(const Box1DSpec& s, std::vector<cplx> phi, double dt) {
  std::vector<double> e{kinetic_energy_1d(s, phi, 0.0)}, r{energy_rate_1d(s, phi, 0.0)};
  propagate_1d(s, phi, 0.0, 2.0, dt, [&](double t, const std::vector<cplx>& p) {
    e.push_back(kinetic_energy_1d(s, p, t));
    r.push_back(energy_rate_1d(s, p, t));
  });
  const auto fd = fd_derivative(e, dt);
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) worst = std::max(worst, std::abs(fd[i] - r[i]) / std::abs(r[i]));
  return worst;
}

}  // namespace

TEST(Dilation1D, MatrixIsAntisymmetric) {
  const auto s = box(201);
  const auto m = dilation_matrix_1d(s);
  const int n = s.nx - 2;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      EXPECT_EQ(m[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)],
                -m[static_cast<std::size_t>(b) * n + static_cast<std::size_t>(a)]);
}

TEST(Dilation1D, EvenFunctionAtOrigin) {
  const auto s = box(801);
  const auto phi = sample_1d(s, [&](double x) { return cplx(std::cos(pi * x)); });
  const auto h = apply_h1d(s, phi, 2.0, false, true);
  const double R = s.R(2.0);
  EXPECT_NEAR(std::abs(h[400] - cplx(0.0, s.kappa / R) * 0.5), 0.0, 1e-5);
}

TEST(Kinetic1D, StaticGroundModeResidualIsSecondOrder) {
  double last = 0.0;
  for (int nx : {201, 401}) {
    const auto s = box(nx, 0.0);
    const auto phi = sample_1d(s, [&](double x) { return cplx(box_mode_1d(s, 1, x)); });
    const auto h = apply_h1d(s, phi, 0.0);
    const double e1 = pi * pi / 2.0;
    double res = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) res = std::max(res, std::abs(h[i] - e1 * phi[i]));
    if (last > 0.0) EXPECT_NEAR(last / res, 4.0, 0.1);
    last = res;
  }
}

TEST(EnergyRate1D, ZeroWithoutMotionAndNegativeWhenExpanding) {
  const auto st = box(401, 0.0);
  EXPECT_EQ(energy_rate_1d(st, sample_1d(st, [&](double x) { return cplx(box_mode_1d(st, 1, x)); }), 1.0), 0.0);
  const auto s = box(401);
  EXPECT_LT(energy_rate_1d(s, sample_1d(s, [&](double x) { return cplx(box_mode_1d(s, 1, x)); }), 1.0), 0.0);
}

TEST(EnergyRate1D, MatchesFiniteDifferenceAlongCrankNicolson) {
  EXPECT_LT(rate_mismatch(box(2001), dressed(box(2001), 1), 0.01), 1e-4);
}

TEST(EnergyRate1D, WidthEntersAsHalfWidthFactor) {
  // walls at +-x0/2 move at Rdot x0/2; checked for a wider box
  EXPECT_LT(rate_mismatch(box(2001, 0.1, 2.0), dressed(box(2001, 0.1, 2.0), 1), 0.01), 1e-4);
}

TEST(EnergyRate1D, WarnsWhenWallValueNonzero) {
  const auto s = box(101);
  std::vector<cplx> phi(101, cplx(1.0));
  std::string seen;
  auto old = set_warning_handler([&](std::string_view m) { seen = m; });
  energy_rate_1d(s, phi, 0.0);
  set_warning_handler(old);
  EXPECT_NE(seen.find("walls"), std::string::npos);
}

TEST(Propagate1D, NormConserved) {
  const auto s = box(401);
  auto phi = sample_1d(s, [&](double x) { return cplx(box_mode_1d(s, 1, x) + 0.3 * box_mode_1d(s, 2, x)); });
  const double n0 = inner_1d(s, phi, phi).real();
  phi = propagate_1d(s, phi, 0.0, 3.0, 0.01);
  EXPECT_NEAR(inner_1d(s, phi, phi).real() / n0, 1.0, 3e-8);
}

TEST(Box1DSpec, RejectsSmallGrid) {
  EXPECT_THROW(dilation_matrix_1d(box(10)), std::invalid_argument);
}
