#pragma once

// Exact dynamics for shape-preserving wall motion R(t) = 1 + kappa t.
//
// In the fixed-disk picture the solutions are
//   phi_n(r, theta, t) = exp(i (alpha(t) r^2 + beta_n(t))) chi_n(r, theta)
// and in the moving picture
//   psi_n(r, theta, t) = R^{-1} exp(i beta_n + i alpha (r/R)^2) chi_n(r/R, theta).

#include <cmath>
#include <complex>
#include <vector>

#include "billiard/common.hpp"
#include "billiard/domain.hpp"
#include "billiard/specfun.hpp"

namespace billiard {

/// alpha(t) = mu R Rdot / (2 hbar); the same for every mode.
inline double alpha(const DomainSpec& spec, double t) {
  return spec.mu * spec.lambda(t) * spec.lambda_dot(t) / (2.0 * spec.hbar);
}

/// beta_n(t) = beta0 - (E_n / hbar) t / (1 + kappa t), the closed antiderivative
/// of E_n / (hbar R^2) for uniform motion.
inline double beta(const BesselMode& mode, const DomainSpec& spec, double t, double beta0 = 0.0) {
  const double lam = spec.lambda(t);
  if (!(lam > 0.0)) throw DomainError("beta: R(t) <= 0");
  return beta0 - mode.energy * t / (spec.hbar * lam);
}

/// Fixed-picture exact solution for mode n.
inline cplx phi_exact(const BesselMode& mode, const DomainSpec& spec, double r, double theta, double t,
                      double beta0 = 0.0) {
  const double phase = alpha(spec, t) * r * r + beta(mode, spec, t, beta0);
  return std::polar(1.0, phase) * eigenmode_value(mode, r, theta);
}

/// Moving-picture exact solution, defined on r <= R(t) r0.
inline cplx psi_exact(const BesselMode& mode, const DomainSpec& spec, double r, double theta, double t,
                      double beta0 = 0.0) {
  const double R = spec.lambda(t);
  const double s = r / R;
  const double phase = beta(mode, spec, t, beta0) + alpha(spec, t) * s * s;
  return std::polar(1.0 / R, phase) * eigenmode_value(mode, s, theta);
}

/// Value and gradient components of a fixed-picture wavefunction at a point.
struct FieldPoint {
  cplx value;
  cplx d_r;
  cplx d_theta;

  /// |grad|^2 = |d_r|^2 + |d_theta|^2 / r^2
  double grad_norm2(double r) const {
    const double rad = std::norm(d_r);
    return r > 0.0 ? rad + std::norm(d_theta) / (r * r) : rad;
  }
};

/// Superposition of exact pantographic solutions with constant amplitudes.
struct PantographicState {
  std::vector<BesselMode> modes;
  std::vector<cplx> amplitudes;
  std::vector<double> beta0;  // beta_n(0); zero by convention
  double time = 0.0;

  static PantographicState single(const BesselMode& mode) { return {{mode}, {cplx(1.0)}, {0.0}, 0.0}; }

  PantographicState& add(const BesselMode& mode, cplx amplitude) {
    modes.push_back(mode);
    amplitudes.push_back(amplitude);
    beta0.push_back(0.0);
    return *this;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
  }

  PantographicState& normalize() {
    const double n = std::sqrt(norm2());
    if (!(n > 0.0)) throw std::invalid_argument("PantographicState: zero state");
    for (auto& a : amplitudes) a /= n;
    return *this;
  }

  PantographicState at(double t) const {
    PantographicState s = *this;
    s.time = t;
    return s;
  }

  /// Fixed-picture value and analytic gradient at (r, theta, time).
  FieldPoint field(const DomainSpec& spec, double r, double theta) const {
    const double a = alpha(spec, time);
    cplx sum = 0.0;
    cplx dsum = 0.0;
    cplx tsum = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto& mode = modes[k];
      const auto rad = mode_radial(mode, r);
      const cplx w = amplitudes[k] * std::polar(1.0 / std::sqrt(two_pi), beta(mode, spec, time, beta0[k]) +
                                                                          mode.m * theta);
      sum += w * rad.j;
      dsum += w * rad.dj;
      tsum += w * cplx(0.0, mode.m) * rad.j;
    }
    const cplx dress = std::polar(1.0, a * r * r);
    return {dress * sum, dress * (cplx(0.0, 2.0 * a * r) * sum + dsum), dress * tsum};
  }

  cplx value(const DomainSpec& spec, double r, double theta) const { return field(spec, r, theta).value; }

  Sampler sampler(const DomainSpec& spec) const {
    return [state = *this, spec](double r, double theta) { return state.value(spec, r, theta); };
  }

  int max_abs_m() const {
    int mm = 0;
    for (const auto& mode : modes) mm = std::max(mm, std::abs(mode.m));
    return mm;
  }
};

/// Point evaluator returning value and gradient.
using GradientSampler = std::function<FieldPoint(double r, double theta)>;

/// Contact-term energy rate
///   dE/dt = -hbar^2 Rdot / (2 mu R^3) int_0^{2 pi} dtheta (r^2 |grad phi|^2)|_{r = r0},
/// with the measure dtheta and the gradient supplied analytically.
inline double energy_rate(const GradientSampler& state, const DomainSpec& spec, double t, int ntheta = 64) {
  const double R = spec.lambda(t);
  const double Rdot = spec.lambda_dot(t);
  const double r0 = spec.r0;
  double boundary = 0.0;
  double worst = 0.0;
  for (int l = 0; l < ntheta; ++l) {
    const double th = two_pi * l / ntheta;
    const auto p = state(r0, th);
    worst = std::max(worst, std::abs(p.value));
    boundary += r0 * r0 * p.grad_norm2(r0);
  }
  if (worst > 1e-8) warn("energy_rate: state does not vanish on the boundary (|phi| = " + std::to_string(worst) + ")");
  boundary *= two_pi / ntheta;
  return -spec.hbar * spec.hbar * Rdot / (2.0 * spec.mu * R * R * R) * boundary;
}

inline double energy_rate(const PantographicState& state, const DomainSpec& spec, double t) {
  const auto s = state.at(t);
  const int ntheta = std::max(16, 4 * s.max_abs_m() + 8);
  return energy_rate([&](double r, double th) { return s.field(spec, r, th); }, spec, t, ntheta);
}

/// <phi| -hbar^2/(2 mu R^2) laplacian |phi> = hbar^2/(2 mu R^2) int |grad phi|^2 (by parts).
inline double mean_energy(const GradientSampler& state, const DomainSpec& spec, double t,
                          int radial_order = default_radial_order, int ntheta = 64) {
  const double R = spec.lambda(t);
  const DiskQuadrature quad(spec.r0, radial_order, ntheta);
  const double grad2 = quad.integrate([&](double r, double th) { return state(r, th).grad_norm2(r); });
  return spec.hbar * spec.hbar / (2.0 * spec.mu * R * R) * grad2;
}

inline double mean_energy(const PantographicState& state, const DomainSpec& spec, double t,
                          int radial_order = default_radial_order) {
  const auto s = state.at(t);
  const int ntheta = std::max(16, 4 * s.max_abs_m() + 8);
  return mean_energy([&](double r, double th) { return s.field(spec, r, th); }, spec, t, radial_order, ntheta);
}

}  // namespace billiard
