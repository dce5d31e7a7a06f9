#pragma once

// Symmetric dilating 1D box: fixed domain [-x0/2, x0/2], R(t) = 1 + kappa t,
//   H = -hbar^2/(2 mu R^2) d_xx + i hbar (Rdot/R)(1/2 + x d_x).

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "billiard/common.hpp"

namespace billiard {

struct Box1DSpec {
  double mu = 1.0;
  double hbar = 1.0;
  double x0 = 1.0;
  double kappa = 0.1;
  int nx = 1001;

  double R(double t) const { return 1.0 + kappa * t; }
  double R_dot(double /*t*/) const { return kappa; }
  double dx() const { return x0 / (nx - 1); }
  double x(int i) const { return -0.5 * x0 + i * dx(); }

  void validate() const {
    if (nx < 16) throw std::invalid_argument("Box1DSpec: nx must be >= 16");
    if (!(mu > 0.0) || !(hbar > 0.0) || !(x0 > 0.0)) throw std::invalid_argument("Box1DSpec: mu, hbar, x0 must be positive");
  }
  void check_time(double t) const {
    if (!(R(t) > 0.0)) throw DomainError("Box1DSpec: R(t) <= 0 at t = " + std::to_string(t));
  }
};

/// Samples f on the nodes with both ends set to zero.
inline std::vector<cplx> sample_1d(const Box1DSpec& spec, const std::function<cplx(double)>& f) {
  spec.validate();
  std::vector<cplx> v(static_cast<std::size_t>(spec.nx));
  for (int i = 1; i < spec.nx - 1; ++i) v[static_cast<std::size_t>(i)] = f(spec.x(i));
  return v;
}

/// sum conj(a) b dx
inline cplx inner_1d(const Box1DSpec& spec, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * spec.dx();
}

/// Stationary mode n (n = 1 ground) of the width-x0 box.
inline double box_mode_1d(const Box1DSpec& spec, int n, double x) {
  return std::sqrt(2.0 / spec.x0) * std::sin(n * pi * (x / spec.x0 + 0.5));
}

namespace detail {

// (1/2 + x d_x) in the skew form (x_{i+1/2} f_{i+1} - x_{i-1/2} f_{i-1}) / (2 dx):
// real antisymmetric, consistent to O(dx^2).
inline double dilation_upper_1d(const Box1DSpec& spec, int i) { return (spec.x(i) + 0.5 * spec.dx()) / (2.0 * spec.dx()); }

}  // namespace detail

/// Dense matrix of (1/2 + x d_x) on the interior nodes (row-major, (nx-2)^2).
inline std::vector<double> dilation_matrix_1d(const Box1DSpec& spec) {
  spec.validate();
  const int n = spec.nx - 2;
  std::vector<double> m(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  for (int a = 0; a + 1 < n; ++a) {
    const double u = detail::dilation_upper_1d(spec, a + 1);
    m[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(a + 1)] = u;
    m[static_cast<std::size_t>(a + 1) * n + static_cast<std::size_t>(a)] = -u;
  }
  return m;
}

/// Kinetic and/or dilation parts of H applied on the interior.
inline std::vector<cplx> apply_h1d(const Box1DSpec& spec, const std::vector<cplx>& phi, double t, bool kinetic = true,
                                   bool dilation = true) {
  spec.validate();
  spec.check_time(t);
  if (phi.size() != static_cast<std::size_t>(spec.nx)) throw std::invalid_argument("apply_h1d: size mismatch");
  const double R = spec.R(t);
  const double dx = spec.dx();
  const double a = spec.hbar * spec.hbar / (2.0 * spec.mu * R * R);
  const cplx b(0.0, spec.hbar * spec.R_dot(t) / R);
  std::vector<cplx> out(phi.size(), cplx(0.0));
  for (int i = 1; i < spec.nx - 1; ++i) {
    const auto u = static_cast<std::size_t>(i);
    cplx h = 0.0;
    if (kinetic) h += -a * (phi[u + 1] - 2.0 * phi[u] + phi[u - 1]) / (dx * dx);
    if (dilation) {
      const double up = detail::dilation_upper_1d(spec, i);
      const double lo = detail::dilation_upper_1d(spec, i - 1);
      h += b * (up * phi[u + 1] - lo * phi[u - 1]);
    }
    out[u] = h;
  }
  return out;
}

/// <phi| -hbar^2/(2 mu R^2) d_xx |phi> / <phi|phi>
inline double kinetic_energy_1d(const Box1DSpec& spec, const std::vector<cplx>& phi, double t) {
  return inner_1d(spec, phi, apply_h1d(spec, phi, t, true, false)).real() / inner_1d(spec, phi, phi).real();
}

/// Two-wall contact rate for walls at +-R x0/2 moving with speed Rdot x0/2:
///   dE/dt = -hbar^2 Rdot / (2 mu R^3) (x0/2) [|phi'(x0/2)|^2 + |phi'(-x0/2)|^2]
/// with one-sided 4th-order wall derivatives. phi is taken as normalized.
inline double energy_rate_1d(const Box1DSpec& spec, const std::vector<cplx>& phi, double t) {
  spec.validate();
  spec.check_time(t);
  const std::size_t n = phi.size();
  if (n != static_cast<std::size_t>(spec.nx)) throw std::invalid_argument("energy_rate_1d: size mismatch");
  const double worst = std::max(std::abs(phi.front()), std::abs(phi.back()));
  if (worst > 1e-8) warn("energy_rate_1d: state does not vanish at the walls (|phi| = " + std::to_string(worst) + ")");
  const double dx = spec.dx();
  const cplx left = (-25.0 * phi[0] + 48.0 * phi[1] - 36.0 * phi[2] + 16.0 * phi[3] - 3.0 * phi[4]) / (12.0 * dx);
  const cplx right =
      (25.0 * phi[n - 1] - 48.0 * phi[n - 2] + 36.0 * phi[n - 3] - 16.0 * phi[n - 4] + 3.0 * phi[n - 5]) / (12.0 * dx);
  const double R = spec.R(t);
  return -spec.hbar * spec.hbar * spec.R_dot(t) / (2.0 * spec.mu * R * R * R) * (0.5 * spec.x0) *
         (std::norm(left) + std::norm(right));
}

/// Midpoint Crank-Nicolson from t0 to t1; observer(t, phi) after each step.
inline std::vector<cplx> propagate_1d(const Box1DSpec& spec, std::vector<cplx> phi, double t0, double t1, double dt,
                                      const std::function<void(double, const std::vector<cplx>&)>& observer = {}) {
  spec.validate();
  if (!(dt > 0.0) || t1 < t0) throw std::invalid_argument("propagate_1d: bad time arguments");
  const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  const int n = spec.nx;
  const double dx = spec.dx();
  std::vector<cplx> lo(static_cast<std::size_t>(n)), di(static_cast<std::size_t>(n)), up(static_cast<std::size_t>(n));
  std::vector<cplx> rhs(static_cast<std::size_t>(n)), cp(static_cast<std::size_t>(n)), dp(static_cast<std::size_t>(n));
  for (long s = 0; s < steps; ++s) {
    const double tm = t0 + h * (static_cast<double>(s) + 0.5);
    spec.check_time(tm);
    const double R = spec.R(tm);
    const double a = spec.hbar * spec.hbar / (2.0 * spec.mu * R * R);
    const double b = spec.hbar * spec.R_dot(tm) / R;
    const cplx it(0.0, h / (2.0 * spec.hbar));
    for (int i = 1; i < n - 1; ++i) {
      const auto u = static_cast<std::size_t>(i);
      lo[u] = -a / (dx * dx) - cplx(0.0, b) * detail::dilation_upper_1d(spec, i - 1);
      di[u] = 2.0 * a / (dx * dx);
      up[u] = -a / (dx * dx) + cplx(0.0, b) * detail::dilation_upper_1d(spec, i);
    }
    for (int i = 1; i < n - 1; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const cplx hphi = lo[u] * phi[u - 1] + di[u] * phi[u] + up[u] * phi[u + 1];
      rhs[u] = phi[u] - it * hphi;
    }
    for (int i = 1; i < n - 1; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const cplx A = i > 1 ? it * lo[u] : cplx(0.0);
      const cplx B = 1.0 + it * di[u];
      const cplx C = i < n - 2 ? it * up[u] : cplx(0.0);
      if (i == 1) {
        cp[u] = C / B;
        dp[u] = rhs[u] / B;
      } else {
        const cplx den = B - A * cp[u - 1];
        cp[u] = C / den;
        dp[u] = (rhs[u] - A * dp[u - 1]) / den;
      }
    }
    for (int i = n - 2; i >= 1; --i) {
      const auto u = static_cast<std::size_t>(i);
      phi[u] = i == n - 2 ? dp[u] : dp[u] - cp[u] * phi[u + 1];
    }
    phi.front() = 0.0;
    phi.back() = 0.0;
    if (observer) observer(t0 + h * static_cast<double>(s + 1), phi);
  }
  return phi;
}

}  // namespace billiard
