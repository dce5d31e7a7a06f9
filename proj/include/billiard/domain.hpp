#pragma once

// Moving star-shaped boundary R(theta, t) and the unitary map between the
// moving domain r <= R r0 and the fixed disk r <= r0.

#include <cmath>
#include <functional>
#include <string>

#include "billiard/common.hpp"
#include "billiard/specfun.hpp"

namespace billiard {

/// Deformation schedule g(t) with g(0) = 0, nondecreasing, g -> 1.
struct DeformationSchedule {
  std::function<double(double)> g;
  std::function<double(double)> g_dot;

  /// g(t) = 1 - exp(-gamma t).
  static DeformationSchedule exponential(double gamma) {
    return {[gamma](double t) { return -std::expm1(-gamma * t); },
            [gamma](double t) { return gamma * std::exp(-gamma * t); }};
  }
};

/// Physical parameters of the dilating, deforming box.
///
/// The boundary is R(theta, t) = lambda(t) / (1 - epsilon g(t) cos theta) with
/// lambda(t) = 1 + kappa t, scaled onto the fixed disk of radius r0.
struct DomainSpec {
  double mu = 1.0;
  double hbar = 1.0;
  double r0 = 1.0;
  double kappa = 0.1;
  double gamma = 0.5;
  double epsilon = 0.05;
  /// Empty means the exponential schedule with rate gamma.
  DeformationSchedule schedule{};

  double lambda(double t) const { return 1.0 + kappa * t; }
  double lambda_dot(double /*t*/) const { return kappa; }
  double g(double t) const { return schedule.g ? schedule.g(t) : -std::expm1(-gamma * t); }
  double g_dot(double t) const { return schedule.g_dot ? schedule.g_dot(t) : gamma * std::exp(-gamma * t); }

  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("DomainSpec: mu must be positive");
    if (!(hbar > 0.0)) throw std::invalid_argument("DomainSpec: hbar must be positive");
    if (!(r0 > 0.0)) throw std::invalid_argument("DomainSpec: r0 must be positive");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("DomainSpec: epsilon must be >= 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("DomainSpec: gamma must be >= 0");
  }
};

inline BesselMode mode_make(int m, int n, const DomainSpec& spec, int radial_order = default_radial_order) {
  return mode_make(m, n, spec.r0, spec.hbar, spec.mu, radial_order);
}

inline ModeSet make_mode_set(int m_max, int n_max, const DomainSpec& spec,
                             int radial_order = default_radial_order) {
  return make_mode_set(m_max, n_max, spec.r0, spec.hbar, spec.mu, radial_order);
}

/// Exact boundary lambda(t) / (1 - epsilon g(t) cos theta).
inline double radius(const DomainSpec& spec, double theta, double t) {
  const double lam = spec.lambda(t);
  if (!(lam > 0.0)) throw DomainError("radius: lambda(t) <= 0 at t = " + std::to_string(t));
  const double den = 1.0 - spec.epsilon * spec.g(t) * std::cos(theta);
  if (!(den > 0.0)) {
    throw DomainError("radius: domain is not star-shaped (1 - eps g cos theta <= 0) at t = " +
                      std::to_string(t));
  }
  return lam / den;
}

/// First-order form lambda(t) (1 + epsilon g(t) cos theta); perturbative use only.
inline double radius_linearized(const DomainSpec& spec, double theta, double t) {
  return spec.lambda(t) * (1.0 + spec.epsilon * spec.g(t) * std::cos(theta));
}

/// R and the derivatives the transformed Hamiltonian needs.
struct BoundaryPoint {
  double R = 1.0;
  double R_theta = 0.0;
  double R_thetatheta = 0.0;
  double R_t = 0.0;

  double inv() const { return 1.0 / R; }
  /// d(1/R)/dtheta
  double inv_theta() const { return -R_theta / (R * R); }
  /// d^2(1/R)/dtheta^2
  double inv_thetatheta() const { return -R_thetatheta / (R * R) + 2.0 * R_theta * R_theta / (R * R * R); }
};

/// Boundary R(theta, t) of the moving domain relative to the fixed disk.
struct BoundaryFunction {
  std::function<BoundaryPoint(double theta, double t)> eval;
  bool pantographic = false;

  BoundaryPoint operator()(double theta, double t) const { return eval(theta, t); }
};

/// R(t) = lambda(t); shape preserving.
inline BoundaryFunction pantographic_boundary(const DomainSpec& spec) {
  return {[spec](double /*theta*/, double t) {
            return BoundaryPoint{spec.lambda(t), 0.0, 0.0, spec.lambda_dot(t)};
          },
          true};
}

/// Constant R; the static or instantaneous-frame case.
inline BoundaryFunction constant_boundary(double R) {
  return {[R](double, double) { return BoundaryPoint{R, 0.0, 0.0, 0.0}; }, true};
}

/// The circle-to-ellipse boundary lambda / (1 - eps g cos theta), exact.
inline BoundaryFunction ellipse_boundary(const DomainSpec& spec) {
  if (spec.epsilon == 0.0) return pantographic_boundary(spec);
  return {[spec](double theta, double t) {
            // 1/R = (1 - eps g cos) / lambda is linear in cos theta
            const double lam = spec.lambda(t);
            const double eg = spec.epsilon * spec.g(t);
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            const double den = 1.0 - eg * c;
            if (!(den > 0.0)) throw DomainError("ellipse_boundary: domain is not star-shaped");
            BoundaryPoint p;
            p.R = lam / den;
            p.R_theta = -lam * eg * s / (den * den);
            p.R_thetatheta = -lam * eg * c / (den * den) + 2.0 * lam * eg * eg * s * s / (den * den * den);
            const double egdot = spec.epsilon * spec.g_dot(t);
            p.R_t = spec.lambda_dot(t) / den + lam * egdot * c / (den * den);
            return p;
          },
          false};
}

/// Star-domain check on a 720-point theta grid over [0, t_end] and the
/// small-deformation flag eps lambda sup f > 0.2.
inline void check_star(const DomainSpec& spec, double t_end, int time_samples = 200) {
  bool flagged = false;
  for (int it = 0; it <= time_samples; ++it) {
    const double t = t_end * it / time_samples;
    for (int l = 0; l < 720; ++l) {
      const double th = two_pi * l / 720;
      if (!(radius(spec, th, t) > 0.0)) throw DomainError("check_star: nonpositive radius");
    }
    if (!flagged && spec.epsilon * spec.lambda(t) * spec.g(t) > 0.2) {
      warn("epsilon * lambda(t) * sup f = " + std::to_string(spec.epsilon * spec.lambda(t) * spec.g(t)) +
           " exceeds 0.2 at t = " + std::to_string(t) + "; deformation is no longer small");
      flagged = true;
    }
  }
}

/// Wavefunction given as a point evaluator (r, theta) -> value.
using Sampler = std::function<cplx(double r, double theta)>;

/// phi(s, theta) = R psi(s R, theta): moving picture to fixed disk.
inline Sampler to_fixed(Sampler psi, BoundaryFunction boundary, double t) {
  return [psi = std::move(psi), boundary = std::move(boundary), t](double s, double theta) {
    const double R = boundary(theta, t).R;
    return R * psi(s * R, theta);
  };
}

/// psi(r, theta) = phi(r / R, theta) / R: fixed disk to moving picture.
inline Sampler to_moving(Sampler phi, BoundaryFunction boundary, double t) {
  return [phi = std::move(phi), boundary = std::move(boundary), t](double r, double theta) {
    const double R = boundary(theta, t).R;
    return phi(r / R, theta) / R;
  };
}

/// Inner product over the moving domain r <= R(theta, t) r0, by Gauss-Legendre
/// in r on [0, R r0] for every theta node.
inline cplx moving_inner(const Sampler& a, const Sampler& b, const BoundaryFunction& boundary, double t, double r0,
                         int radial_order = default_radial_order, int ntheta = 64) {
  const auto ref = gauss_legendre(radial_order, 0.0, 1.0);
  cplx sum = 0.0;
  for (int l = 0; l < ntheta; ++l) {
    const double th = two_pi * l / ntheta;
    const double rmax = boundary(th, t).R * r0;
    cplx ring = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double r = ref.nodes[i] * rmax;
      ring += ref.weights[i] * rmax * r * std::conj(a(r, th)) * b(r, th);
    }
    sum += ring;
  }
  return sum * (two_pi / ntheta);
}

}  // namespace billiard
