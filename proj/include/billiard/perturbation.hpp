#pragma once

// First-order time-dependent perturbation theory for the circle -> ellipse
// deformation f(theta, t) = g(t) cos theta on top of uniform dilation.
//
// Matrix elements of the first-order effective Hamiltonian between co-moving
// pantographic solutions factor into time integrals F(1..5) and radial
// integrals W(1..4); the angular integral gives the selection rule |m - m'| = 1.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "billiard/common.hpp"
#include "billiard/domain.hpp"
#include "billiard/pantograph.hpp"
#include "billiard/specfun.hpp"

namespace billiard {

/// Transition source sigma' = (m', n') -> target sigma = (m, n).
struct ModePair {
  BesselMode source;
  BesselMode target;

  bool allowed() const { return std::abs(target.m - source.m) == 1; }
  /// delta_{m, m'+1}
  bool raises() const { return target.m == source.m + 1; }
  /// delta_{m, m'-1}
  bool lowers() const { return target.m == source.m - 1; }
};

/// xi(t) = beta_{sigma'}(t) - beta_sigma(t) with beta0 = 0.
inline double xi(const ModePair& pair, const DomainSpec& spec, double t) {
  return (pair.target.energy - pair.source.energy) * t / (spec.hbar * spec.lambda(t));
}

/// Radial integrals W(k), k = 1..4, target J_m(k r) against source J_m'(k' r):
///   W1 = A A' int J (1/r + d/dr) J' dr        W2 = A A' int r J J' dr
///   W3 = A A' int r^3 J J' dr                 W4 = A A' int r^2 J dJ'/dr dr
/// Radial orders are |m|. W1 diverges only when both orders are zero (a pair the
/// selection rule discards); that case returns +infinity.
inline double w_integral(int k, const ModePair& pair, int radial_order = default_radial_order) {
  if (k < 1 || k > 4) throw std::invalid_argument("w_integral: k must be 1..4");
  const auto& tg = pair.target;
  const auto& src = pair.source;
  if (std::abs(tg.r0 - src.r0) > 1e-14 * tg.r0) throw std::invalid_argument("w_integral: modes built over different r0");
  const double r0 = tg.r0;
  if (k == 1 && tg.order() == 0 && src.order() == 0) return std::numeric_limits<double>::infinity();
  const auto rule = gauss_legendre(radial_order, 0.0, r0);
  const double small = 1e-3 * r0;
  return rule.integrate([&](double r) {
    const auto a = mode_radial(tg, r);
    const auto b = mode_radial(src, r);
    switch (k) {
      case 1: {
        double over_r;
        if (r < small) {
          // leading series of A A' J_p(kr) J_q(k'r) / r; p + q >= 1 here
          const int p = tg.order();
          const int q = src.order();
          double lead = tg.norm * src.norm;
          for (int i = 1; i <= p; ++i) lead *= 0.5 * tg.k / i;
          for (int i = 1; i <= q; ++i) lead *= 0.5 * src.k / i;
          const double correction =
              1.0 - 0.25 * r * r * (tg.k * tg.k / (p + 1) + src.k * src.k / (q + 1));
          over_r = lead * std::pow(r, p + q - 1) * correction;
        } else {
          over_r = a.j * b.j / r;
        }
        return over_r + a.j * b.dj;
      }
      case 2:
        return r * a.j * b.j;
      case 3:
        return r * r * r * a.j * b.j;
      default:
        return r * r * a.j * b.dj;
    }
  });
}

inline std::array<double, 4> w_integrals(const ModePair& pair, int radial_order = default_radial_order) {
  return {w_integral(1, pair, radial_order), w_integral(2, pair, radial_order), w_integral(3, pair, radial_order),
          w_integral(4, pair, radial_order)};
}

/// The five time integrals F(1..5) for one pair, indexed 0..4.
using FValues = std::array<cplx, 5>;

struct TimeQuadratureOptions {
  double abs_tol = 1e-10;
  /// Phase advance allowed across one initial panel.
  double max_phase_per_panel = pi / 4.0;
  int max_depth = 30;
};

namespace detail {

// Integrands of F(1..5) without the exp(i xi) factor:
//   hbar^2/(2mu) g/lambda^2,  i hbar g lambdadot/lambda,  -mu g lambdadot^2,
//   (i hbar/2) gdot,          -(mu/2) gdot lambda lambdadot
inline FValues f_integrands(const ModePair& pair, const DomainSpec& spec, double s) {
  const double lam = spec.lambda(s);
  const double lamd = spec.lambda_dot(s);
  const double g = spec.g(s);
  const double gd = spec.g_dot(s);
  const cplx ph = std::polar(1.0, xi(pair, spec, s));
  const double hb = spec.hbar;
  const double mu = spec.mu;
  return {ph * (hb * hb / (2.0 * mu) * g / (lam * lam)), ph * cplx(0.0, hb * g * lamd / lam),
          ph * (-mu * g * lamd * lamd), ph * cplx(0.0, 0.5 * hb * gd), ph * (-0.5 * mu * gd * lam * lamd)};
}

inline FValues gauss_panel(const ModePair& pair, const DomainSpec& spec, double a, double b, int order) {
  const auto rule = gauss_legendre(order, a, b);
  FValues sum{};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto f = f_integrands(pair, spec, rule.nodes[i]);
    for (std::size_t c = 0; c < 5; ++c) sum[c] += rule.weights[i] * f[c];
  }
  return sum;
}

inline void adaptive_panel(const ModePair& pair, const DomainSpec& spec, double a, double b, double tol, int depth,
                           const TimeQuadratureOptions& opt, FValues& acc) {
  const auto coarse = gauss_panel(pair, spec, a, b, 10);
  const auto fine = gauss_panel(pair, spec, a, b, 20);
  double err = 0.0;
  for (std::size_t c = 0; c < 5; ++c) err = std::max(err, std::abs(fine[c] - coarse[c]));
  if (err <= tol || depth >= opt.max_depth) {
    for (std::size_t c = 0; c < 5; ++c) acc[c] += fine[c];
    return;
  }
  const double mid = 0.5 * (a + b);
  adaptive_panel(pair, spec, a, mid, 0.5 * tol, depth + 1, opt, acc);
  adaptive_panel(pair, spec, mid, b, 0.5 * tol, depth + 1, opt, acc);
}

// Initial panel width at s so that |d xi| <= max_phase; xi' decreases in s.
inline double phase_panel_width(const ModePair& pair, const DomainSpec& spec, double s, double max_phase) {
  const double lam = spec.lambda(s);
  const double rate = std::abs(pair.target.energy - pair.source.energy) / (spec.hbar * lam * lam);
  return rate > 0.0 ? max_phase / rate : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// F(1..5) integrated over [a, b].
inline FValues f_integrals_interval(const ModePair& pair, const DomainSpec& spec, double a, double b,
                                    const TimeQuadratureOptions& opt = {}, double total_span = 0.0) {
  FValues acc{};
  if (!(b > a)) return acc;
  const double span = total_span > 0.0 ? total_span : b - a;
  double s = a;
  while (s < b) {
    double h = detail::phase_panel_width(pair, spec, s, opt.max_phase_per_panel);
    // g varies on 1/gamma; keep panels resolving it too
    if (spec.gamma > 0.0) h = std::min(h, 2.0 / spec.gamma);
    const double e = std::min(b, s + h);
    detail::adaptive_panel(pair, spec, s, e, opt.abs_tol * (e - s) / span, 0, opt, acc);
    s = e;
  }
  return acc;
}

/// F(k)(t), k = 1..5.
inline cplx f_integral(int k, const ModePair& pair, const DomainSpec& spec, double t,
                       const TimeQuadratureOptions& opt = {}) {
  if (k < 1 || k > 5) throw std::invalid_argument("f_integral: k must be 1..5");
  return f_integrals_interval(pair, spec, 0.0, t, opt)[static_cast<std::size_t>(k - 1)];
}

/// Cumulative F(1..5) at every point of an increasing time grid starting at >= 0.
inline std::vector<FValues> f_integrals_on_grid(const ModePair& pair, const DomainSpec& spec,
                                                const std::vector<double>& times,
                                                const TimeQuadratureOptions& opt = {}) {
  std::vector<FValues> out(times.size());
  if (times.empty()) return out;
  const double span = std::max(times.back(), 1e-300);
  FValues acc = f_integrals_interval(pair, spec, 0.0, times.front(), opt, span);
  out[0] = acc;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("f_integrals_on_grid: times must increase");
    const auto inc = f_integrals_interval(pair, spec, times[i - 1], times[i], opt, span);
    for (std::size_t c = 0; c < 5; ++c) acc[c] += inc[c];
    out[i] = acc;
  }
  return out;
}

/// Which coefficient set to use when assembling the time-integrated element.
///
/// `derived` follows from sandwiching the first-order operator between the
/// dressed pantographic solutions and agrees with direct quadrature.
/// `as_printed` is the alternative coefficient set (2 F2 W2, F3 W3, 2 F2 W4
/// in h1; F4 W1 in h2; + (F1 W1 + F2 W2) in h3) and is kept for comparison only.
enum class ElementForm { derived, as_printed };

struct ElementBreakdown {
  cplx h1;
  cplx h2;
  cplx h3;
  FValues fvals{};
  std::array<double, 4> wvals{};

  cplx total() const { return h1 + h2 + h3; }
};

/// Angular factors of the three operators: (delta+ + delta-) for H1, H2 and
/// (1/2 + m') delta+ + (1/2 - m') delta- for H3.
inline double angular_factor_h12(const ModePair& pair) {
  return (pair.raises() ? 1.0 : 0.0) + (pair.lowers() ? 1.0 : 0.0);
}

inline double angular_factor_h3(const ModePair& pair) {
  const double mp = pair.source.m;
  return (pair.raises() ? 0.5 + mp : 0.0) + (pair.lowers() ? 0.5 - mp : 0.0);
}

/// Combines precomputed F and W values into the three contributions.
inline ElementBreakdown assemble_element(const ModePair& pair, const DomainSpec& spec, const FValues& f,
                                         const std::array<double, 4>& w, ElementForm form = ElementForm::derived) {
  ElementBreakdown e;
  e.fvals = f;
  e.wvals = w;
  if (!pair.allowed()) return e;
  const double eps = spec.epsilon;
  const double c12 = angular_factor_h12(pair);
  const double c3 = angular_factor_h3(pair);
  const double k2 = pair.source.k * pair.source.k;
  const auto& [F1, F2, F3, F4, F5] = f;
  const auto& [W1, W2, W3, W4] = w;
  if (form == ElementForm::derived) {
    e.h1 = eps * c12 * (F2 * W2 + 0.5 * F3 * W3 + F2 * W4 - k2 * F1 * W2);
    e.h2 = eps * c12 * (F4 * W2 + F5 * W3 + F4 * W4);
    e.h3 = -eps * c3 * (F1 * W1 + 0.5 * F2 * W2);
  } else {
    e.h1 = eps * c12 * (2.0 * F2 * W2 + F3 * W3 + 2.0 * F2 * W4 - k2 * F1 * W2);
    e.h2 = eps * c12 * (F4 * W1 + F5 * W3 + F4 * W4);
    e.h3 = eps * c3 * (F1 * W1 + F2 * W2);
  }
  return e;
}

/// int_0^t <phi_sigma(s)| H_eff^(1)(s) |phi_sigma'(s)> ds, split by operator.
inline ElementBreakdown element(const ModePair& pair, const DomainSpec& spec, double t,
                                ElementForm form = ElementForm::derived, const TimeQuadratureOptions& opt = {},
                                int radial_order = default_radial_order) {
  if (!pair.allowed()) return {};
  return assemble_element(pair, spec, f_integrals_interval(pair, spec, 0.0, t, opt), w_integrals(pair, radial_order),
                          form);
}

/// First-order amplitudes a_sigma(t) on a time grid for a set of targets.
struct AmplitudeTable {
  std::vector<double> times;
  BesselMode initial;
  std::vector<BesselMode> targets;
  /// amplitudes[target][time]
  std::vector<std::vector<cplx>> amplitudes;
  /// Largest sum over non-initial targets of |a|^2.
  double max_leakage = 0.0;
  bool perturbative = true;

  std::vector<double> populations(std::size_t target) const {
    std::vector<double> p;
    p.reserve(times.size());
    for (const auto& a : amplitudes.at(target)) p.push_back(std::norm(a));
    return p;
  }

  std::size_t index_of(int m, int n) const {
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (targets[i].m == m && targets[i].n == n) return i;
    throw std::out_of_range("AmplitudeTable: no target (" + std::to_string(m) + "," + std::to_string(n) + ")");
  }
};

struct AmplitudeOptions {
  ElementForm form = ElementForm::derived;
  TimeQuadratureOptions time{};
  int radial_order = default_radial_order;
  /// Leakage above which the run is flagged as outside the first-order regime.
  double leakage_limit = 0.25;
};

/// a_sigma(t) = delta_{sigma, initial} - (i / hbar) int_0^t <phi_sigma|H^(1)|phi_initial> ds.
inline AmplitudeTable amplitudes(const BesselMode& initial, const std::vector<BesselMode>& targets,
                                 const DomainSpec& spec, const std::vector<double>& times,
                                 const AmplitudeOptions& opt = {}) {
  spec.validate();
  AmplitudeTable table;
  table.times = times;
  table.initial = initial;
  table.targets = targets;
  table.amplitudes.assign(targets.size(), std::vector<cplx>(times.size(), cplx(0.0)));
  parallel_for(targets.size(), [&](std::size_t i) {
    const auto& tg = targets[i];
    auto& row = table.amplitudes[i];
    const cplx diag = tg.same_index(initial) ? cplx(1.0) : cplx(0.0);
    const ModePair pair{initial, tg};
    if (!pair.allowed() || spec.epsilon == 0.0) {
      std::fill(row.begin(), row.end(), diag);
      return;
    }
    const auto w = w_integrals(pair, opt.radial_order);
    const auto f = f_integrals_on_grid(pair, spec, times, opt.time);
    for (std::size_t it = 0; it < times.size(); ++it) {
      const auto e = assemble_element(pair, spec, f[it], w, opt.form);
      row[it] = diag - cplx(0.0, 1.0 / spec.hbar) * e.total();
    }
  });
  for (std::size_t it = 0; it < times.size(); ++it) {
    double leak = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (!targets[i].same_index(initial)) leak += std::norm(table.amplitudes[i][it]);
    table.max_leakage = std::max(table.max_leakage, leak);
  }
  if (table.max_leakage > opt.leakage_limit) {
    table.perturbative = false;
    warn("amplitudes: transferred population " + std::to_string(table.max_leakage) +
         " exceeds the first-order limit " + std::to_string(opt.leakage_limit));
  }
  return table;
}

/// Uniform grid of count points on [0, t_end].
inline std::vector<double> uniform_times(double t_end, int count) {
  if (count < 2) throw std::invalid_argument("uniform_times: need at least two samples");
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = t_end * i / (count - 1);
  return t;
}

}  // namespace billiard
