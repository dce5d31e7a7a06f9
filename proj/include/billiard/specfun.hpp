#pragma once

// Bessel functions of integer order, their positive zeros, disk eigenmodes
// and Gauss-Legendre rules. Everything here is a pure function of its inputs.

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "billiard/common.hpp"

namespace billiard {

namespace detail {

// Power series sum_k (-1)^k (x/2)^{2k+m} / (k! (k+m)!). Only used for small x
// where the alternating terms do not cancel.
inline double bessel_j_series(int m, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= m; ++i) term *= half / i;
  double sum = term;
  const double q = -half * half;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + m));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// J_0(x) ... J_{mmax}(x) for x >= 0.
///
/// Small arguments use the power series; otherwise Miller's downward
/// recurrence normalized with J_0 + 2 sum_k J_{2k} = 1.
inline std::vector<double> bessel_j_all(int mmax, double x) {
  if (mmax < 0) throw std::invalid_argument("bessel_j_all: negative order");
  if (!(x >= 0.0)) throw std::invalid_argument("bessel_j: negative argument");
  std::vector<double> out(static_cast<std::size_t>(mmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (x <= 1.0) {
    for (int m = 0; m <= mmax; ++m) out[static_cast<std::size_t>(m)] = detail::bessel_j_series(m, x);
    return out;
  }
  const int top = std::max(mmax, static_cast<int>(x));
  int start = top + static_cast<int>(std::sqrt(160.0 * top)) + 20;
  start += start % 2;  // even, so the normalization sum lines up
  const double two_over_x = 2.0 / x;
  double jp1 = 0.0;
  double j = 1e-300;
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm1 = k * two_over_x * j - jp1;
    jp1 = j;
    j = jm1;
    // k-1 is the order of j now
    if (k - 1 <= mmax) out[static_cast<std::size_t>(k - 1)] = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      for (auto& v : out) v *= 1e-250;
    }
  }
  norm += j;
  for (auto& v : out) v /= norm;
  return out;
}

/// J_m(x), m >= 0, x >= 0.
inline double bessel_j(int m, double x) {
  if (m < 0) throw std::invalid_argument("bessel_j: negative order; use J_{-m} = (-1)^m J_m");
  if (!(x >= 0.0)) throw std::invalid_argument("bessel_j: negative argument");
  if (x <= 1.0) return x == 0.0 ? (m == 0 ? 1.0 : 0.0) : detail::bessel_j_series(m, x);
  return bessel_j_all(m + 1, x)[static_cast<std::size_t>(m)];
}

/// dJ_m/dx.
inline double bessel_jp(int m, double x) {
  if (m == 0) return -bessel_j(1, x);
  const auto j = bessel_j_all(m + 1, x);
  return 0.5 * (j[static_cast<std::size_t>(m - 1)] - j[static_cast<std::size_t>(m + 1)]);
}

/// J_m, J_m' and J_m'' at one point (J'' from Bessel's equation).
struct BesselTriple {
  double j = 0.0;
  double dj = 0.0;
  double d2j = 0.0;
};

inline BesselTriple bessel_j_triple(int m, double x) {
  const auto j = bessel_j_all(m + 1, x);
  BesselTriple out;
  const auto um = static_cast<std::size_t>(m);
  out.j = j[um];
  out.dj = m == 0 ? -j[1] : 0.5 * (j[um - 1] - j[um + 1]);
  if (x == 0.0) {
    // J'' (0): 1/2 for m = 2, -1/2 for m = 0, 0 otherwise
    out.d2j = m == 0 ? -0.5 : (m == 2 ? 0.5 : 0.0);
  } else {
    out.d2j = -out.dj / x - (1.0 - static_cast<double>(m * m) / (x * x)) * out.j;
  }
  return out;
}

namespace detail {

inline double mcmahon_zero(int m, int n) {
  const double mu = 4.0 * m * m;
  const double b = (n + 0.5 * m - 0.25) * pi;
  return b - (mu - 1.0) / (8.0 * b) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * std::pow(8.0 * b, 3));
}

inline double refine_zero(int m, double lo, double hi) {
  double flo = bessel_j(m, lo);
  for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(m, mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 20; ++it) {
    const double step = bessel_j(m, x) / bessel_jp(m, x);
    x -= step;
    if (std::abs(step) < 1e-15 * x) break;
  }
  if (x < lo - 1e-6 || x > hi + 1e-6) throw NumericalError("bessel_zero: Newton left the bracket");
  return x;
}

}  // namespace detail

/// n-th positive zero of J_m (n >= 1).
///
/// Sign changes are counted on a scan of step 0.25 (zeros are at least ~2.4
/// apart), so the returned root is the n-th and not merely some root. The
/// McMahon expansion bounds the scan; failing to see n sign changes before
/// that bound means J is being evaluated wrongly.
inline double bessel_zero(int m, int n) {
  if (m < 0) throw std::invalid_argument("bessel_zero: negative order");
  if (n < 1) throw std::invalid_argument("bessel_zero: n must be >= 1");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, double> cache;
  {
    std::scoped_lock lock(mutex);
    if (auto it = cache.find({m, n}); it != cache.end()) return it->second;
  }
  const double limit = detail::mcmahon_zero(m, n) + 2.0 * pi;
  constexpr double step = 0.25;
  double x = m == 0 ? step : static_cast<double>(m);  // j_{m,1} > m
  double fx = bessel_j(m, x);
  int found = 0;
  double root = 0.0;
  while (x < limit) {
    const double y = x + step;
    const double fy = bessel_j(m, y);
    if (fy == 0.0 || (fx < 0.0) != (fy < 0.0)) {
      if (++found == n) {
        root = fy == 0.0 ? y : detail::refine_zero(m, x, y);
        break;
      }
    }
    x = y;
    fx = fy;
  }
  if (found < n) {
    throw NumericalError("bessel_zero: could not isolate zero " + std::to_string(n) + " of J_" +
                         std::to_string(m));
  }
  std::scoped_lock lock(mutex);
  cache.emplace(std::pair{m, n}, root);
  return root;
}

/// Nodes and weights on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = -1.0;
  double b = 1.0;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

namespace detail {

struct ReferenceRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline ReferenceRule legendre_reference(int n) {
  ReferenceRule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    r.x[lo] = -z;
    r.x[hi] = z;
    r.w[lo] = w;
    r.w[hi] = w;
  }
  if (n % 2 == 1) r.x[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

inline const ReferenceRule& cached_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, ReferenceRule> cache;
  std::scoped_lock lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, legendre_reference(n)).first;
  return it->second;
}

}  // namespace detail

inline QuadratureRule gauss_legendre(int npoints, double a, double b) {
  if (npoints < 1) throw std::invalid_argument("gauss_legendre: npoints must be positive");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");
  const auto& ref = detail::cached_legendre(npoints);
  QuadratureRule q;
  q.a = a;
  q.b = b;
  q.nodes.resize(ref.x.size());
  q.weights.resize(ref.w.size());
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.x.size(); ++i) {
    q.nodes[i] = mid + half * ref.x[i];
    q.weights[i] = half * ref.w[i];
  }
  return q;
}

/// Default radial quadrature order on [0, r0].
inline constexpr int default_radial_order = 128;

/// One Dirichlet eigenmode (m, n) of the disk of radius r0.
struct BesselMode {
  int m = 0;
  int n = 1;
  double zero = 0.0;    // a_{|m|,n}
  double k = 0.0;       // a / r0
  double energy = 0.0;  // hbar^2 k^2 / (2 mu)
  double norm = 0.0;    // A_{mn}
  double r0 = 1.0;

  int order() const { return std::abs(m); }
  bool same_index(const BesselMode& o) const { return m == o.m && n == o.n; }
};

/// Builds mode (m, n) for a disk of radius r0 with particle mass mu.
inline BesselMode mode_make(int m, int n, double r0, double hbar, double mu,
                            int radial_order = default_radial_order) {
  if (!(r0 > 0.0)) throw std::invalid_argument("mode_make: r0 must be positive");
  BesselMode mode;
  mode.m = m;
  mode.n = n;
  mode.r0 = r0;
  mode.zero = bessel_zero(std::abs(m), n);
  mode.k = mode.zero / r0;
  mode.energy = hbar * hbar * mode.k * mode.k / (2.0 * mu);
  const auto rule = gauss_legendre(radial_order, 0.0, r0);
  const double integral = rule.integrate([&](double r) {
    const double j = bessel_j(std::abs(m), mode.k * r);
    return r * j * j;
  });
  mode.norm = 1.0 / std::sqrt(integral);
  return mode;
}

/// Closed-form normalization sqrt(2) / (r0 |J_{|m|+1}(a)|); cross-check only.
inline double mode_norm_closed_form(const BesselMode& mode) {
  return std::sqrt(2.0) / (mode.r0 * std::abs(bessel_j(mode.order() + 1, mode.zero)));
}

/// Radial factor A J_{|m|}(k r) together with its first two r-derivatives.
inline BesselTriple mode_radial(const BesselMode& mode, double r) {
  auto t = bessel_j_triple(mode.order(), mode.k * r);
  t.j *= mode.norm;
  t.dj *= mode.norm * mode.k;
  t.d2j *= mode.norm * mode.k * mode.k;
  return t;
}

/// chi_mn(r, theta) = (2 pi)^{-1/2} A J_{|m|}(k r) e^{i m theta}.
inline cplx eigenmode_value(const BesselMode& mode, double r, double theta) {
  const double radial = mode.norm * bessel_j(mode.order(), mode.k * r) / std::sqrt(two_pi);
  return std::polar(radial, mode.m * theta);
}

/// Truncated basis |m| <= m_max, 1 <= n <= n_max, ordered by m then n.
struct ModeSet {
  int m_max = 5;
  int n_max = 8;
  std::vector<BesselMode> modes;

  std::size_t size() const { return modes.size(); }

  const BesselMode& at(int m, int n) const {
    if (std::abs(m) > m_max || n < 1 || n > n_max) {
      throw std::out_of_range("mode (" + std::to_string(m) + "," + std::to_string(n) +
                              ") outside truncation set");
    }
    return modes[static_cast<std::size_t>((m + m_max) * n_max + (n - 1))];
  }
};

inline ModeSet make_mode_set(int m_max, int n_max, double r0, double hbar, double mu,
                             int radial_order = default_radial_order) {
  if (m_max < 0 || n_max < 1) throw std::invalid_argument("make_mode_set: bad truncation");
  ModeSet set;
  set.m_max = m_max;
  set.n_max = n_max;
  set.modes.reserve(static_cast<std::size_t>((2 * m_max + 1) * n_max));
  // modes with the same |m| share every numeric field
  std::map<std::pair<int, int>, BesselMode> built;
  for (int m = -m_max; m <= m_max; ++m) {
    for (int n = 1; n <= n_max; ++n) {
      auto key = std::pair{std::abs(m), n};
      auto it = built.find(key);
      if (it == built.end()) it = built.emplace(key, mode_make(std::abs(m), n, r0, hbar, mu, radial_order)).first;
      BesselMode mode = it->second;
      mode.m = m;
      set.modes.push_back(mode);
    }
  }
  return set;
}

/// Tensor rule for integrals over the disk of radius r0: Gauss-Legendre in r,
/// uniform (trapezoid, exact for trigonometric polynomials) in theta.
struct DiskQuadrature {
  QuadratureRule radial;
  int ntheta = 32;
  double r0 = 1.0;

  DiskQuadrature(double radius, int radial_order = default_radial_order, int angular_points = 32)
      : radial(gauss_legendre(radial_order, 0.0, radius)), ntheta(angular_points), r0(radius) {
    if (angular_points < 1) throw std::invalid_argument("DiskQuadrature: angular_points < 1");
  }

  double theta(int l) const { return two_pi * l / ntheta; }
  double dtheta() const { return two_pi / ntheta; }

  /// Integral of f(r, theta) r dr dtheta.
  template <class F>
  auto integrate(F&& f) const {
    using R = decltype(f(0.0, 0.0));
    R sum{};
    for (std::size_t i = 0; i < radial.size(); ++i) {
      const double r = radial.nodes[i];
      R ring{};
      for (int l = 0; l < ntheta; ++l) ring += f(r, theta(l));
      sum += (radial.weights[i] * r * dtheta()) * ring;
    }
    return sum;
  }

  template <class F, class G>
  cplx inner(F&& bra, G&& ket) const {
    return integrate([&](double r, double th) { return std::conj(cplx(bra(r, th))) * cplx(ket(r, th)); });
  }
};

}  // namespace billiard
