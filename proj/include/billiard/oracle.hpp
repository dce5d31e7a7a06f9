#pragma once

// Independent ground truth on a polar grid: the full effective Hamiltonian
// H1 + H2 + H3 for an arbitrary smooth R(theta, t), a Crank-Nicolson
// propagator, brute-force matrix elements and finite-difference energy rates.
//
// Grid: r_j = (j + 1/2) dr, j = 0 .. nr-1, with r_{nr-1} = r0 carrying the
// Dirichlet row; theta_l = 2 pi l / ntheta. The origin is not a node. Values
// across the origin follow psi(-r, theta) = psi(r, theta + pi).

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "billiard/common.hpp"
#include "billiard/domain.hpp"
#include "billiard/pantograph.hpp"
#include "billiard/specfun.hpp"

namespace billiard {

struct PolarGrid {
  int nr = 256;
  int ntheta = 64;
  double r0 = 1.0;

  PolarGrid() = default;
  PolarGrid(int radial, int angular, double radius) : nr(radial), ntheta(angular), r0(radius) {
    if (nr < 16 || ntheta < 16) throw std::invalid_argument("PolarGrid: need nr >= 16 and ntheta >= 16");
    if (ntheta % 2 != 0) throw std::invalid_argument("PolarGrid: ntheta must be even");
    if (!(r0 > 0.0)) throw std::invalid_argument("PolarGrid: r0 must be positive");
  }

  double dr() const { return r0 / (nr - 0.5); }
  double r(int j) const { return (j + 0.5) * dr(); }
  /// r_{j + 1/2}; zero at j = -1.
  double r_face(int j) const { return (j + 1) * dr(); }
  double dtheta() const { return two_pi / ntheta; }
  double theta(int l) const { return two_pi * l / ntheta; }
  std::size_t size() const { return static_cast<std::size_t>(nr) * static_cast<std::size_t>(ntheta); }
  std::size_t index(int j, int l) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(ntheta) + static_cast<std::size_t>(l);
  }
  /// Angular wavenumber of Fourier slot l.
  int wavenumber(int l) const { return l <= ntheta / 2 ? l : l - ntheta; }
  bool operator==(const PolarGrid&) const = default;
};

/// Complex field on the polar grid; row nr-1 is the Dirichlet row.
struct GridWavefunction {
  PolarGrid grid;
  std::vector<cplx> values;
  double time = 0.0;

  GridWavefunction() = default;
  explicit GridWavefunction(const PolarGrid& g, double t = 0.0) : grid(g), values(g.size(), cplx(0.0)), time(t) {}

  cplx& at(int j, int l) { return values[grid.index(j, l)]; }
  const cplx& at(int j, int l) const { return values[grid.index(j, l)]; }

  /// sum r_j conj(a) b dr dtheta
  cplx inner(const GridWavefunction& other) const {
    if (!(grid == other.grid)) throw std::invalid_argument("GridWavefunction: grid mismatch");
    cplx sum = 0.0;
    for (int j = 0; j < grid.nr - 1; ++j) {
      cplx ring = 0.0;
      for (int l = 0; l < grid.ntheta; ++l) ring += std::conj(at(j, l)) * other.at(j, l);
      sum += grid.r(j) * ring;
    }
    return sum * grid.dr() * grid.dtheta();
  }

  double norm2() const { return inner(*this).real(); }

  void enforce_dirichlet() {
    for (int l = 0; l < grid.ntheta; ++l) at(grid.nr - 1, l) = 0.0;
  }
};

/// Samples a fixed-disk wavefunction on the grid (boundary row forced to 0).
inline GridWavefunction sample_grid(const PolarGrid& grid, const Sampler& f, double t = 0.0) {
  GridWavefunction psi(grid, t);
  for (int j = 0; j < grid.nr - 1; ++j)
    for (int l = 0; l < grid.ntheta; ++l) psi.at(j, l) = f(grid.r(j), grid.theta(l));
  return psi;
}

/// |<a, b>|^2 / (|a|^2 |b|^2) under the grid inner product.
inline double fidelity(const GridWavefunction& a, const GridWavefunction& b) {
  return std::norm(a.inner(b)) / (a.norm2() * b.norm2());
}

namespace detail {

// Batched FFT over the theta index of every row.
class ThetaTransform {
 public:
  ThetaTransform(int rows, int n) : rows_(rows), n_(n) {
    std::vector<cplx> buf(static_cast<std::size_t>(rows) * static_cast<std::size_t>(n));
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    std::scoped_lock lock(planner_mutex());
    const int dims[1] = {n};
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_many_dft(1, dims, rows, p, nullptr, 1, n, p, nullptr, 1, n, FFTW_FORWARD, flags);
    backward_ = fftw_plan_many_dft(1, dims, rows, p, nullptr, 1, n, p, nullptr, 1, n, FFTW_BACKWARD, flags);
    if (!forward_ || !backward_) throw NumericalError("ThetaTransform: FFTW planning failed");
  }
  ~ThetaTransform() {
    std::scoped_lock lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  ThetaTransform(const ThetaTransform&) = delete;
  ThetaTransform& operator=(const ThetaTransform&) = delete;

  void forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  /// Normalized inverse.
  void backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / n_;
    const std::size_t total = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(n_);
    for (std::size_t i = 0; i < total; ++i) out[i] *= s;
  }

  static std::shared_ptr<const ThetaTransform> get(int rows, int n) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const ThetaTransform>> cache;
    std::scoped_lock lock(mutex);
    auto& slot = cache[{rows, n}];
    if (!slot) slot = std::make_shared<const ThetaTransform>(rows, n);
    return slot;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  int rows_;
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

// Radial stencils on interior rows j = 0 .. nr-2.
struct RadialStencils {
  // (1/r) d/dr (r d/dr), conservative form
  std::vector<double> lap_lo, lap_di, lap_hi;
  // 1 + r d/dr in the skew form (1/(2 r_j dr)) (r_{j+1/2}^2 f_{j+1} - r_{j-1/2}^2 f_{j-1})
  std::vector<double> dil_lo, dil_hi;
  std::vector<double> inv_r2;

  explicit RadialStencils(const PolarGrid& g) {
    const int n = g.nr - 1;
    const double dr = g.dr();
    lap_lo.resize(static_cast<std::size_t>(n));
    lap_di.resize(static_cast<std::size_t>(n));
    lap_hi.resize(static_cast<std::size_t>(n));
    dil_lo.resize(static_cast<std::size_t>(n));
    dil_hi.resize(static_cast<std::size_t>(n));
    inv_r2.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const double r = g.r(j);
      const double rm = g.r_face(j - 1);
      const double rp = g.r_face(j);
      lap_lo[u] = rm / (r * dr * dr);
      lap_hi[u] = rp / (r * dr * dr);
      lap_di[u] = -(rm + rp) / (r * dr * dr);
      dil_lo[u] = -rm * rm / (2.0 * r * dr);
      dil_hi[u] = rp * rp / (2.0 * r * dr);
      inv_r2[u] = 1.0 / (r * r);
    }
  }
};

}  // namespace detail

/// Which pieces of H_eff to apply.
enum class HeffParts : unsigned { kinetic = 1, dilation = 2, all = 3 };

/// Grid form of H_eff = H1 + H2 + H3 frozen at time t.
///
/// H1 = -hbar^2/(2 mu R^2) laplacian, H2 = i hbar (R_t/R)(1 + r d/dr), and H3 the
/// deformation terms with coefficient fields built from the exact R(theta, t),
/// each coefficient multiplying the derivative of psi. Radial derivatives are
/// second-order central differences, theta derivatives spectral.
class EffectiveOperator {
 public:
  EffectiveOperator(const PolarGrid& grid, const BoundaryFunction& boundary, const DomainSpec& spec, double t)
      : grid_(grid),
        t_(t),
        hbar_(spec.hbar),
        kin_(spec.hbar * spec.hbar / (2.0 * spec.mu)),
        pantographic_(boundary.pantographic),
        stencils_(std::make_shared<const detail::RadialStencils>(grid)),
        fft_(detail::ThetaTransform::get(grid.nr, grid.ntheta)) {
    const auto n = static_cast<std::size_t>(grid.ntheta);
    inv_r2_.resize(n);
    rdot_r_.resize(n);
    c1_.resize(n);
    c2_.resize(n);
    c3_.resize(n);
    c4_.resize(n);
    for (int l = 0; l < grid.ntheta; ++l) {
      const auto u = static_cast<std::size_t>(l);
      const auto p = boundary(grid.theta(l), t);
      if (!(p.R > 0.0)) throw DomainError("EffectiveOperator: R <= 0");
      const double iv = p.inv();
      const double ivt = p.inv_theta();
      const double ivtt = p.inv_thetatheta();
      inv_r2_[u] = iv * iv;
      rdot_r_[u] = p.R_t / p.R;
      c1_[u] = iv * ivtt;                    // (1/R)(1/R)_tt / r^2
      c2_[u] = 2.0 * ivt * ivt + iv * ivtt;  // [((1/R)_t)^2 + ((1/R)(1/R)_t)_t] (1/r) d_r
      c3_[u] = 2.0 * iv * ivt;               // (2/R)(1/R)_t (1/r^2) d_t  and  (1/r) d_r d_t
      c4_[u] = ivt * ivt;                    // ((1/R)_t)^2 d_rr
      if (pantographic_ && (ivt != 0.0 || ivtt != 0.0))
        throw std::invalid_argument("EffectiveOperator: pantographic boundary with R_theta != 0");
    }
    mean_inv_r2_ = std::accumulate(inv_r2_.begin(), inv_r2_.end(), 0.0) / grid.ntheta;
    mean_rdot_r_ = std::accumulate(rdot_r_.begin(), rdot_r_.end(), 0.0) / grid.ntheta;
  }

  const PolarGrid& grid() const { return grid_; }
  double time() const { return t_; }
  bool pantographic() const { return pantographic_; }
  double mean_inv_r2() const { return mean_inv_r2_; }
  double mean_rdot_r() const { return mean_rdot_r_; }

  /// True when every deformation coefficient vanishes.
  bool h3_vanishes() const {
    for (std::size_t u = 0; u < c1_.size(); ++u)
      if (c1_[u] != 0.0 || c2_[u] != 0.0 || c3_[u] != 0.0 || c4_[u] != 0.0) return false;
    return true;
  }

  void apply(std::span<const cplx> in, std::span<cplx> out, HeffParts parts = HeffParts::all) const {
    const PolarGrid& g = grid_;
    const int nr = g.nr;
    const int nt = g.ntheta;
    const std::size_t total = g.size();
    if (in.size() != total || out.size() != total) throw std::invalid_argument("EffectiveOperator: size mismatch");
    const auto& st = *stencils_;
    const bool kinetic = (static_cast<unsigned>(parts) & 1u) != 0;
    const bool dilation = (static_cast<unsigned>(parts) & 2u) != 0;
    std::fill(out.begin(), out.end(), cplx(0.0));

    if (kinetic) {
      four_.resize(total);
      lap_.resize(total);
      fft_->forward(in.data(), four_.data());
      // laplacian per angular wavenumber
      for (int j = 0; j < nr - 1; ++j) {
        const auto u = static_cast<std::size_t>(j);
        for (int l = 0; l < nt; ++l) {
          const double q = g.wavenumber(l);
          const cplx c = four_[g.index(j, l)];
          const cplx lo = j > 0 ? four_[g.index(j - 1, l)] : cplx(0.0);
          const cplx hi = j < nr - 2 ? four_[g.index(j + 1, l)] : cplx(0.0);
          lap_[g.index(j, l)] = st.lap_lo[u] * lo + (st.lap_di[u] - q * q * st.inv_r2[u]) * c + st.lap_hi[u] * hi;
        }
      }
      for (int l = 0; l < nt; ++l) lap_[g.index(nr - 1, l)] = 0.0;
      fft_->backward(lap_.data(), lap_.data());
      for (int j = 0; j < nr - 1; ++j)
        for (int l = 0; l < nt; ++l)
          out[g.index(j, l)] += -kin_ * inv_r2_[static_cast<std::size_t>(l)] * lap_[g.index(j, l)];

      if (!pantographic_) apply_h3(in, out);
    }

    if (dilation) {
      for (int j = 0; j < nr - 1; ++j) {
        const auto u = static_cast<std::size_t>(j);
        for (int l = 0; l < nt; ++l) {
          const cplx lo = j > 0 ? in[g.index(j - 1, l)] : cplx(0.0);
          const cplx hi = in[g.index(j + 1, l)];
          const cplx d = st.dil_lo[u] * lo + st.dil_hi[u] * hi;
          out[g.index(j, l)] += cplx(0.0, hbar_ * rdot_r_[static_cast<std::size_t>(l)]) * d;
        }
      }
    }
  }

  GridWavefunction apply(const GridWavefunction& psi, HeffParts parts = HeffParts::all) const {
    GridWavefunction out(psi.grid, psi.time);
    apply(psi.values, out.values, parts);
    return out;
  }

 private:
  void apply_h3(std::span<const cplx> in, std::span<cplx> out) const {
    const PolarGrid& g = grid_;
    const int nr = g.nr;
    const int nt = g.ntheta;
    const int half = nt / 2;
    const double dr = g.dr();
    const std::size_t total = g.size();
    // d/dtheta spectrally (Nyquist slot dropped)
    dth_.resize(total);
    for (int j = 0; j < nr; ++j)
      for (int l = 0; l < nt; ++l) {
        const int q = g.wavenumber(l);
        dth_[g.index(j, l)] = (l == half) ? cplx(0.0) : cplx(0.0, q) * four_[g.index(j, l)];
      }
    fft_->backward(dth_.data(), dth_.data());
    for (int l = 0; l < nt; ++l) dth_[g.index(nr - 1, l)] = 0.0;

    auto value = [&](const auto& f, int j, int l) -> cplx {
      if (j < 0) return f[g.index(0, (l + half) % nt)];  // across the origin
      if (j >= nr - 1) return cplx(0.0);
      return f[g.index(j, l)];
    };
    for (int j = 0; j < nr - 1; ++j) {
      const double r = g.r(j);
      for (int l = 0; l < nt; ++l) {
        const auto u = static_cast<std::size_t>(l);
        if (c1_[u] == 0.0 && c2_[u] == 0.0 && c3_[u] == 0.0 && c4_[u] == 0.0) continue;
        const cplx f0 = value(in, j, l);
        const cplx fp = value(in, j + 1, l);
        const cplx fm = value(in, j - 1, l);
        const cplx d1 = (fp - fm) / (2.0 * dr);
        const cplx d2 = (fp - 2.0 * f0 + fm) / (dr * dr);
        const cplx t0 = value(dth_, j, l);
        const cplx td = (value(dth_, j + 1, l) - value(dth_, j - 1, l)) / (2.0 * dr);
        const cplx braces =
            c1_[u] * f0 / (r * r) + c2_[u] * d1 / r + c3_[u] * t0 / (r * r) + c4_[u] * d2 + c3_[u] * td / r;
        out[g.index(j, l)] += -kin_ * braces;
      }
    }
  }

  PolarGrid grid_;
  double t_;
  double hbar_;
  double kin_;
  bool pantographic_;
  std::shared_ptr<const detail::RadialStencils> stencils_;
  std::shared_ptr<const detail::ThetaTransform> fft_;
  std::vector<double> inv_r2_, rdot_r_, c1_, c2_, c3_, c4_;
  double mean_inv_r2_ = 1.0;
  double mean_rdot_r_ = 0.0;
  mutable std::vector<cplx> four_, lap_, dth_;
};

inline GridWavefunction apply_heff(const EffectiveOperator& op, const GridWavefunction& psi) { return op.apply(psi); }

/// Re <psi | H1 + H3 | psi>: the energy of the moving-picture state.
inline double grid_energy(const EffectiveOperator& op, const GridWavefunction& psi) {
  return psi.inner(op.apply(psi, HeffParts::kinetic)).real();
}

struct PropagatorOptions {
  /// Relative residual at which the deformed-step iteration stops.
  double solve_tol = 1e-12;
  /// Below this, a residual that no longer halves is accepted.
  double stall_tol = 1e-9;
  int max_iterations = 200;
};

/// Midpoint Crank-Nicolson stepper for i hbar d_t phi = H_eff(t) phi.
///
/// Pantographic boundaries decouple per angular wavenumber and are solved
/// exactly with one tridiagonal system per wavenumber. Deformed boundaries
/// use defect correction preconditioned by that same solve, built from the
/// theta-averaged coefficients.
class CrankNicolson {
 public:
  CrankNicolson(const PolarGrid& grid, BoundaryFunction boundary, DomainSpec spec, double dt,
                PropagatorOptions opt = {})
      : grid_(grid),
        boundary_(std::move(boundary)),
        spec_(std::move(spec)),
        dt_(dt),
        opt_(opt),
        stencils_(grid),
        fft_(detail::ThetaTransform::get(grid.nr, grid.ntheta)) {
    if (!(dt > 0.0)) throw std::invalid_argument("CrankNicolson: dt must be positive");
  }

  double dt() const { return dt_; }
  /// Iterations used by the last deformed step.
  int last_iterations() const { return last_iterations_; }

  void step(GridWavefunction& psi, double dt) {
    const double tm = psi.time + 0.5 * dt;
    const EffectiveOperator op(grid_, boundary_, spec_, tm);
    const double tau = dt / (2.0 * spec_.hbar);
    const std::size_t total = grid_.size();
    psi.enforce_dirichlet();
    const double a = spec_.hbar * spec_.hbar / (2.0 * spec_.mu) * op.mean_inv_r2();
    const double b = spec_.hbar * op.mean_rdot_r();
    if (op.pantographic()) {
      work_.resize(total);
      fft_->forward(psi.values.data(), work_.data());
      block_step(work_, a, b, tau);
      fft_->backward(work_.data(), psi.values.data());
      psi.enforce_dirichlet();
      last_iterations_ = 0;
    } else {
      hv_.resize(total);
      rhs_.resize(total);
      op.apply(psi.values, hv_);
      for (std::size_t i = 0; i < total; ++i) rhs_[i] = psi.values[i] - cplx(0.0, tau) * hv_[i];
      zero_boundary(rhs_);
      double rhs_norm = 0.0;
      for (const auto& v : rhs_) rhs_norm += std::norm(v);
      rhs_norm = std::sqrt(rhs_norm);
      x_ = rhs_;
      precondition(x_, a, b, tau);
      res_.resize(total);
      int it = 0;
      double previous = std::numeric_limits<double>::infinity();
      for (; it < opt_.max_iterations; ++it) {
        op.apply(x_, hv_);
        double rn = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
          res_[i] = rhs_[i] - (x_[i] + cplx(0.0, tau) * hv_[i]);
          rn += std::norm(res_[i]);
        }
        zero_boundary(res_);
        const double rel = std::sqrt(rn) / rhs_norm;
        if (rel <= opt_.solve_tol) break;
        // roundoff floor: the residual stopped shrinking at a harmless level
        if (rel < opt_.stall_tol && rel > 0.5 * previous) break;
        previous = rel;
        precondition(res_, a, b, tau);
        for (std::size_t i = 0; i < total; ++i) x_[i] += res_[i];
      }
      if (it == opt_.max_iterations) {
        throw NumericalError("CrankNicolson: deformed step did not converge at t = " + std::to_string(tm) +
                             " (dt too large?)");
      }
      last_iterations_ = it;
      psi.values = x_;
      psi.enforce_dirichlet();
    }
    psi.time += dt;
  }

  void step(GridWavefunction& psi) { step(psi, dt_); }

 private:
  void zero_boundary(std::vector<cplx>& v) const {
    for (int l = 0; l < grid_.ntheta; ++l) v[grid_.index(grid_.nr - 1, l)] = 0.0;
  }

  // In Fourier space: x_q <- (1 + i tau H_q)^{-1} (1 - i tau H_q) x_q.
  void block_step(std::vector<cplx>& f, double a, double b, double tau) {
    apply_block_matrix(f, a, b, -tau);
    solve_block(f, a, b, tau);
  }

  void precondition(std::vector<cplx>& v, double a, double b, double tau) {
    work_.resize(v.size());
    fft_->forward(v.data(), work_.data());
    solve_block(work_, a, b, tau);
    fft_->backward(work_.data(), v.data());
    zero_boundary(v);
  }

  // Tridiagonal H_q = -a (L_r - q^2/r^2) + i b D, rows 0 .. nr-2.
  void coefficients(int j, double q, double a, double b, cplx& lo, cplx& di, cplx& hi) const {
    const auto u = static_cast<std::size_t>(j);
    lo = -a * stencils_.lap_lo[u] + cplx(0.0, b * stencils_.dil_lo[u]);
    di = -a * (stencils_.lap_di[u] - q * q * stencils_.inv_r2[u]);
    hi = -a * stencils_.lap_hi[u] + cplx(0.0, b * stencils_.dil_hi[u]);
  }

  // f_q <- (1 + i s H_q) f_q
  void apply_block_matrix(std::vector<cplx>& f, double a, double b, double s) {
    const int n = grid_.nr - 1;
    col_.resize(static_cast<std::size_t>(n));
    for (int l = 0; l < grid_.ntheta; ++l) {
      const double q = grid_.wavenumber(l);
      for (int j = 0; j < n; ++j) col_[static_cast<std::size_t>(j)] = f[grid_.index(j, l)];
      for (int j = 0; j < n; ++j) {
        cplx lo, di, hi;
        coefficients(j, q, a, b, lo, di, hi);
        cplx h = di * col_[static_cast<std::size_t>(j)];
        if (j > 0) h += lo * col_[static_cast<std::size_t>(j - 1)];
        if (j < n - 1) h += hi * col_[static_cast<std::size_t>(j + 1)];
        f[grid_.index(j, l)] = col_[static_cast<std::size_t>(j)] + cplx(0.0, s) * h;
      }
      f[grid_.index(n, l)] = 0.0;
    }
  }

  // f_q <- (1 + i tau H_q)^{-1} f_q by the Thomas algorithm.
  void solve_block(std::vector<cplx>& f, double a, double b, double tau) {
    const int n = grid_.nr - 1;
    cp_.resize(static_cast<std::size_t>(n));
    dp_.resize(static_cast<std::size_t>(n));
    const cplx it(0.0, tau);
    for (int l = 0; l < grid_.ntheta; ++l) {
      const double q = grid_.wavenumber(l);
      for (int j = 0; j < n; ++j) {
        cplx lo, di, hi;
        coefficients(j, q, a, b, lo, di, hi);
        const cplx A = it * lo;
        const cplx B = 1.0 + it * di;
        const cplx C = it * hi;
        const cplx d = f[grid_.index(j, l)];
        const auto u = static_cast<std::size_t>(j);
        if (j == 0) {
          cp_[u] = C / B;
          dp_[u] = d / B;
        } else {
          const cplx den = B - A * cp_[u - 1];
          if (std::abs(den) < 1e-300) throw NumericalError("CrankNicolson: singular tridiagonal block");
          cp_[u] = C / den;
          dp_[u] = (d - A * dp_[u - 1]) / den;
        }
      }
      for (int j = n - 1; j >= 0; --j) {
        const auto u = static_cast<std::size_t>(j);
        const cplx x = j == n - 1 ? dp_[u] : dp_[u] - cp_[u] * f[grid_.index(j + 1, l)];
        f[grid_.index(j, l)] = x;
      }
      f[grid_.index(n, l)] = 0.0;
    }
  }

  PolarGrid grid_;
  BoundaryFunction boundary_;
  DomainSpec spec_;
  double dt_;
  PropagatorOptions opt_;
  detail::RadialStencils stencils_;
  std::shared_ptr<const detail::ThetaTransform> fft_;
  int last_iterations_ = 0;
  std::vector<cplx> work_, hv_, rhs_, x_, res_, col_, cp_, dp_;
};

/// Called after every step with the current state.
using StepObserver = std::function<void(const GridWavefunction&)>;

/// Propagates psi0 from psi0.time to t1; dt is shrunk so the steps land on t1.
inline GridWavefunction propagate(const BoundaryFunction& boundary, const DomainSpec& spec, GridWavefunction psi0,
                                  double t1, double dt, const StepObserver& observer = {},
                                  PropagatorOptions opt = {}) {
  const double span = t1 - psi0.time;
  if (span < 0.0) throw std::invalid_argument("propagate: t1 before the initial time");
  if (span == 0.0) return psi0;
  const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
  const double h = span / static_cast<double>(steps);
  CrankNicolson cn(psi0.grid, boundary, spec, h, opt);
  const double t0 = psi0.time;
  for (long s = 0; s < steps; ++s) {
    cn.step(psi0, h);
    psi0.time = t0 + h * static_cast<double>(s + 1);
    if (observer) observer(psi0);
  }
  return psi0;
}

/// Overlaps of grid states with co-moving exact solutions phi_k(t).
///
/// The coefficient is the grid inner product divided by the grid norm of the
/// sampled exact solution, so a sampled phi_k projects to exactly 1.
class GridProjector {
 public:
  GridProjector(const PolarGrid& grid, std::vector<BesselMode> modes, DomainSpec spec)
      : grid_(grid), modes_(std::move(modes)), spec_(std::move(spec)) {
    const int n = grid.nr - 1;
    radial_.resize(modes_.size());
    norms_.resize(modes_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      auto& col = radial_[k];
      col.resize(static_cast<std::size_t>(n));
      double nn = 0.0;
      for (int j = 0; j < n; ++j) {
        const double v = modes_[k].norm * bessel_j(modes_[k].order(), modes_[k].k * grid.r(j)) / std::sqrt(two_pi);
        col[static_cast<std::size_t>(j)] = v;
        nn += grid.r(j) * v * v;
      }
      norms_[k] = nn * grid.dr() * two_pi;  // |e^{i m theta}|^2 sums to ntheta dtheta = 2 pi
    }
  }

  const std::vector<BesselMode>& modes() const { return modes_; }

  cplx project(const GridWavefunction& psi, std::size_t k, double t) const {
    if (!(psi.grid == grid_)) throw std::invalid_argument("GridProjector: grid mismatch");
    const auto& mode = modes_.at(k);
    const double a = alpha(spec_, t);
    const double b = beta(mode, spec_, t);
    ensure_angular(mode.m);
    const auto& ang = angular_.at(mode.m);
    cplx sum = 0.0;
    for (int j = 0; j < grid_.nr - 1; ++j) {
      const double r = grid_.r(j);
      cplx ring = 0.0;
      for (int l = 0; l < grid_.ntheta; ++l) ring += ang[static_cast<std::size_t>(l)] * psi.at(j, l);
      sum += r * radial_[k][static_cast<std::size_t>(j)] * std::polar(1.0, -(a * r * r + b)) * ring;
    }
    return sum * grid_.dr() * grid_.dtheta() / norms_[k];
  }

 private:
  // e^{-i m theta_l}
  void ensure_angular(int m) const {
    std::scoped_lock lock(mutex_);
    if (angular_.count(m)) return;
    std::vector<cplx> v(static_cast<std::size_t>(grid_.ntheta));
    for (int l = 0; l < grid_.ntheta; ++l) v[static_cast<std::size_t>(l)] = std::polar(1.0, -m * grid_.theta(l));
    angular_.emplace(m, std::move(v));
  }

  PolarGrid grid_;
  std::vector<BesselMode> modes_;
  DomainSpec spec_;
  std::vector<std::vector<double>> radial_;
  std::vector<double> norms_;
  mutable std::map<int, std::vector<cplx>> angular_;
  mutable std::mutex mutex_;
};

/// <phi_mode-exact(t), psi> on the grid.
inline cplx project(const GridWavefunction& psi, const BesselMode& mode, const DomainSpec& spec, double t) {
  return GridProjector(psi.grid, {mode}, spec).project(psi, 0, t);
}

/// 4th-order finite-difference derivative of samples on a uniform grid of
/// spacing h (one-sided 4th-order stencils at the two ends on each side).
inline std::vector<double> fd_derivative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 5) throw std::invalid_argument("fd_derivative: need at least 5 samples");
  std::vector<double> d(n);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
  d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
  d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h);
  d[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) / (12.0 * h);
  d[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] - y[n - 5]) / (12.0 * h);
  return d;
}

/// d<H1 + H3>/dt along a trajectory sampled at uniform times.
inline std::vector<double> fd_energy_rate(const std::vector<GridWavefunction>& trajectory, const DomainSpec& spec,
                                          const BoundaryFunction& boundary) {
  if (trajectory.size() < 5) throw std::invalid_argument("fd_energy_rate: need at least 5 states");
  const double h = trajectory[1].time - trajectory[0].time;
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    if (std::abs(trajectory[i].time - trajectory[i - 1].time - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("fd_energy_rate: time grid must be uniform");
  std::vector<double> e;
  e.reserve(trajectory.size());
  for (const auto& psi : trajectory) {
    const EffectiveOperator op(psi.grid, boundary, spec, psi.time);
    e.push_back(grid_energy(op, psi) / psi.norm2());
  }
  return fd_derivative(e, h);
}

inline std::vector<double> fd_energy_rate(const std::vector<GridWavefunction>& trajectory, const DomainSpec& spec) {
  return fd_energy_rate(trajectory, spec, pantographic_boundary(spec));
}

/// Brute-force <phi_sigma(s)| H_eff^(1)(s) |phi_sigma'(s)> for the ellipse.
///
/// The dressed solutions exp(i(alpha r^2 + beta)) chi are built explicitly and
/// the first-order operator
///   eps [ hbar^2/mu g/lambda^2 cos(t) lap + i hbar gdot cos(t) (1 + r d_r)
///         - hbar^2/(2mu) g/lambda^2 (cos(t) + 2 sin(t) d_t)(1/r^2 + (1/r) d_r) ]
/// is applied by differentiating the analytic form; the sandwich is a tensor
/// Gauss-Legendre (r) x uniform (theta) sum.
class BruteElement {
 public:
  BruteElement(BesselMode target, BesselMode source, DomainSpec spec, int radial_order = 160, int ntheta = 32)
      : target_(std::move(target)), source_(std::move(source)), spec_(std::move(spec)) {
    if (ntheta < 8) throw std::invalid_argument("BruteElement: ntheta must be >= 8");
    rule_ = gauss_legendre(radial_order, 0.0, spec_.r0);
    for (double r : rule_.nodes) {
      tg_.push_back(mode_radial(target_, r));
      src_.push_back(mode_radial(source_, r));
    }
    // theta sums of conj(e^{i m t}) e^{i m' t} {cos t, sin t} / (2 pi); the tensor
    // rule factorizes, so these are computed once
    const double mp = source_.m;
    for (int l = 0; l < ntheta; ++l) {
      const double th = two_pi * l / ntheta;
      const cplx w = std::polar(1.0, (mp - target_.m) * th) / static_cast<double>(ntheta);
      cos_sum_ += w * std::cos(th);
      sin_sum_ += w * std::sin(th);
    }
  }

  cplx operator()(double s) const {
    const double eps = spec_.epsilon;
    const double hb = spec_.hbar;
    const double mu = spec_.mu;
    const double lam = spec_.lambda(s);
    const double g = spec_.g(s);
    const double gd = spec_.g_dot(s);
    const double a = alpha(spec_, s);
    const double bt = beta(target_, spec_, s);
    const double bs = beta(source_, spec_, s);
    const double mp = source_.m;
    // cos(t) and cos(t) + 2 sin(t) d_t after the theta sum
    const cplx ang_c = cos_sum_;
    const cplx ang_h3 = cos_sum_ + 2.0 * cplx(0.0, mp) * sin_sum_;
    cplx total = 0.0;
    for (std::size_t i = 0; i < rule_.size(); ++i) {
      const double r = rule_.nodes[i];
      const auto& T = tg_[i];
      const auto& S = src_[i];
      const cplx dress_s = std::polar(1.0, a * r * r + bs);
      const cplx dress_t = std::polar(1.0, a * r * r + bt);
      // radial parts of phi' and its r-derivatives
      const cplx P1(0.0, 2.0 * a * r);
      const cplx f = dress_s * S.j;
      const cplx fr = dress_s * (P1 * S.j + S.dj);
      const cplx frr = dress_s * ((cplx(0.0, 2.0 * a) + P1 * P1) * S.j + 2.0 * P1 * S.dj + S.d2j);
      const cplx lap_radial = frr + fr / r - mp * mp * f / (r * r);
      const cplx dil = f + r * fr;
      const cplx q = f / (r * r) + fr / r;
      const cplx h1 = hb * hb / mu * g / (lam * lam) * lap_radial * ang_c;
      const cplx h2 = cplx(0.0, hb * gd) * dil * ang_c;
      const cplx h3 = -hb * hb / (2.0 * mu) * g / (lam * lam) * q * ang_h3;
      total += rule_.weights[i] * r * std::conj(dress_t * T.j) * eps * (h1 + h2 + h3);
    }
    return total;
  }

  /// int_0^t by composite 16-point Gauss-Legendre on panels that each carry at
  /// most pi/8 of phase advance.
  cplx integrate(double t) const {
    if (!(t > 0.0)) return 0.0;
    const double rate = std::abs(target_.energy - source_.energy) / spec_.hbar;
    double h = rate > 0.0 ? (pi / 8.0) / rate : t;
    if (spec_.gamma > 0.0) h = std::min(h, 0.25 / spec_.gamma);
    const long panels = std::max(4L, static_cast<long>(std::ceil(t / h)));
    const double w = t / static_cast<double>(panels);
    cplx sum = 0.0;
    for (long p = 0; p < panels; ++p) {
      const auto rule = gauss_legendre(16, w * static_cast<double>(p), w * static_cast<double>(p + 1));
      for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * (*this)(rule.nodes[i]);
    }
    return sum;
  }

 private:
  BesselMode target_;
  BesselMode source_;
  DomainSpec spec_;
  QuadratureRule rule_;
  std::vector<BesselTriple> tg_;
  std::vector<BesselTriple> src_;
  cplx cos_sum_ = 0.0;
  cplx sin_sum_ = 0.0;
};

/// Instantaneous brute-force sandwich at time s.
inline cplx brute_element(const BesselMode& target, const BesselMode& source, const DomainSpec& spec, double s) {
  return BruteElement(target, source, spec)(s);
}

}  // namespace billiard
