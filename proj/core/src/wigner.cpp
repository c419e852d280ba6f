#include "levcool/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "levcool/errors.hpp"

namespace levcool {

using detail::FftBuffer;
using detail::FftPlan;
using detail::wavenumber;

struct BlockWigner::Workspace {
  explicit Workspace(std::size_t n)
      : ra(n * n), rd(n * n), rb(n * n), rb_out(n * n), s1(n * n), s2(n * n), s3(n * n) {}
  FftBuffer ra, rd, rb, rb_out, s1, s2, s3;
  FftPlan rows_bwd, rows_fwd, grid_fwd, grid_bwd;
};

double default_half_width(double nbar) { return 6.0 * std::sqrt(nbar + 0.5) + 10.0; }

BlockWigner::BlockWigner(PhaseGrid grid, double g) : grid_(grid), g_(g) {
  if (grid_.n < 8 || grid_.n % 2 != 0) throw InvalidArgument("BlockWigner: n must be even and >= 8");
  if (!(grid_.spacing > 0)) throw InvalidArgument("BlockWigner: spacing must be positive");
  if (!(g > 0)) throw InvalidArgument("BlockWigner: g must be positive");
  a_.assign(grid_.n * grid_.n, 0.0);
  d_.assign(grid_.n * grid_.n, 0.0);
  b_.assign(grid_.n * grid_.n, 0.0);
}

BlockWigner::BlockWigner(const BlockWigner& o)
    : grid_(o.grid_), g_(o.g_), a_(o.a_), d_(o.d_), b_(o.b_), diss_(o.diss_), pending_(o.pending_) {}

BlockWigner& BlockWigner::operator=(const BlockWigner& o) {
  if (this != &o) {
    grid_ = o.grid_;
    g_ = o.g_;
    a_ = o.a_;
    d_ = o.d_;
    b_ = o.b_;
    diss_ = o.diss_;
    pending_ = o.pending_;
    if (ws_ && ws_->ra.size() != grid_.n * grid_.n) ws_.reset();
  }
  return *this;
}

BlockWigner::BlockWigner(BlockWigner&&) noexcept = default;
BlockWigner& BlockWigner::operator=(BlockWigner&&) noexcept = default;
BlockWigner::~BlockWigner() = default;

BlockWigner::Workspace& BlockWigner::ws() {
  if (!ws_) {
    const std::size_t n = grid_.n;
    ws_ = std::make_unique<Workspace>(n);
    ws_->rows_bwd = FftPlan::rows(n, n, FftPlan::Direction::backward);
    ws_->rows_fwd = FftPlan::rows(n, n, FftPlan::Direction::forward);
    ws_->grid_fwd = FftPlan::grid(n, n, FftPlan::Direction::forward);
    ws_->grid_bwd = FftPlan::grid(n, n, FftPlan::Direction::backward);
  }
  return *ws_;
}

BlockWigner BlockWigner::thermal(double nbar, std::size_t n, double half_width, double g) {
  if (!(nbar >= 0)) throw InvalidArgument("thermal: nbar must be non-negative");
  const double var = nbar + 0.5;
  if (half_width <= 0) half_width = default_half_width(nbar);
  if (half_width < 6.0 * std::sqrt(var))
    throw GridTooSmall("thermal: half width " + std::to_string(half_width) +
                       " below 6 sqrt(nbar + 1/2) = " + std::to_string(6.0 * std::sqrt(var)));
  return gaussian(n, half_width, 0.0, 0.0, var, var, g);
}

BlockWigner BlockWigner::gaussian(std::size_t n, double half_width, double mean_mu, double mean_nu,
                                  double var_mu, double var_nu, double g) {
  if (!(var_mu > 0) || !(var_nu > 0)) throw InvalidArgument("gaussian: variances must be positive");
  if (var_mu * var_nu < 0.25 - 1e-12) throw InvalidArgument("gaussian: violates the uncertainty bound");
  PhaseGrid grid{n, 2.0 * half_width / static_cast<double>(n), mean_mu, mean_nu};
  BlockWigner w(grid, g);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.mu(j) - mean_mu;
    for (std::size_t k = 0; k < n; ++k) {
      const double p = grid.nu(k) - mean_nu;
      const double v = std::exp(-0.5 * (x * x / var_mu + p * p / var_nu));
      w.d_[w.index(j, k)] = v;
      sum += v;
    }
  }
  const double norm = 1.0 / (sum * grid.spacing * grid.spacing);
  for (double& v : w.d_) v *= norm;
  return w;
}

// --- diagnostics -------------------------------------------------------------

double BlockWigner::trace() const { return population_up() + population_down(); }

double BlockWigner::population_up() const {
  double s = 0.0;
  for (double v : a_) s += v;
  return s * grid_.spacing * grid_.spacing;
}

double BlockWigner::population_down() const {
  double s = 0.0;
  for (double v : d_) s += v;
  return s * grid_.spacing * grid_.spacing;
}

double BlockWigner::coherence_norm() const {
  double m = 0.0;
  for (const auto& v : b_) m = std::max(m, std::abs(v));
  return m;
}

double BlockWigner::purity() const {
  double s = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) s += a_[i] * a_[i] + d_[i] * d_[i] + 2.0 * std::norm(b_[i]);
  return 2.0 * std::numbers::pi * s * grid_.spacing * grid_.spacing;
}

namespace {

template <class F>
PhaseMoments moments_of(const PhaseGrid& g, F&& weight) {
  double s0 = 0, sm = 0, sn = 0, smm = 0, snn = 0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double mu = g.mu(j);
    for (std::size_t k = 0; k < g.n; ++k) {
      const double w = weight(j * g.n + k);
      const double nu = g.nu(k);
      s0 += w;
      sm += w * mu;
      sn += w * nu;
      smm += w * mu * mu;
      snn += w * nu * nu;
    }
  }
  PhaseMoments m;
  m.trace = s0 * g.spacing * g.spacing;
  if (s0 != 0.0) {
    m.mean_mu = sm / s0;
    m.mean_nu = sn / s0;
    m.var_mu = smm / s0 - m.mean_mu * m.mean_mu;
    m.var_nu = snn / s0 - m.mean_nu * m.mean_nu;
  }
  return m;
}

}  // namespace

PhaseMoments BlockWigner::moments() const {
  return moments_of(grid_, [&](std::size_t i) { return a_[i] + d_[i]; });
}

PhaseMoments BlockWigner::branch_moments(Spin spin) const {
  const auto& v = spin == Spin::up ? a_ : d_;
  return moments_of(grid_, [&](std::size_t i) { return v[i]; });
}

double BlockWigner::gs_fidelity() {
  flush_dissipation();
  std::vector<double> gmu(grid_.n), gnu(grid_.n);
  for (std::size_t j = 0; j < grid_.n; ++j) {
    gmu[j] = std::exp(-grid_.mu(j) * grid_.mu(j));
    gnu[j] = std::exp(-grid_.nu(j) * grid_.nu(j));
  }
  double s = 0.0;
  for (std::size_t j = 0; j < grid_.n; ++j) {
    if (gmu[j] == 0.0) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < grid_.n; ++k) row += (a_[index(j, k)] + d_[index(j, k)]) * gnu[k];
    s += row * gmu[j];
  }
  return 2.0 * s * grid_.spacing * grid_.spacing;
}

std::vector<double> BlockWigner::raw_position_marginal() {
  flush_dissipation();
  std::vector<double> p(grid_.n, 0.0);
  for (std::size_t j = 0; j < grid_.n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < grid_.n; ++k) s += a_[index(j, k)] + d_[index(j, k)];
    p[j] = s * grid_.spacing;
  }
  return p;
}

GridDistribution BlockWigner::position_marginal(const UniformGrid& target) {
  const auto p = raw_position_marginal();
  std::vector<double> values(target.size);
  for (std::size_t i = 0; i < target.size; ++i) {
    const double s = (target.at(i) - grid_.mu(0)) / grid_.spacing;
    if (s < 0 || s > static_cast<double>(grid_.n - 1)) continue;
    // Catmull-Rom; linear interpolation would add spacing^2 / 6 to the variance.
    const auto j = std::min(static_cast<std::size_t>(s), grid_.n - 2);
    const double t = s - static_cast<double>(j);
    const double p0 = j > 0 ? p[j - 1] : 0.0, p1 = p[j], p2 = p[j + 1];
    const double p3 = j + 2 < grid_.n ? p[j + 2] : 0.0;
    const double v = p1 + 0.5 * t * (p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
    values[i] = std::max(v, 0.0);
  }
  return GridDistribution(target, std::move(values));
}

void BlockWigner::check_trace(double before, const char* where) const {
  const double after = trace();
  if (!(std::abs(after - before) <= 1e-4))
    throw NumericalError(std::string(where) + ": trace drift " + std::to_string(after - before) +
                         " (before " + std::to_string(before) + ")");
}

// --- coherent evolution ------------------------------------------------------

template <class Prop>
void BlockWigner::apply_pointwise(const Prop& prop) {
  Workspace& w = ws();
  const std::size_t n = grid_.n, nn = n * n;
  const bool has_b = coherence_norm() > 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    w.ra[i] = a_[i];
    w.rd[i] = d_[i];
  }
  w.rows_bwd.execute(w.ra.data());
  w.rows_bwd.execute(w.rd.data());
  if (has_b) {
    std::copy(b_.begin(), b_.end(), w.rb.data());
    w.rows_bwd.execute(w.rb.data());
  }
  std::vector<double> y(n);
  for (std::size_t m = 0; m < n; ++m) y[m] = wavenumber(m, n, grid_.spacing);

  for (std::size_t j = 0; j < n; ++j) {
    const double mu = grid_.mu(j);
    const std::size_t row = j * n;
    for (std::size_t m = 0; m < n; ++m) {
      const Mat2 u1 = prop(mu + 0.5 * y[m]);
      const Mat2 u2 = prop(mu - 0.5 * y[m]);
      Mat2 rho{w.ra[row + m], 0.0, 0.0, w.rd[row + m]};
      if (has_b) {
        rho.b = w.rb[row + m];
        rho.c = std::conj(w.rb[row + (n - m) % n]);
      }
      const Mat2 out = u1 * rho * u2.adjoint();
      w.ra[row + m] = out.a;
      w.rd[row + m] = out.d;
      w.rb_out[row + m] = out.b;
    }
  }
  w.rows_fwd.execute(w.ra.data());
  w.rows_fwd.execute(w.rd.data());
  w.rows_fwd.execute(w.rb_out.data());
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < nn; ++i) {
    a_[i] = w.ra[i].real() * inv;
    d_[i] = w.rd[i].real() * inv;
    b_[i] = w.rb_out[i] * inv;
  }
}

void BlockWigner::evolve_pulse(const PulseSpec& pulse) {
  if (pulse.kind == EnvelopeKind::hard) {
    hard_flip();
    return;
  }
  pulse.validate();
  // Strang placement of the deferred dissipator around the pulse.
  pending_ += 0.5 * pulse.duration;
  flush_dissipation();
  const double before = trace();
  if (pulse.kind == EnvelopeKind::gaussian) {
    const PulseFamily& family = PulseFamily::shared(pulse.duration_ratio());
    apply_pointwise([&](double x) { return family.propagator(x, pulse, g_); });
  } else {
    const double tau = pulse.duration;
    apply_pointwise([&](double x) {
      return su2_exp(0.5 * g_ * (x - pulse.center) * tau, 0.5 * pulse.rabi * tau);
    });
  }
  check_trace(before, "evolve_pulse");
  pending_ += 0.5 * pulse.duration;
  recenter();
}

void BlockWigner::evolve_free(double t) {
  if (t < 0) throw InvalidArgument("evolve_free: negative duration");
  if (t == 0) return;
  pending_ += 0.5 * t;
  flush_dissipation();
  const double before = trace();
  apply_pointwise([&](double x) { return free_propagator(x, g_, t); });
  check_trace(before, "evolve_free");
  pending_ += 0.5 * t;
  recenter();
}

void BlockWigner::evolve_pulse_split(const PulseSpec& pulse, std::size_t steps) {
  if (steps == 0) throw InvalidArgument("evolve_pulse_split: steps must be positive");
  if (pulse.kind == EnvelopeKind::hard) {
    hard_flip();
    return;
  }
  pulse.validate();
  flush_dissipation();
  Workspace& w = ws();
  const std::size_t n = grid_.n, nn = n * n;
  const double dt = pulse.duration / static_cast<double>(steps);
  const double before = trace();

  std::vector<double> y(n);
  for (std::size_t m = 0; m < n; ++m) y[m] = wavenumber(m, n, grid_.spacing);
  // Half-step advection: up moves toward -nu, down toward +nu.
  auto advect = [&](double h) {
    const double shift = 0.5 * g_ * h;
    for (std::size_t i = 0; i < nn; ++i) {
      w.ra[i] = a_[i];
      w.rd[i] = d_[i];
    }
    w.rows_bwd.execute(w.ra.data());
    w.rows_bwd.execute(w.rd.data());
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t m = 0; m < n; ++m) {
        const auto ph = std::polar(1.0, shift * y[m]);
        w.ra[j * n + m] *= std::conj(ph);
        w.rd[j * n + m] *= ph;
      }
    w.rows_fwd.execute(w.ra.data());
    w.rows_fwd.execute(w.rd.data());
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < nn; ++i) {
      a_[i] = w.ra[i].real() * inv;
      d_[i] = w.rd[i].real() * inv;
    }
  };
  for (std::size_t s = 0; s < steps; ++s) {
    advect(0.5 * dt);
    const double omega = pulse.amplitude((static_cast<double>(s) + 0.5) * dt);
    for (std::size_t j = 0; j < n; ++j) {
      const Mat2 u = su2_exp(0.5 * g_ * (grid_.mu(j) - pulse.center) * dt, 0.5 * omega * dt);
      const Mat2 ud = u.adjoint();
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = index(j, k);
        const Mat2 rho{a_[i], b_[i], std::conj(b_[i]), d_[i]};
        const Mat2 out = u * rho * ud;
        a_[i] = out.a.real();
        d_[i] = out.d.real();
        b_[i] = out.b;
      }
    }
    advect(0.5 * dt);
  }
  check_trace(before, "evolve_pulse_split");
  pending_ += pulse.duration;
  recenter();
}

void BlockWigner::hard_flip() {
  std::swap(a_, d_);
  for (auto& v : b_) v = std::conj(v);
}

// --- measurement -------------------------------------------------------------

double BlockWigner::readout_probability(int observed, double f) const {
  if (observed != 0 && observed != 1) throw InvalidArgument("observed outcome must be 0 or 1");
  if (!(f >= 0.5 && f <= 1.0)) throw InvalidArgument("readout fidelity must lie in [1/2, 1]");
  const double up = population_up(), down = population_down();
  const double total = up + down;
  const double p1 = (f * up + (1.0 - f) * down) / total;
  return observed == 1 ? p1 : 1.0 - p1;
}

double BlockWigner::collapse(int observed, double f) {
  const double p = readout_probability(observed, f);
  if (!(p > 0)) throw ImpossibleOutcome("readout outcome has zero probability in the simulator");
  const double wa = (observed == 1 ? f : 1.0 - f) / (p * trace());
  const double wd = (observed == 1 ? 1.0 - f : f) / (p * trace());
  for (double& v : a_) v *= wa;
  for (double& v : d_) v *= wd;
  std::fill(b_.begin(), b_.end(), std::complex<double>(0.0));
  recenter();
  return p;
}

int BlockWigner::readout(double f, std::mt19937_64& rng, double* probability) {
  const double p1 = readout_probability(1, f);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int observed = uni(rng) < p1 ? 1 : 0;
  const double p = collapse(observed, f);
  if (probability) *probability = p;
  return observed;
}

void BlockWigner::reset_tls() {
  for (std::size_t i = 0; i < a_.size(); ++i) {
    d_[i] += a_[i];
    a_[i] = 0.0;
  }
  std::fill(b_.begin(), b_.end(), std::complex<double>(0.0));
}

// --- geometry ----------------------------------------------------------------

void BlockWigner::quarter_rotation(double duration) {
  if (coherence_norm() > 1e-12)
    throw InvalidArgument("quarter_rotation: spin coherences present; reset the TLS first");
  pending_ += duration;
  flush_dissipation();
  const std::size_t n = grid_.n;
  auto remap = [&](std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t jp = 0; jp < n; ++jp)
      for (std::size_t kp = 1; kp < n; ++kp) out[jp * n + kp] = v[(n - kp) * n + jp];
    v.swap(out);
  };
  remap(a_);
  remap(d_);
  const double mu_c = grid_.center_mu;
  grid_.center_mu = grid_.center_nu;
  grid_.center_nu = -mu_c;
}

void BlockWigner::displace(double dmu, double dnu) {
  flush_dissipation();
  const double cells_mu = std::round(dmu / grid_.spacing);
  const double cells_nu = std::round(dnu / grid_.spacing);
  grid_.center_mu += cells_mu * grid_.spacing;
  grid_.center_nu += cells_nu * grid_.spacing;
  const double rmu = dmu - cells_mu * grid_.spacing;
  const double rnu = dnu - cells_nu * grid_.spacing;
  if (rmu == 0.0 && rnu == 0.0) return;

  Workspace& w = ws();
  const std::size_t n = grid_.n, nn = n * n;
  std::vector<std::complex<double>> phase(nn);
  for (std::size_t j = 0; j < n; ++j) {
    const double kmu = wavenumber(j, n, grid_.spacing);
    for (std::size_t k = 0; k < n; ++k)
      phase[j * n + k] = std::polar(1.0, -(kmu * rmu + wavenumber(k, n, grid_.spacing) * rnu)) /
                         static_cast<double>(nn);
  }
  auto shift_real = [&](std::vector<double>& v) {
    for (std::size_t i = 0; i < nn; ++i) w.s1[i] = v[i];
    w.grid_fwd.execute(w.s1.data());
    for (std::size_t i = 0; i < nn; ++i) w.s1[i] *= phase[i];
    w.grid_bwd.execute(w.s1.data());
    for (std::size_t i = 0; i < nn; ++i) v[i] = w.s1[i].real();
  };
  shift_real(a_);
  shift_real(d_);
  if (coherence_norm() > 0) {
    std::copy(b_.begin(), b_.end(), w.s1.data());
    w.grid_fwd.execute(w.s1.data());
    for (std::size_t i = 0; i < nn; ++i) w.s1[i] *= phase[i];
    w.grid_bwd.execute(w.s1.data());
    std::copy(w.s1.data(), w.s1.data() + nn, b_.begin());
  }
}

void BlockWigner::recenter() {
  const PhaseMoments m = moments();
  if (!(m.trace > 0)) return;
  const auto smu = static_cast<std::ptrdiff_t>(std::lround((m.mean_mu - grid_.center_mu) / grid_.spacing));
  const auto snu = static_cast<std::ptrdiff_t>(std::lround((m.mean_nu - grid_.center_nu) / grid_.spacing));
  if (smu == 0 && snu == 0) return;
  const auto n = static_cast<std::ptrdiff_t>(grid_.n);
  auto roll = [&](auto& v) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    std::vector<T> out(v.size(), T{});
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      const std::ptrdiff_t js = j + smu;
      if (js < 0 || js >= n) continue;
      for (std::ptrdiff_t k = 0; k < n; ++k) {
        const std::ptrdiff_t ks = k + snu;
        if (ks < 0 || ks >= n) continue;
        out[static_cast<std::size_t>(j * n + k)] = v[static_cast<std::size_t>(js * n + ks)];
      }
    }
    v.swap(out);
  };
  roll(a_);
  roll(d_);
  roll(b_);
  grid_.center_mu += static_cast<double>(smu) * grid_.spacing;
  grid_.center_nu += static_cast<double>(snu) * grid_.spacing;
}

// --- dissipation -------------------------------------------------------------

void BlockWigner::flush_dissipation() {
  const double t = pending_;
  pending_ = 0.0;
  dissipate(t);
}

namespace {

// Six-point Lagrange resampling of every line along one axis at index positions `u`.
template <class T>
void resample_axis(std::vector<T>& v, std::size_t n, bool along_rows, const std::vector<double>& u) {
  std::vector<T> out(v.size(), T{});
  const auto ni = static_cast<std::ptrdiff_t>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = u[j];
    const auto i0 = static_cast<std::ptrdiff_t>(std::floor(x));
    if (i0 + 3 < 0 || i0 - 2 >= ni) continue;
    double wts[6];
    for (int a = 0; a < 6; ++a) {
      double l = 1.0;
      for (int b = 0; b < 6; ++b)
        if (b != a) l *= (x - static_cast<double>(i0 - 2 + b)) / static_cast<double>(a - b);
      wts[a] = l;
    }
    for (std::size_t k = 0; k < n; ++k) {
      T acc{};
      for (int a = 0; a < 6; ++a) {
        const std::ptrdiff_t src = i0 - 2 + a;
        if (src < 0 || src >= ni) continue;
        const auto s = static_cast<std::size_t>(src);
        acc += wts[a] * (along_rows ? v[s * n + k] : v[k * n + s]);
      }
      (along_rows ? out[j * n + k] : out[k * n + j]) = acc;
    }
  }
  v.swap(out);
}

}  // namespace

// Exact OU propagator per substep: W_h(x) = [s^2 W_0(s x)] * N(0, (nbar + 1/2)(1 - e^{-gamma h})),
// s = e^{gamma h / 2}. Substeps keep the contraction resolvable on the grid.
void BlockWigner::dissipate(double t) {
  if (!diss_.enabled() || !(t > 0)) return;
  Workspace& w = ws();
  const std::size_t n = grid_.n, nn = n * n;
  const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(diss_.gamma * t / 0.05)));
  const double h = t / static_cast<double>(substeps);
  const double scale = std::exp(0.5 * diss_.gamma * h);
  const double blur = (diss_.nbar_bath + 0.5) * -std::expm1(-diss_.gamma * h);

  std::vector<double> umu(n), unu(n);
  for (std::size_t j = 0; j < n; ++j) {
    umu[j] = (scale * grid_.mu(j) - grid_.mu(0)) / grid_.spacing;
    unu[j] = (scale * grid_.nu(j) - grid_.nu(0)) / grid_.spacing;
  }
  std::vector<double> kernel(nn);
  for (std::size_t j = 0; j < n; ++j) {
    const double kj = wavenumber(j, n, grid_.spacing);
    for (std::size_t k = 0; k < n; ++k) {
      const double kk = wavenumber(k, n, grid_.spacing);
      kernel[j * n + k] = std::exp(-0.5 * blur * (kj * kj + kk * kk)) * scale * scale / static_cast<double>(nn);
    }
  }
  auto smooth = [&] {
    w.grid_fwd.execute(w.s1.data());
    for (std::size_t i = 0; i < nn; ++i) w.s1[i] *= kernel[i];
    w.grid_bwd.execute(w.s1.data());
  };
  auto real_block = [&](std::vector<double>& v) {
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) return;
    for (std::size_t s = 0; s < substeps; ++s) {
      const double before = std::accumulate(v.begin(), v.end(), 0.0);
      resample_axis(v, n, true, umu);
      resample_axis(v, n, false, unu);
      // The exact map keeps each block's weight; undo the interpolation drift.
      const double after = std::accumulate(v.begin(), v.end(), 0.0) * scale * scale;
      const double fix = after != 0.0 ? before / after : 1.0;
      for (std::size_t i = 0; i < nn; ++i) w.s1[i] = v[i] * fix;
      smooth();
      for (std::size_t i = 0; i < nn; ++i) v[i] = w.s1[i].real();
    }
  };
  real_block(a_);
  real_block(d_);
  if (coherence_norm() > 0) {
    for (std::size_t s = 0; s < substeps; ++s) {
      resample_axis(b_, n, true, umu);
      resample_axis(b_, n, false, unu);
      std::copy(b_.begin(), b_.end(), w.s1.data());
      smooth();
      std::copy(w.s1.data(), w.s1.data() + nn, b_.begin());
    }
  }
}

// --- export ------------------------------------------------------------------

void BlockWigner::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << std::setprecision(12) << "mu,nu,W_upup,W_downdown,Re_W_updown,Im_W_updown\n";
  for (std::size_t j = 0; j < grid_.n; ++j)
    for (std::size_t k = 0; k < grid_.n; ++k) {
      const std::size_t i = index(j, k);
      out << grid_.mu(j) << ',' << grid_.nu(k) << ',' << a_[i] << ',' << d_[i] << ',' << b_[i].real()
          << ',' << b_[i].imag() << '\n';
    }
}

void BlockWigner::write_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const char magic[4] = {'L', 'E', 'V', 'W'};
  const std::uint32_t version = 1;
  const std::uint64_t n = grid_.n;
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (double v : {grid_.spacing, grid_.center_mu, grid_.center_nu, g_})
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  out.write(reinterpret_cast<const char*>(a_.data()), static_cast<std::streamsize>(a_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(d_.data()), static_cast<std::streamsize>(d_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(b_.data()),
            static_cast<std::streamsize>(b_.size() * sizeof(std::complex<double>)));
}

}  // namespace levcool
