#include "levcool/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>
#include <ostream>

#include "levcool/errors.hpp"

namespace levcool {

namespace {

constexpr double kPi = std::numbers::pi;

/// Peak of the area-pi gaussian truncated to [0, ratio sigma_p] (sigma_p = 1).
double gaussian_peak(double ratio) {
  return kPi / (std::sqrt(2.0 * kPi) * std::erf(ratio / (2.0 * std::numbers::sqrt2)));
}

/// exp(-i n.sigma) for a real Pauli vector n.
Mat2 pauli_exp(double nx, double ny, double nz) {
  const double theta = std::sqrt(nx * nx + ny * ny + nz * nz);
  const double c = std::cos(theta);
  const double s = theta > 1e-300 ? std::sin(theta) / theta : 1.0;
  return {cplx(c, -s * nz), cplx(-s * ny, -s * nx), cplx(s * ny, -s * nx), cplx(c, s * nz)};
}

/// Magnus-4 propagation of H = delta sigma_z / 2 + env(t) sigma_x / 2.
template <class Envelope>
Mat2 magnus4(double delta, const Envelope& env, double t0, double t1, std::size_t steps) {
  Mat2 u = Mat2::identity();
  if (steps == 0 || t1 <= t0) return u;
  const double h = (t1 - t0) / static_cast<double>(steps);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double comm = std::sqrt(3.0) * h * h / 24.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    const double w1 = env(t + c1 * h);
    const double w2 = env(t + c2 * h);
    u = pauli_exp(0.25 * h * (w1 + w2), comm * delta * (w1 - w2), 0.5 * h * delta) * u;
  }
  return u;
}

std::size_t step_count(const PulseSpec& p, double t0, double t1, std::size_t per_sigma) {
  const double scale = p.kind == EnvelopeKind::gaussian ? p.sigma_p : p.duration;
  const double h = scale / static_cast<double>(per_sigma);
  return static_cast<std::size_t>(std::ceil((t1 - t0) / h - 1e-9));
}

}  // namespace

double Mat2::unitarity_error() const {
  const Mat2 p = adjoint() * (*this);
  return std::max({std::abs(p.a - 1.0), std::abs(p.b), std::abs(p.c), std::abs(p.d - 1.0)});
}

Mat2 su2_exp(double hz, double hx) { return pauli_exp(hx, 0.0, hz); }

// --- PulseSpec ---------------------------------------------------------------

PulseSpec PulseSpec::gaussian(double center, double width, double g, double alpha,
                              double duration_ratio) {
  if (!(width > 0) || !(g > 0) || !(alpha > 0))
    throw InvalidArgument("PulseSpec::gaussian: width, g and alpha must be positive");
  PulseSpec p = gaussian_envelope(center, 1.0 / (g * width * std::sqrt(2.0 * alpha)),
                                  duration_ratio);
  p.width = width;
  return p;
}

PulseSpec PulseSpec::gaussian_envelope(double center, double sigma_p, double duration_ratio) {
  PulseSpec p;
  p.kind = EnvelopeKind::gaussian;
  p.center = center;
  p.sigma_p = sigma_p;
  p.duration = duration_ratio * sigma_p;
  p.width = 0.0;
  p.validate();
  return p;
}

PulseSpec PulseSpec::square(double center, double rabi) {
  if (!(rabi > 0)) throw InvalidArgument("PulseSpec::square: rabi must be positive");
  PulseSpec p;
  p.kind = EnvelopeKind::square;
  p.center = center;
  p.rabi = rabi;
  p.duration = kPi / rabi;
  p.sigma_p = p.duration;
  p.width = 0.0;
  return p;
}

PulseSpec PulseSpec::hard() {
  PulseSpec p;
  p.kind = EnvelopeKind::hard;
  p.duration = 0.0;
  p.sigma_p = 0.0;
  p.width = 0.0;
  return p;
}

double PulseSpec::amplitude(double t) const {
  if (t < 0.0 || t > duration) return 0.0;
  switch (kind) {
    case EnvelopeKind::gaussian: {
      const double s = (t - 0.5 * duration) / sigma_p;
      return gaussian_peak(duration / sigma_p) / sigma_p * std::exp(-0.5 * s * s);
    }
    case EnvelopeKind::square:
      return rabi;
    case EnvelopeKind::hard:
      return 0.0;
  }
  return 0.0;
}

void PulseSpec::validate() const {
  if (kind == EnvelopeKind::gaussian) {
    if (!(sigma_p > 0) || !(duration > 0))
      throw InvalidArgument("gaussian pulse: sigma_p and duration must be positive");
    if (duration < kMinDurationRatio * sigma_p)
      throw InvalidArgument("gaussian pulse: duration below 6 sigma_p causes windowing");
  } else if (kind == EnvelopeKind::square) {
    if (!(rabi > 0) || !(duration > 0)) throw InvalidArgument("square pulse: rabi must be positive");
  }
}

double SampledEnvelope::area() const {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  // Simpson on the even part, trapezoid on a trailing odd interval.
  double acc = 0.0;
  std::size_t last = (n - 1) % 2 == 0 ? n - 1 : n - 2;
  for (std::size_t k = 0; k + 2 <= last; k += 2)
    acc += values[k] + 4.0 * values[k + 1] + values[k + 2];
  acc *= dt / 3.0;
  if (last != n - 1) acc += 0.5 * dt * (values[n - 2] + values[n - 1]);
  return acc;
}

SampledEnvelope gaussian_envelope(double sigma_p, double tau, std::size_t samples_per_sigma) {
  if (!(sigma_p > 0) || !(tau > 0))
    throw InvalidArgument("gaussian_envelope: sigma_p and tau must be positive");
  if (tau < kMinDurationRatio * sigma_p)
    throw InvalidArgument("gaussian_envelope: tau < 6 sigma_p (windowing regime)");
  PulseSpec p = PulseSpec::gaussian_envelope(0.0, sigma_p, tau / sigma_p);
  const auto n = static_cast<std::size_t>(std::ceil(tau / sigma_p * samples_per_sigma));
  SampledEnvelope env;
  env.dt = tau / static_cast<double>(n);
  env.values.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) env.values[k] = p.amplitude(env.dt * static_cast<double>(k));
  return env;
}

// --- propagators -------------------------------------------------------------

Mat2 tls_propagator(double z, const PulseSpec& pulse, double g, const PropagatorOptions& options) {
  return tls_propagator(z, pulse, g, 0.0, pulse.duration, options);
}

Mat2 tls_propagator(double z, const PulseSpec& pulse, double g, double t0, double t1,
                    const PropagatorOptions& options) {
  if (pulse.kind == EnvelopeKind::hard) return {cplx(0.0), cplx(0.0, -1.0), cplx(0.0, -1.0), cplx(0.0)};
  pulse.validate();
  t0 = std::clamp(t0, 0.0, pulse.duration);
  t1 = std::clamp(t1, t0, pulse.duration);
  const double delta = g * (z - pulse.center);
  const std::size_t steps = step_count(pulse, t0, t1, options.steps_per_sigma);
  Mat2 u = magnus4(delta, [&](double t) { return pulse.amplitude(t); }, t0, t1, steps);
  const double err = u.unitarity_error();
  if (err > options.unitarity_tolerance)
    throw NumericalError("tls_propagator: unitarity drift " + std::to_string(err));
  return u;
}

Mat2 free_propagator(double z, double g, double t) {
  const double phase = 0.5 * g * z * t;
  return {std::polar(1.0, -phase), cplx(0.0), cplx(0.0), std::polar(1.0, phase)};
}

double square_profile_analytic(double rabi, double z, double g) {
  if (!(rabi > 0)) throw InvalidArgument("square_profile_analytic: rabi must be positive");
  const double delta = g * z;
  const double gen2 = rabi * rabi + delta * delta;
  const double s = std::sin(std::sqrt(gen2) / rabi * kPi / 2.0);
  return rabi * rabi / gen2 * s * s;
}

// --- Gaussian fit ------------------------------------------------------------

GaussianFit fit_unit_gaussian(std::span<const double> z, std::span<const double> y) {
  if (z.size() != y.size() || z.size() < 3) throw InvalidArgument("fit_unit_gaussian: bad input");
  const std::size_t n = z.size();
  // Seed from the peak and the half-maximum crossings.
  const auto peak = static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
  double c = z[peak];
  double above = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (y[i] >= 0.5 * y[peak]) above += 1.0;
  const double dz = std::abs(z[1] - z[0]);
  double s = std::max(above * dz / 2.3548, dz);

  auto cost = [&](double cc, double ss) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::exp(-(z[i] - cc) * (z[i] - cc) / (2 * ss * ss)) - y[i];
      acc += r * r;
    }
    return acc;
  };

  double lambda = 1e-3;
  double current = cost(c, s);
  for (int iter = 0; iter < 200; ++iter) {
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = z[i] - c;
      const double e = std::exp(-d * d / (2 * s * s));
      const double r = e - y[i];
      const double jc = e * d / (s * s);
      const double js = e * d * d / (s * s * s);
      jtj00 += jc * jc;
      jtj01 += jc * js;
      jtj11 += js * js;
      jtr0 += jc * r;
      jtr1 += js * r;
    }
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      const double a00 = jtj00 * (1 + lambda), a11 = jtj11 * (1 + lambda);
      const double det = a00 * a11 - jtj01 * jtj01;
      if (det == 0.0) break;
      const double dc = -(a11 * jtr0 - jtj01 * jtr1) / det;
      const double ds = -(a00 * jtr1 - jtj01 * jtr0) / det;
      const double ns = s + ds;
      if (ns > 0) {
        const double trial = cost(c + dc, ns);
        if (trial <= current) {
          const bool tiny = std::abs(dc) < 1e-14 * (1 + std::abs(c)) && std::abs(ds) < 1e-14 * s;
          c += dc;
          s = ns;
          current = trial;
          lambda = std::max(lambda / 10, 1e-12);
          improved = true;
          if (tiny) iter = 1 << 20;
          break;
        }
      }
      lambda *= 10;
    }
    if (!improved) break;
  }
  GaussianFit fit{c, s * s, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    fit.max_residual = std::max(
        fit.max_residual, std::abs(std::exp(-(z[i] - c) * (z[i] - c) / (2 * s * s)) - y[i]));
  return fit;
}

// --- InversionProfile --------------------------------------------------------

InversionProfile InversionProfile::gaussian(double center, double width) {
  if (!(width > 0)) throw InvalidArgument("InversionProfile::gaussian: width must be positive");
  InversionProfile p;
  p.kind_ = Kind::gaussian;
  p.center_ = center;
  p.width_ = width;
  return p;
}

InversionProfile InversionProfile::constant(double value) {
  if (!(value >= 0 && value <= 1)) throw InvalidArgument("InversionProfile::constant: value outside [0, 1]");
  InversionProfile p;
  p.kind_ = Kind::constant;
  p.value_ = value;
  p.width_ = 0.0;
  return p;
}

InversionProfile InversionProfile::sampled(double center, double scale, UniformGrid u_grid,
                                           std::vector<double> values) {
  if (values.size() != u_grid.size || u_grid.size < 2)
    throw InvalidArgument("InversionProfile::sampled: size mismatch");
  InversionProfile p;
  p.kind_ = Kind::sampled;
  p.center_ = center;
  p.scale_ = scale;
  p.u_grid_ = u_grid;
  p.values_ = std::move(values);
  for (double& v : p.values_) v = std::clamp(v, 0.0, 1.0);
  p.width_ = 0.0;
  return p;
}

double InversionProfile::up(double z) const {
  switch (kind_) {
    case Kind::gaussian: {
      const double d = (z - center_) / width_;
      return std::exp(-0.5 * d * d);
    }
    case Kind::constant:
      return value_;
    case Kind::sampled: {
      const double s = ((z - center_) * scale_ - u_grid_.start) / u_grid_.step;
      if (s < 0.0 || s > static_cast<double>(u_grid_.size - 1)) return 0.0;
      const auto i = std::min(static_cast<std::size_t>(s), u_grid_.size - 2);
      const double t = s - static_cast<double>(i);
      return (1.0 - t) * values_[i] + t * values_[i + 1];
    }
  }
  return 0.0;
}

void InversionProfile::sample_up(const UniformGrid& grid, std::vector<double>& out) const {
  out.resize(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) out[i] = up(grid.at(i));
}

void InversionProfile::write_csv(std::ostream& out) const {
  out << std::setprecision(17);
  if (fit) {
    out << "# fit_center," << fit->center << "\n# fit_variance," << fit->variance
        << "\n# fit_max_residual," << fit->max_residual << "\n# alpha," << alpha << '\n';
  }
  out << "z,I_up\n";
  if (kind_ != Kind::sampled) return;
  for (std::size_t i = 0; i < u_grid_.size; ++i)
    out << center_ + u_grid_.at(i) / scale_ << ',' << values_[i] << '\n';
}

InversionProfile inversion_profile(const PulseSpec& pulse, double g, const UniformGrid& z_grid,
                                   const PropagatorOptions& options) {
  if (pulse.kind == EnvelopeKind::hard) return InversionProfile::constant(1.0);
  pulse.validate();
  // Nominal width when the pulse carries none: alpha ~ 1.15, or Omega / g for square pulses.
  double width = pulse.width;
  if (!(width > 0))
    width = pulse.kind == EnvelopeKind::square ? pulse.rabi / g : 1.0 / (g * pulse.sigma_p * std::sqrt(2.3));
  if (z_grid.front() > pulse.center - 6 * width || z_grid.back() < pulse.center + 6 * width)
    throw InvalidArgument("inversion_profile: grid must span +-6 sigma_I around the centre");
  std::vector<double> values(z_grid.size);
  for (std::size_t i = 0; i < z_grid.size; ++i)
    values[i] = std::norm(tls_propagator(z_grid.at(i), pulse, g, options).b);

  const auto z = z_grid.points();
  const GaussianFit fit = fit_unit_gaussian(z, values);
  UniformGrid u_grid{z_grid.start - pulse.center, z_grid.step, z_grid.size};
  auto profile = InversionProfile::sampled(pulse.center, 1.0, u_grid, std::move(values));
  profile.fit = fit;
  if (pulse.kind == EnvelopeKind::gaussian)
    profile.alpha = 1.0 / (2.0 * g * g * pulse.sigma_p * pulse.sigma_p * fit.variance);
  profile.gaussian_ok = fit.max_residual <= kMaxGaussianResidual;
  return profile;
}

// --- PulseFamily -------------------------------------------------------------

PulseFamily::PulseFamily(double duration_ratio, double u_max, double u_step,
                         std::size_t steps_per_sigma)
    : ratio_(duration_ratio), u_step_(u_step) {
  if (duration_ratio < kMinDurationRatio) throw InvalidArgument("PulseFamily: ratio below 6");
  if (!(u_max > 0) || !(u_step > 0)) throw InvalidArgument("PulseFamily: bad table range");
  half_ = static_cast<std::size_t>(std::ceil(u_max / u_step));
  a_.resize(half_ + 1);
  b_.resize(half_ + 1);

  // Envelope samples at the Gauss points are shared by every detuning.
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(ratio_ * static_cast<double>(steps_per_sigma)));
  const double h = ratio_ / static_cast<double>(steps);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double peak = gaussian_peak(ratio_);
  std::vector<double> w1(steps), w2(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = h * static_cast<double>(k);
    const double s1 = t + c1 * h - 0.5 * ratio_, s2 = t + c2 * h - 0.5 * ratio_;
    w1[k] = peak * std::exp(-0.5 * s1 * s1);
    w2[k] = peak * std::exp(-0.5 * s2 * s2);
  }
  const double comm = std::sqrt(3.0) * h * h / 24.0;
  for (std::size_t j = 0; j <= half_; ++j) {
    const double u = u_step_ * static_cast<double>(j);
    Mat2 m = Mat2::identity();
    for (std::size_t k = 0; k < steps; ++k)
      m = pauli_exp(0.25 * h * (w1[k] + w2[k]), comm * u * (w1[k] - w2[k]), 0.5 * h * u) * m;
    a_[j] = std::polar(1.0, 0.5 * u * ratio_) * m.a;
    b_[j] = m.c;
  }
  tail_phase_ = std::arg(a_[half_]);

  // Universal profile and its gaussian fit over +-6 fitted widths.
  std::vector<double> us, is;
  for (std::size_t j = 0; j <= half_; ++j) {
    const double u = u_step_ * static_cast<double>(j);
    if (u > 4.5) break;
    const double tr = std::norm(b_[j]);
    if (j > 0) {
      us.insert(us.begin(), -u);
      is.insert(is.begin(), tr);
    }
    us.push_back(u);
    is.push_back(tr);
  }
  fit_ = fit_unit_gaussian(us, is);
  alpha_ = 1.0 / (2.0 * fit_.variance);
}

Mat2 PulseFamily::symmetric(double u) const {
  const bool negative = u < 0;
  const double au = std::abs(u);
  cplx a, b;
  const double umax = u_step_ * static_cast<double>(half_);
  if (au >= umax) {
    a = std::polar(1.0, tail_phase_ * umax / au);
    b = 0.0;
  } else {
    const double s = au / u_step_;
    const auto i = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(i);
    auto at = [&](std::ptrdiff_t k, const std::vector<cplx>& v, bool is_b) -> cplx {
      if (k < 0) return is_b ? -std::conj(v[static_cast<std::size_t>(-k)]) : std::conj(v[static_cast<std::size_t>(-k)]);
      return v[std::min(static_cast<std::size_t>(k), half_)];
    };
    const auto k = static_cast<std::ptrdiff_t>(i);
    auto cubic = [&](const std::vector<cplx>& v, bool is_b) {
      const cplx p0 = at(k - 1, v, is_b), p1 = at(k, v, is_b), p2 = at(k + 1, v, is_b),
                 p3 = at(k + 2, v, is_b);
      // Catmull-Rom.
      return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                             t * (3.0 * (p1 - p2) + p3 - p0)));
    };
    a = cubic(a_, false);
    b = cubic(b_, true);
  }
  if (negative) {
    a = std::conj(a);
    b = -std::conj(b);
  }
  return {a, -std::conj(b), b, std::conj(a)};
}

double PulseFamily::transition(double u) const { return std::norm(symmetric(u).c); }

Mat2 PulseFamily::propagator(double z, const PulseSpec& pulse, double g) const {
  const double u = g * (z - pulse.center) * pulse.sigma_p;
  Mat2 v = symmetric(u);
  const cplx phase = std::polar(1.0, -0.5 * u * ratio_);
  v.a *= phase;
  v.d *= std::conj(phase);
  return v;
}

InversionProfile PulseFamily::profile(const PulseSpec& pulse, double g) const {
  const double span = 8.0;  // |u| range, ~12 fitted widths
  const auto grid = UniformGrid::spanning(-span, span, static_cast<std::size_t>(2 * span / u_step_) + 1);
  std::vector<double> values(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) values[i] = transition(grid.at(i));
  auto p = InversionProfile::sampled(pulse.center, g * pulse.sigma_p, grid, std::move(values));
  p.fit = GaussianFit{pulse.center, fit_.variance / (g * g * pulse.sigma_p * pulse.sigma_p),
                      fit_.max_residual};
  p.alpha = alpha_;
  p.gaussian_ok = fit_.max_residual <= kMaxGaussianResidual;
  return p;
}

const PulseFamily& PulseFamily::standard() { return shared(kDefaultDurationRatio); }

const PulseFamily& PulseFamily::shared(double duration_ratio) {
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<PulseFamily>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[duration_ratio];
  if (!slot) slot = std::make_unique<PulseFamily>(duration_ratio);
  return *slot;
}

// --- backaction --------------------------------------------------------------

double detuning_offset(double sigma, double sigma_i, double p_up) {
  if (!(sigma > 0) || !(sigma_i > 0)) throw InvalidArgument("detuning_offset: widths must be positive");
  if (!(p_up > 0 && p_up < 1)) throw InvalidArgument("detuning_offset: p_up must lie in (0, 1)");
  const double var = sigma * sigma + sigma_i * sigma_i;
  const double arg = p_up * std::sqrt(var / (sigma_i * sigma_i));
  if (arg > 1.0 + 1e-12)
    throw DetuningUndefined("detuning undefined: p_up sqrt((s^2 + s_I^2)/s_I^2) = " +
                            std::to_string(arg) + " exceeds 1");
  if (arg >= 1.0) return 0.0;
  return std::sqrt(-2.0 * var * std::log(arg));
}

BackactionPoint branch_displacement_at(const PulseSpec& pulse, double g, double t,
                                       double state_center, double state_sigma,
                                       std::size_t z_points, const PropagatorOptions& options) {
  if (!(state_sigma > 0) || z_points < 9) throw InvalidArgument("branch_displacement: bad test state");
  const auto grid = UniformGrid::centered(state_center, 8.0 * state_sigma, z_points);
  std::vector<cplx> up(z_points), down(z_points);
  std::vector<double> weight(z_points);
  for (std::size_t i = 0; i < z_points; ++i) {
    const double z = grid.at(i);
    const Mat2 u = pulse.kind == EnvelopeKind::gaussian || pulse.kind == EnvelopeKind::square
                       ? tls_propagator(z, pulse, g, 0.0, t, options)
                       : free_propagator(z, g, t);
    up[i] = u.b;    // <up|U|down>
    down[i] = u.d;  // <down|U|down>
    const double d = (z - state_center) / state_sigma;
    weight[i] = std::exp(-0.5 * d * d);
  }
  // <p> = int P Im(conj(a) a') / int P |a|^2 with fourth-order differences.
  auto shift = [&](const std::vector<cplx>& a) {
    double num = 0.0, den = 0.0;
    const double h = grid.step;
    for (std::size_t i = 2; i + 2 < z_points; ++i) {
      const cplx da = (a[i - 2] - 8.0 * a[i - 1] + 8.0 * a[i + 1] - a[i + 2]) / (12.0 * h);
      num += weight[i] * std::imag(std::conj(a[i]) * da);
      den += weight[i] * std::norm(a[i]);
    }
    return den > 0 ? num / den : 0.0;
  };
  return {t, shift(up), shift(down)};
}

BackactionPoint branch_displacement(const PulseSpec& pulse, double g, double state_center,
                                    double state_sigma, std::size_t z_points,
                                    const PropagatorOptions& options) {
  auto p = branch_displacement_at(pulse, g, pulse.duration, state_center, state_sigma, z_points, options);
  p.duration = pulse.duration;
  return p;
}

BackactionCalibration calibrate_backaction(const CalibrationOptions& opt) {
  const double alpha = opt.alpha > 0 ? opt.alpha : PulseFamily::standard().alpha();
  std::vector<double> durations = opt.durations;
  if (durations.empty()) {
    for (int k = 0; k < 8; ++k) durations.push_back(0.7 * std::pow(10.0, k / 7.0));
  }
  BackactionCalibration cal;
  cal.duration_ratio = opt.duration_ratio;
  cal.geometry = opt.geometry;
  for (double tau : durations) {
    const double sigma_p = tau / opt.duration_ratio;
    const double sigma_i = 1.0 / (opt.g * sigma_p * std::sqrt(2.0 * alpha));
    PulseSpec pulse = PulseSpec::gaussian_envelope(0.0, sigma_p, opt.duration_ratio);
    pulse.width = sigma_i;
    const double sigma = sigma_i / opt.geometry.width_factor;
    const double offset = detuning_offset(sigma, sigma_i, opt.geometry.p_up);
    cal.points.push_back(branch_displacement(pulse, opt.g, -offset, sigma, opt.z_points, opt.propagator));
    cal.max_up_shift = std::max(cal.max_up_shift, std::abs(cal.points.back().up_shift));
  }
  // Ordinary least squares for down_shift(tau).
  const double n = static_cast<double>(cal.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : cal.points) {
    sx += p.duration;
    sy += p.down_shift;
    sxx += p.duration * p.duration;
    sxy += p.duration * p.down_shift;
  }
  cal.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  cal.intercept = (sy - cal.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (const auto& p : cal.points) {
    const double r = p.down_shift - (cal.slope * p.duration + cal.intercept);
    ss_res += r * r;
    ss_tot += (p.down_shift - ybar) * (p.down_shift - ybar);
  }
  cal.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (cal.max_up_shift > opt.up_tolerance)
    throw NumericalError("calibrate_backaction: spin-up branch displaced by " +
                         std::to_string(cal.max_up_shift));
  return cal;
}

void BackactionCalibration::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "levcool-backaction";
  j["version"] = 1;
  j["duration_ratio"] = duration_ratio;
  j["geometry"] = {{"width_factor", geometry.width_factor}, {"p_up", geometry.p_up}};
  j["slope"] = slope;
  j["intercept"] = intercept;
  j["r_squared"] = r_squared;
  j["max_up_shift"] = max_up_shift;
  for (const auto& p : points)
    j["points"].push_back({{"duration", p.duration}, {"up_shift", p.up_shift}, {"down_shift", p.down_shift}});
  std::ofstream file(path);
  if (!file) throw Error("cannot write calibration '" + path + "'");
  file << std::setprecision(17) << j.dump(2) << '\n';
}

BackactionCalibration BackactionCalibration::load(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw InvalidArgument("cannot open calibration '" + path + "'");
  nlohmann::json j;
  try {
    file >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed calibration '" + path + "': " + e.what());
  }
  if (j.value("format", "") != "levcool-backaction" || j.value("version", 0) != 1)
    throw InvalidArgument("calibration '" + path + "' has an unsupported format/version");
  BackactionCalibration c;
  c.duration_ratio = j.at("duration_ratio").get<double>();
  c.geometry.width_factor = j.at("geometry").at("width_factor").get<double>();
  c.geometry.p_up = j.at("geometry").at("p_up").get<double>();
  c.slope = j.at("slope").get<double>();
  c.intercept = j.at("intercept").get<double>();
  c.r_squared = j.at("r_squared").get<double>();
  c.max_up_shift = j.at("max_up_shift").get<double>();
  if (j.contains("points"))
    for (const auto& p : j["points"])
      c.points.push_back({p.at("duration").get<double>(), p.at("up_shift").get<double>(),
                          p.at("down_shift").get<double>()});
  return c;
}

}  // namespace levcool
