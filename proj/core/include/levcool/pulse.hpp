#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levcool/grid_distribution.hpp"

namespace levcool {

using cplx = std::complex<double>;

/// 2x2 matrix in the TLS basis {|up>, |down>}, row-major.
struct Mat2 {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static Mat2 identity() { return {}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
  /// Max-abs deviation of U^dagger U from the identity.
  double unitarity_error() const;
};

/// exp(-i (hz sigma_z + hx sigma_x) ) for real hz, hx.
Mat2 su2_exp(double hz, double hx);

enum class EnvelopeKind { gaussian, square, hard };

inline constexpr double kDefaultDurationRatio = 10.0;
/// Shortest tau / sigma_p accepted before windowing spoils the profile.
inline constexpr double kMinDurationRatio = 6.0;

/// Drive applied to the TLS for one measurement.
///
/// Detuning is referenced to `center`: the drive resonates with particles at
/// z = center. For gaussian pulses the envelope is renormalised so that the
/// truncated area on [0, duration] is exactly pi.
struct PulseSpec {
  EnvelopeKind kind = EnvelopeKind::gaussian;
  double center = 0.0;    // mu_I
  double width = 1.0;     // target sigma_I of the inversion profile
  double sigma_p = 1.0;   // envelope width (time)
  double duration = 10.0; // tau (time)
  double rabi = 0.0;      // square pulses: constant Rabi frequency

  /// Gaussian pulse whose profile has width `width` given calibrated alpha:
  /// sigma_p = 1 / (g width sqrt(2 alpha)).
  static PulseSpec gaussian(double center, double width, double g, double alpha,
                            double duration_ratio = kDefaultDurationRatio);
  /// Gaussian pulse from its envelope width directly.
  static PulseSpec gaussian_envelope(double center, double sigma_p,
                                     double duration_ratio = kDefaultDurationRatio);
  /// Square pi pulse with constant Rabi frequency.
  static PulseSpec square(double center, double rabi);
  /// Instantaneous detuning-independent inversion.
  static PulseSpec hard();

  double duration_ratio() const { return duration / sigma_p; }
  /// Rabi frequency Omega(t); zero outside [0, duration].
  double amplitude(double t) const;
  void validate() const;
};

struct SampledEnvelope {
  double dt = 0.0;
  std::vector<double> values;  // Omega(k dt), k = 0..n
  /// Composite Simpson area.
  double area() const;
};

/// Samples the gaussian envelope with `samples_per_sigma` points per sigma_p.
/// Throws InvalidArgument when tau < 6 sigma_p.
SampledEnvelope gaussian_envelope(double sigma_p, double tau, std::size_t samples_per_sigma = 200);

struct PropagatorOptions {
  std::size_t steps_per_sigma = 200;  // fixed step sigma_p / 200
  double unitarity_tolerance = 1e-8;
};

/// U'(z) over [t0, t1] for H = g (z - center) sigma_z / 2 + Omega(t) sigma_x / 2.
/// Fourth-order Magnus integrator with exact 2x2 exponentials.
Mat2 tls_propagator(double z, const PulseSpec& pulse, double g,
                    const PropagatorOptions& options = {});
Mat2 tls_propagator(double z, const PulseSpec& pulse, double g, double t0, double t1,
                    const PropagatorOptions& options = {});

/// Free evolution U = diag(exp(-i g z t / 2), exp(+i g z t / 2)).
Mat2 free_propagator(double z, double g, double t);

/// Closed-form square pi-pulse transition probability, Delta = g z.
double square_profile_analytic(double rabi, double z, double g);

struct GaussianFit {
  double center = 0.0;
  double variance = 1.0;
  double max_residual = 0.0;
};

/// Least-squares fit of exp(-(z - c)^2 / (2 v)) to samples (unit amplitude).
GaussianFit fit_unit_gaussian(std::span<const double> z, std::span<const double> values);

/// Transition probability I(z|up) used as the Bayesian likelihood.
///
/// Either an analytic Gaussian (the fitted curve used online), a constant
/// (hard pulse), or a sampled curve in the scaled coordinate
/// u = (z - center) * scale, linearly interpolated and zero outside.
class InversionProfile {
 public:
  static InversionProfile gaussian(double center, double width);
  static InversionProfile constant(double value);
  static InversionProfile sampled(double center, double scale, UniformGrid u_grid,
                                  std::vector<double> values);

  double up(double z) const;
  double down(double z) const { return 1.0 - up(z); }
  void sample_up(const UniformGrid& grid, std::vector<double>& out) const;

  bool is_sampled() const { return kind_ == Kind::sampled; }
  double center() const { return center_; }
  double width() const { return width_; }
  const UniformGrid& sample_grid() const { return u_grid_; }
  std::span<const double> samples() const { return values_; }

  /// Populated by `inversion_profile`.
  std::optional<GaussianFit> fit;
  double alpha = 0.0;
  /// Fit residual within the accepted 0.05 bound.
  bool gaussian_ok = true;
  void write_csv(std::ostream& out) const;

 private:
  enum class Kind { gaussian, constant, sampled };
  Kind kind_ = Kind::gaussian;
  double center_ = 0.0;
  double width_ = 1.0;
  double value_ = 1.0;
  double scale_ = 1.0;
  UniformGrid u_grid_;
  std::vector<double> values_;
};

inline constexpr double kMaxGaussianResidual = 0.05;

/// Numerically integrated profile on `z_grid` together with its Gaussian fit
/// and the alpha implied by sigma_fit^2 = 1 / (2 g^2 alpha sigma_p^2).
InversionProfile inversion_profile(const PulseSpec& pulse, double g, const UniformGrid& z_grid,
                                   const PropagatorOptions& options = {});

/// Scale-free description of the gaussian pulse family at fixed tau/sigma_p.
///
/// With u = g (z - center) sigma_p and s = t / sigma_p the propagator depends
/// on u only. The table stores the symmetric-frame propagator
/// V(u) = exp(i u r sigma_z / 4) U exp(i u r sigma_z / 4), which is smooth in
/// u, and reconstructs U'(z) for any pulse of the family.
class PulseFamily {
 public:
  explicit PulseFamily(double duration_ratio = kDefaultDurationRatio, double u_max = 64.0,
                       double u_step = 0.02, std::size_t steps_per_sigma = 200);

  double duration_ratio() const { return ratio_; }
  double alpha() const { return alpha_; }
  const GaussianFit& fit() const { return fit_; }

  /// U'(z) for a member pulse.
  Mat2 propagator(double z, const PulseSpec& pulse, double g) const;
  /// Symmetric-frame propagator at scaled detuning u.
  Mat2 symmetric(double u) const;
  /// I(u | up) of the universal profile.
  double transition(double u) const;
  /// Sampled universal profile in z-coordinates for a member pulse.
  InversionProfile profile(const PulseSpec& pulse, double g) const;

  /// Process-wide family for the default ratio.
  static const PulseFamily& standard();
  /// Cached family for an arbitrary ratio (thread-safe, built on first use).
  static const PulseFamily& shared(double duration_ratio);

 private:
  double ratio_;
  double u_step_;
  std::size_t half_;  // table covers u = k u_step, k = 0..half_
  std::vector<cplx> a_, b_;  // V = [[a, -conj(b)], [b, conj(a)]]
  double tail_phase_ = 0.0;  // arg(a) at the table edge
  double alpha_ = 0.0;
  GaussianFit fit_;
};

/// Relative placement of the test state used to calibrate the backaction.
/// Defaults reproduce the controller geometry for w = 1.9, p_up = 0.4.
struct CalibrationGeometry {
  double width_factor = 1.9;  // sigma_I / sigma of the test state
  double p_up = 0.4;          // sets the test-state offset from the profile centre
};

struct BackactionPoint {
  double duration = 0.0;
  double up_shift = 0.0;    // <p> change of the |up> branch
  double down_shift = 0.0;  // <p> change of the |down> branch
};

struct BackactionCalibration {
  double duration_ratio = kDefaultDurationRatio;
  CalibrationGeometry geometry;
  std::vector<BackactionPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double max_up_shift = 0.0;

  /// Spin-down momentum displacement predicted for a pulse of duration tau.
  double down_shift(double duration) const { return slope * duration; }

  void save(const std::string& path) const;
  static BackactionCalibration load(const std::string& path);
};

struct CalibrationOptions {
  double g = 1.0;
  double alpha = 0.0;  // 0: use PulseFamily::standard().alpha()
  double duration_ratio = kDefaultDurationRatio;
  std::vector<double> durations;  // empty: 8 log-spaced values over one decade
  CalibrationGeometry geometry;
  std::size_t z_points = 1201;
  PropagatorOptions propagator;
  double up_tolerance = 1e-4;
};

/// Momentum shift of each branch for a normalised test-state position
/// density P(z), computed as <p> = int P Im(a* da/dz) dz / int P |a|^2 with
/// a_i(z) = <i|U'(z)|down>.
BackactionPoint branch_displacement(const PulseSpec& pulse, double g, double state_center,
                                    double state_sigma, std::size_t z_points = 1201,
                                    const PropagatorOptions& options = {});

/// Same as above with the propagator truncated to [0, t]; used for
/// time-resolved displacement traces.
BackactionPoint branch_displacement_at(const PulseSpec& pulse, double g, double t,
                                       double state_center, double state_sigma,
                                       std::size_t z_points = 1201,
                                       const PropagatorOptions& options = {});

/// Fits delta_nu(tau) = slope tau + intercept over a family of pulses.
/// Throws NumericalError when the spin-up branch moves by more than
/// `up_tolerance`.
BackactionCalibration calibrate_backaction(const CalibrationOptions& options = {});

/// Offset |mu_I - mu| giving outcome probability p_up for a Gaussian prior of
/// width sigma and a profile of width sigma_I. Throws DetuningUndefined when
/// the log argument exceeds one.
double detuning_offset(double sigma, double sigma_i, double p_up);

}  // namespace levcool
