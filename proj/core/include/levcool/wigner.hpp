#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "levcool/bayes.hpp"
#include "levcool/grid_distribution.hpp"
#include "levcool/pulse.hpp"

namespace levcool {

/// Square phase-space grid: x_j = center + (j - n/2) spacing, j = 0..n-1.
struct PhaseGrid {
  std::size_t n = 0;
  double spacing = 0.0;
  double center_mu = 0.0;
  double center_nu = 0.0;

  double mu(std::size_t j) const { return center_mu + (static_cast<double>(j) - static_cast<double>(n / 2)) * spacing; }
  double nu(std::size_t k) const { return center_nu + (static_cast<double>(k) - static_cast<double>(n / 2)) * spacing; }
  double half_width() const { return 0.5 * spacing * static_cast<double>(n); }
};

/// Default half width 6 sqrt(nbar + 1/2) + 10.
double default_half_width(double nbar);

// Means and variances are normalised by `trace`.
struct PhaseMoments {
  double trace = 0.0;
  double mean_mu = 0.0;
  double mean_nu = 0.0;
  double var_mu = 0.0;
  double var_nu = 0.0;
};

struct Dissipation {
  double gamma = 0.0;      // gamma_damp
  double nbar_bath = 0.0;  // bath occupation
  bool enabled() const { return gamma > 0.0; }
};

/// Joint TLS-oscillator state as four phase-space functions.
///
/// W_upup and W_downdown are real; W_updown is stored, W_downup is its
/// conjugate. Arrays are row-major [mu][nu]. Pulses are applied exactly in
/// the mixed representation R(mu, y) = rho(mu + y/2, mu - y/2), where the
/// drive acts pointwise as rho -> U(x1) rho U(x2)^dagger.
class BlockWigner {
 public:
  static BlockWigner thermal(double nbar, std::size_t n, double half_width = 0.0, double g = 1.0);
  /// Spin-down Gaussian with the given means and quadrature variances.
  static BlockWigner gaussian(std::size_t n, double half_width, double mean_mu, double mean_nu,
                              double var_mu, double var_nu, double g = 1.0);

  BlockWigner(PhaseGrid grid, double g);
  BlockWigner(const BlockWigner&);
  BlockWigner& operator=(const BlockWigner&);
  BlockWigner(BlockWigner&&) noexcept;
  BlockWigner& operator=(BlockWigner&&) noexcept;
  ~BlockWigner();

  const PhaseGrid& grid() const { return grid_; }
  double coupling() const { return g_; }
  std::size_t index(std::size_t j, std::size_t k) const { return j * grid_.n + k; }

  std::span<double> up() { return a_; }
  std::span<double> down() { return d_; }
  std::span<std::complex<double>> coherence() { return b_; }
  std::span<const double> up() const { return a_; }
  std::span<const double> down() const { return d_; }
  std::span<const std::complex<double>> coherence() const { return b_; }

  void set_dissipation(Dissipation d) { diss_ = d; }
  const Dissipation& dissipation() const { return diss_; }
  /// Applies all deferred dissipation now.
  void flush_dissipation();
  /// Immediate dissipator evolution for time t (no-op when disabled).
  void dissipate(double t);

  double trace() const;
  double population_up() const;
  double population_down() const;
  double coherence_norm() const;  // max |W_updown|
  /// Tr rho^2 = 2 pi int (A^2 + D^2 + 2 |B|^2).
  double purity() const;
  PhaseMoments moments() const;
  PhaseMoments branch_moments(Spin spin) const;
  double gs_fidelity();
  GridDistribution position_marginal(const UniformGrid& target);
  std::vector<double> raw_position_marginal();

  /// Exact pulse propagation; gaussian pulses use the shared pulse family table.
  void evolve_pulse(const PulseSpec& pulse);
  /// Strang split-step reference: local Bloch rotation against diagonal advection.
  void evolve_pulse_split(const PulseSpec& pulse, std::size_t steps);
  /// Drive-free evolution for time t.
  void evolve_free(double t);
  void hard_flip();

  /// Probability of reporting `observed` with readout fidelity f.
  double readout_probability(int observed, double f) const;
  /// Conditions on the reported outcome and returns its probability.
  double collapse(int observed, double f);
  /// Samples a readout, collapses and returns the reported outcome.
  int readout(double f, std::mt19937_64& rng, double* probability = nullptr);
  /// Optical pumping: all population to |down>.
  void reset_tls();

  /// Quarter turn W(mu, nu) -> W(-nu, mu); dissipates for `duration` first.
  void quarter_rotation(double duration = 0.0);
  void displace(double dmu, double dnu);
  /// Rolls whole cells so the spin-traced mean sits near the grid centre.
  void recenter();

  void write_csv(const std::string& path) const;
  /// Binary dump: magic "LEVW", u32 version, u64 n, f64 spacing, center_mu,
  /// center_nu, g, then A, D (f64) and B (2 x f64) row-major, little endian.
  void write_binary(const std::string& path) const;

 private:
  struct Workspace;
  template <class Prop>
  void apply_pointwise(const Prop& prop);
  void check_trace(double before, const char* where) const;
  Workspace& ws();

  PhaseGrid grid_;
  double g_ = 1.0;
  std::vector<double> a_, d_;
  std::vector<std::complex<double>> b_;
  Dissipation diss_;
  double pending_ = 0.0;
  std::unique_ptr<Workspace> ws_;
};

}  // namespace levcool
