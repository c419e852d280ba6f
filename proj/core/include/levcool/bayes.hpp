#pragma once

#include <cstddef>

#include "levcool/grid_distribution.hpp"
#include "levcool/pulse.hpp"

namespace levcool {

enum class Spin { up, down };

/// Readout labels: 1 reports |up>, 0 reports |down>.
inline Spin reported_spin(int observed) { return observed == 1 ? Spin::up : Spin::down; }

inline constexpr std::size_t kDefaultBeliefPoints = 4096;

/// Gaussian N(0, nbar + 1/2) on `grid`. Rejects grids narrower than +-6 sigma.
GridDistribution thermal_prior(double nbar, const UniformGrid& grid);
/// Grid of `n` points spanning +-8 sigma of the thermal prior around `center`.
UniformGrid thermal_grid(double nbar, std::size_t n = kDefaultBeliefPoints, double center = 0.0);

struct UpdateResult {
  GridDistribution posterior;
  double probability = 0.0;  // of the observed outcome under the prior
};

/// Posterior for a perfectly read spin outcome.
UpdateResult update_perfect(const GridDistribution& prior, const InversionProfile& profile,
                            Spin outcome);
/// Posterior for a reported outcome with symmetric readout fidelity f in [1/2, 1].
/// Likelihood f I(z|s) + (1 - f) I(z|s'), where s is the reported spin.
UpdateResult update_imperfect(const GridDistribution& prior, const InversionProfile& profile,
                              int observed, double f);

/// Probability of reporting `observed` without updating.
double outcome_probability(const GridDistribution& prior, const InversionProfile& profile,
                           int observed, double f);

/// Differential entropy -int P log2 P dz in bits.
double shannon_entropy(const GridDistribution& dist);
/// 1/2 log2(2 pi e sigma^2).
double gaussian_entropy(double sigma);

/// D_KL(P || N(mu, sigma^2)) in nats; +inf when P has mass where the Gaussian underflows.
double kl_to_gaussian(const GridDistribution& dist, double mu, double sigma);

struct WidthEstimate {
  double sigma = 0.0;      // sigma_n
  double threshold = 0.0;  // theta_n
  double span = 0.0;       // Delta z_n between the outermost crossings
  double mode = 0.0;
};

/// Threshold-based effective Gaussian width. Throws ThresholdTooHigh when
/// theta is not below the maximum density.
WidthEstimate effective_width(const GridDistribution& dist, double theta);

/// sigma = sqrt(-h^2 / W_{-1}(-2 pi h^2 theta^2)), h = span / 2.
double width_from_span(double span, double theta);

/// Grid-based belief with adaptive regridding.
///
/// The grid is narrowed to mode +-8 sigma_n (kept wide enough to hold all
/// non-negligible mass) once sigma_n falls below 32 cells.
class BeliefState {
 public:
  BeliefState() = default;
  explicit BeliefState(GridDistribution dist, std::size_t points = kDefaultBeliefPoints)
      : dist_(std::move(dist)), points_(points) {}

  const GridDistribution& distribution() const { return dist_; }
  /// Applies the imperfect-readout update and returns the outcome probability.
  double update(const InversionProfile& profile, int observed, double f);
  /// Regrids when sigma_n < 32 dz. Returns true when the grid changed.
  bool maybe_regrid(double sigma_n);

 private:
  GridDistribution dist_;
  std::size_t points_ = kDefaultBeliefPoints;
};

/// Resamples onto mode +-8 sigma (clipped to the current grid) and renormalises.
GridDistribution regrid(const GridDistribution& dist, double sigma_n,
                        std::size_t points = kDefaultBeliefPoints);

}  // namespace levcool
