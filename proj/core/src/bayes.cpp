#include "levcool/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "levcool/errors.hpp"
#include "levcool/lambert_w.hpp"

namespace levcool {

namespace {

constexpr double kImpossible = 1e-12;

void likelihood(const GridDistribution& prior, const InversionProfile& profile, int observed,
                double f, std::vector<double>& out) {
  if (observed != 0 && observed != 1) throw InvalidArgument("observed outcome must be 0 or 1");
  if (!(f >= 0.5 && f <= 1.0)) throw InvalidArgument("readout fidelity must lie in [1/2, 1]");
  profile.sample_up(prior.grid(), out);
  // Same arithmetic for every f so that f = 1 reproduces the perfect update bit for bit.
  for (double& up : out) {
    const double down = 1.0 - up;
    up = observed == 1 ? f * up + (1.0 - f) * down : f * down + (1.0 - f) * up;
  }
}

}  // namespace

UniformGrid thermal_grid(double nbar, std::size_t n, double center) {
  if (!(nbar >= 0)) throw InvalidArgument("thermal_grid: nbar must be non-negative");
  return UniformGrid::centered(center, 8.0 * std::sqrt(nbar + 0.5), n);
}

GridDistribution thermal_prior(double nbar, const UniformGrid& grid) {
  if (!(nbar >= 0)) throw InvalidArgument("thermal_prior: nbar must be non-negative");
  const double sigma = std::sqrt(nbar + 0.5);
  if (grid.front() > -6.0 * sigma || grid.back() < 6.0 * sigma)
    throw GridTooSmall("thermal_prior: grid must span +-6 sigma = +-" + std::to_string(6 * sigma));
  return GridDistribution::gaussian(grid, 0.0, sigma);
}

UpdateResult update_imperfect(const GridDistribution& prior, const InversionProfile& profile,
                              int observed, double f) {
  std::vector<double> weight;
  likelihood(prior, profile, observed, f, weight);
  for (std::size_t i = 0; i < weight.size(); ++i) weight[i] *= prior[i];
  double p = 0.0;
  for (double w : weight) p += w;
  p *= prior.grid().step;
  if (!(p >= kImpossible))
    throw ImpossibleOutcome("observed outcome has probability " + std::to_string(p) +
                            " under the current belief");
  return {GridDistribution(prior.grid(), std::move(weight)), p};
}

UpdateResult update_perfect(const GridDistribution& prior, const InversionProfile& profile,
                            Spin outcome) {
  return update_imperfect(prior, profile, outcome == Spin::up ? 1 : 0, 1.0);
}

double outcome_probability(const GridDistribution& prior, const InversionProfile& profile,
                           int observed, double f) {
  std::vector<double> weight;
  likelihood(prior, profile, observed, f, weight);
  double p = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) p += weight[i] * prior[i];
  return p * prior.grid().step;
}

double shannon_entropy(const GridDistribution& dist) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist[i];
    if (p > 0) acc -= p * std::log2(p);
  }
  return acc * dist.grid().step;
}

double gaussian_entropy(double sigma) {
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * sigma * sigma);
}

double kl_to_gaussian(const GridDistribution& dist, double mu, double sigma) {
  if (!(sigma > 0)) throw InvalidArgument("kl_to_gaussian: sigma must be positive");
  const double log_norm = -std::log(std::sqrt(2.0 * std::numbers::pi) * sigma);
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist[i];
    if (p <= 0) continue;
    const double d = (dist.z(i) - mu) / sigma;
    acc += p * (std::log(p) - log_norm + 0.5 * d * d);
  }
  return std::max(acc * dist.grid().step, 0.0);
}

double width_from_span(double span, double theta) {
  if (!(span > 0) || !(theta > 0)) throw InvalidArgument("width_from_span: span and theta must be positive");
  const double h = 0.5 * span;
  const double x = std::max(-2.0 * std::numbers::pi * h * h * theta * theta, -1.0 / std::numbers::e);
  return std::sqrt(-h * h / lambert_w_m1(x));
}

WidthEstimate effective_width(const GridDistribution& dist, double theta) {
  const std::size_t n = dist.size();
  const std::size_t peak = dist.mode_index();
  if (!(theta > 0) || !(theta < dist[peak]))
    throw ThresholdTooHigh("threshold " + std::to_string(theta) + " not below the maximum density " +
                           std::to_string(dist[peak]));
  std::size_t lo = 0;
  while (dist[lo] <= theta) ++lo;
  std::size_t hi = n - 1;
  while (dist[hi] <= theta) --hi;
  const auto cross = [&](std::size_t out, std::size_t in) {
    const double t = (theta - dist[out]) / (dist[in] - dist[out]);
    return dist.z(out) + t * (dist.z(in) - dist.z(out));
  };
  const double z_lo = lo == 0 ? dist.z(0) : cross(lo - 1, lo);
  const double z_hi = hi == n - 1 ? dist.z(n - 1) : cross(hi + 1, hi);
  WidthEstimate w;
  w.threshold = theta;
  w.span = std::max(z_hi - z_lo, dist.grid().step);
  w.sigma = width_from_span(w.span, theta);
  w.mode = dist.z(peak);
  return w;
}

GridDistribution regrid(const GridDistribution& dist, double sigma_n, std::size_t points) {
  if (!(sigma_n > 0)) throw InvalidArgument("regrid: sigma_n must be positive");
  const double mode = dist.mode();
  const double a = std::max(mode - 8.0 * sigma_n, dist.grid().front());
  const double b = std::min(mode + 8.0 * sigma_n, dist.grid().back());
  // Catmull-Rom keeps moments to ~1e-7 at the 32-cell trigger; linear would not.
  const UniformGrid target = UniformGrid::spanning(a, b, points);
  const UniformGrid& src = dist.grid();
  const auto m = static_cast<std::ptrdiff_t>(dist.size());
  auto at = [&](std::ptrdiff_t k) { return k < 0 || k >= m ? 0.0 : dist[static_cast<std::size_t>(k)]; };
  std::vector<double> values(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = (target.at(i) - src.start) / src.step;
    const auto k = static_cast<std::ptrdiff_t>(std::floor(s));
    const double t = s - static_cast<double>(k);
    const double p0 = at(k - 1), p1 = at(k), p2 = at(k + 1), p3 = at(k + 2);
    const double v = p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                                     t * (3.0 * (p1 - p2) + p3 - p0)));
    values[i] = std::max(v, 0.0);
  }
  return GridDistribution(target, std::move(values));
}

double BeliefState::update(const InversionProfile& profile, int observed, double f) {
  auto r = update_imperfect(dist_, profile, observed, f);
  dist_ = std::move(r.posterior);
  return r.probability;
}

bool BeliefState::maybe_regrid(double sigma_n) {
  if (sigma_n >= 32.0 * dist_.grid().step) return false;
  dist_ = regrid(dist_, sigma_n, points_);
  return true;
}

}  // namespace levcool
