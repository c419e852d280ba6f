#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace levcool {

/// Uniform sampling of an interval, used by all one-dimensional densities.
struct UniformGrid {
  double start = 0.0;  // first sample
  double step = 1.0;   // spacing
  std::size_t size = 0;

  static UniformGrid spanning(double lo, double hi, std::size_t n);
  static UniformGrid centered(double center, double half_width, std::size_t n);

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double front() const { return start; }
  double back() const { return at(size - 1); }
  double center() const { return 0.5 * (front() + back()); }
  double half_width() const { return 0.5 * (back() - front()); }
  std::vector<double> points() const;
};

/// Discretised probability density over the dimensionless position z.
///
/// Densities are non-negative and normalised so that sum(p) * dz == 1; every
/// mutating operation renormalises.
class GridDistribution {
 public:
  GridDistribution() = default;
  GridDistribution(UniformGrid grid, std::vector<double> density);

  /// Sample `f` on `grid` and normalise.
  static GridDistribution from_function(UniformGrid grid,
                                        const std::function<double(double)>& f);
  static GridDistribution gaussian(UniformGrid grid, double mean, double sigma);

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> density() const { return density_; }
  std::size_t size() const { return density_.size(); }
  double z(std::size_t i) const { return grid_.at(i); }
  double operator[](std::size_t i) const { return density_[i]; }

  double total_mass() const;
  double mean() const;
  double variance() const;
  /// Location of the largest sample.
  double mode() const;
  std::size_t mode_index() const;
  double max_density() const;

  /// Linear interpolation, zero outside the grid.
  double evaluate(double z) const;

  /// Resample onto another grid with linear interpolation and renormalise.
  GridDistribution resampled(const UniformGrid& target) const;

  /// Pointwise product with a non-negative weight, renormalised. Returns the
  /// normalisation integral of weight * density before renormalisation.
  double reweight(std::span<const double> weight);

  void normalize();

  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;

 private:
  UniformGrid grid_;
  std::vector<double> density_;
};

}  // namespace levcool
