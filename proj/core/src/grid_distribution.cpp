#include "levcool/grid_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "levcool/errors.hpp"

namespace levcool {

UniformGrid UniformGrid::spanning(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw InvalidArgument("UniformGrid: need n >= 2 and hi > lo");
  return {lo, (hi - lo) / static_cast<double>(n - 1), n};
}

UniformGrid UniformGrid::centered(double center, double half_width, std::size_t n) {
  return spanning(center - half_width, center + half_width, n);
}

std::vector<double> UniformGrid::points() const {
  std::vector<double> z(size);
  for (std::size_t i = 0; i < size; ++i) z[i] = at(i);
  return z;
}

GridDistribution::GridDistribution(UniformGrid grid, std::vector<double> density)
    : grid_(grid), density_(std::move(density)) {
  if (density_.size() != grid_.size)
    throw InvalidArgument("GridDistribution: density/grid size mismatch");
  for (double& p : density_) {
    if (!(p >= 0)) throw InvalidArgument("GridDistribution: negative or NaN density");
  }
  normalize();
}

GridDistribution GridDistribution::from_function(UniformGrid grid,
                                                 const std::function<double(double)>& f) {
  std::vector<double> values(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) values[i] = f(grid.at(i));
  return GridDistribution(grid, std::move(values));
}

GridDistribution GridDistribution::gaussian(UniformGrid grid, double mean, double sigma) {
  if (!(sigma > 0)) throw InvalidArgument("gaussian: sigma must be positive");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  return from_function(grid, [&](double z) { return std::exp(-(z - mean) * (z - mean) * inv); });
}

double GridDistribution::total_mass() const {
  return std::accumulate(density_.begin(), density_.end(), 0.0) * grid_.step;
}

double GridDistribution::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += z(i) * density_[i];
  return acc * grid_.step;
}

double GridDistribution::variance() const {
  const double m = mean();
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += (z(i) - m) * (z(i) - m) * density_[i];
  return acc * grid_.step;
}

std::size_t GridDistribution::mode_index() const {
  return static_cast<std::size_t>(
      std::distance(density_.begin(), std::max_element(density_.begin(), density_.end())));
}

double GridDistribution::mode() const { return z(mode_index()); }

double GridDistribution::max_density() const { return density_[mode_index()]; }

double GridDistribution::evaluate(double zq) const {
  const double s = (zq - grid_.start) / grid_.step;
  if (s < 0.0 || s > static_cast<double>(size() - 1)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(s), size() - 2);
  const double t = s - static_cast<double>(i);
  return (1.0 - t) * density_[i] + t * density_[i + 1];
}

GridDistribution GridDistribution::resampled(const UniformGrid& target) const {
  std::vector<double> values(target.size);
  for (std::size_t i = 0; i < target.size; ++i) values[i] = evaluate(target.at(i));
  return GridDistribution(target, std::move(values));
}

double GridDistribution::reweight(std::span<const double> weight) {
  if (weight.size() != size()) throw InvalidArgument("reweight: size mismatch");
  double norm = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    density_[i] *= weight[i];
    norm += density_[i];
  }
  norm *= grid_.step;
  if (norm > 0.0) {
    const double inv = 1.0 / norm;
    for (double& p : density_) p *= inv;
  }
  return norm;
}

void GridDistribution::normalize() {
  const double mass = total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw NumericalError("GridDistribution: cannot normalise zero or non-finite mass");
  const double inv = 1.0 / mass;
  for (double& p : density_) p *= inv;
}

void GridDistribution::write_csv(std::ostream& out) const {
  out << "z,P\n" << std::setprecision(17);
  for (std::size_t i = 0; i < size(); ++i) out << z(i) << ',' << density_[i] << '\n';
}

void GridDistribution::write_csv(const std::string& path) const {
  std::ofstream file(path);
  if (!file) throw Error("cannot write '" + path + "'");
  write_csv(file);
}

}  // namespace levcool
