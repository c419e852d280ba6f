#include "levcool/lambert_w.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "levcool/errors.hpp"

namespace levcool {

namespace {

constexpr double kInvE = 0.36787944117144232160;

double initial_guess(double x) {
  // Branch-point series in p = -sqrt(2 (1 + e x)).
  if (x < -0.25) {
    const double p = -std::sqrt(2.0 * (1.0 + std::exp(1.0) * x));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  }
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

double lambert_w_m1(double x) {
  if (!(x >= -kInvE - 4 * std::numeric_limits<double>::epsilon() * kInvE) || !(x < 0.0))
    throw InvalidArgument("lambert_w_m1: argument " + std::to_string(x) +
                          " outside [-1/e, 0)");
  if (x <= -kInvE) return -1.0;

  double w = initial_guess(x);
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    // Halley step.
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    const double next = std::min(w - step, -1.0);
    if (std::abs(next - w) <= 1e-15 * std::abs(w)) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

}  // namespace levcool
