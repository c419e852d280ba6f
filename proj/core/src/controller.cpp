#include "levcool/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levcool/errors.hpp"

namespace levcool {

std::vector<std::string> ControllerConfig::violations() const {
  std::vector<std::string> out;
  if (!(width_factor > 1)) out.push_back("w must exceed 1");
  if (!(p_up > 0 && p_up < 1)) out.push_back("p_up must lie in (0, 1)");
  if (width_factor > 0 && p_up > 0 &&
      !(p_up * std::sqrt((1.0 + width_factor * width_factor) / (width_factor * width_factor)) < 1.0))
    out.push_back("p_up sqrt((1 + w^2) / w^2) must be below 1 (detuning undefined)");
  if (!(theta_z >= 0)) out.push_back("theta_z must be non-negative");
  if (!(sigma_stop1 > 0)) out.push_back("sigma_stop1 must be positive");
  if (!(sigma_stop2 > 0)) out.push_back("sigma_stop2 must be positive");
  if (!(readout_fidelity >= 0.5 && readout_fidelity <= 1.0)) out.push_back("f must lie in [0.5, 1]");
  if (!(g > 0)) out.push_back("g must be positive");
  if (!(alpha >= 0)) out.push_back("alpha must be non-negative (0 selects the calibrated value)");
  if (!(duration_ratio >= kMinDurationRatio)) out.push_back("tau / sigma_p must be at least 6");
  if (max_steps == 0) out.push_back("max_steps must be positive");
  return out;
}

void ControllerConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid controller configuration:";
  for (const auto& s : v) msg << "\n  - " << s;
  throw InvalidArgument(msg.str());
}

double compute_threshold(double sigma_prev, double theta_z) {
  if (!(sigma_prev > 0)) throw InvalidArgument("compute_threshold: sigma must be positive");
  return std::exp(-0.5 * theta_z * theta_z) / std::sqrt(2.0 * std::numbers::pi * sigma_prev * sigma_prev);
}

bool should_stop(double sigma_n, double sigma_stop) { return sigma_n <= sigma_stop; }

AdaptiveController::AdaptiveController(ControllerConfig config, BackactionCalibration calibration)
    : config_(config), calib_(std::move(calibration)) {
  config_.validate();
  alpha_ = config_.alpha > 0 ? config_.alpha : PulseFamily::standard().alpha();
}

void AdaptiveController::begin_quadrature(int quadrature, double sigma0) {
  if (quadrature != 1 && quadrature != 2) throw InvalidArgument("quadrature must be 1 or 2");
  if (!(sigma0 > 0)) throw InvalidArgument("begin_quadrature: sigma0 must be positive");
  quadrature_ = quadrature;
  sigma_ = sigma0;
  theta_ = compute_threshold(sigma0, config_.theta_z);
  sign_ = +1;
  ledger_ = 0.0;
  count_ = 0;
}

PulseSpec AdaptiveController::propose(const GridDistribution& belief) const {
  const double sigma_i = config_.width_factor * sigma_;
  const double offset = detuning_offset(sigma_, sigma_i, config_.p_up);
  const double mu_i = belief.mode() + sign_ * offset;
  return PulseSpec::gaussian(mu_i, sigma_i, config_.g, alpha_, config_.duration_ratio);
}

ScheduledActions AdaptiveController::register_outcome(int observed, const PulseSpec& pulse) {
  if (observed != 0 && observed != 1) throw InvalidArgument("observed outcome must be 0 or 1");
  ScheduledActions act;
  const double delta = calib_.down_shift(pulse.duration);
  if (config_.readout_fidelity >= 1.0) {
    if (observed == 0) act.kick = delta;
  } else {
    // Equalise both branches at delta / 2.
    act.correction = true;
    act.free_time = delta / config_.g;
    act.kick = 0.5 * delta;
  }
  ledger_ += act.kick;
  if (observed == 0) sign_ = -sign_;
  ++count_;
  return act;
}

WidthEstimate AdaptiveController::observe(const GridDistribution& posterior) {
  theta_ = compute_threshold(sigma_, config_.theta_z);
  WidthEstimate w;
  if (theta_ < posterior.max_density()) {
    w = effective_width(posterior, theta_);
  } else {
    // Belief flatter than the previous width suggests: fall back to the same
    // relative level below the current peak.
    const double level = std::min(std::exp(-0.5 * config_.theta_z * config_.theta_z), 0.5);
    w = effective_width(posterior, posterior.max_density() * level);
  }
  sigma_ = w.sigma;
  return w;
}

bool AdaptiveController::should_stop() const {
  return levcool::should_stop(sigma_, quadrature_ == 1 ? config_.sigma_stop1 : config_.sigma_stop2);
}

}  // namespace levcool
