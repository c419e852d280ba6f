#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "levcool/bayes.hpp"
#include "levcool/pulse.hpp"

namespace levcool {

struct ControllerConfig {
  double width_factor = 1.9;  // w
  double p_up = 0.4;
  double theta_z = 2.75;
  double sigma_stop1 = 0.5;
  double sigma_stop2 = 0.7;
  double readout_fidelity = 1.0;  // f
  double g = 1.0;
  double alpha = 0.0;  // 0: calibrated value of the standard pulse family
  double duration_ratio = kDefaultDurationRatio;
  std::size_t max_steps = 500;  // per quadrature

  /// Every violated constraint, empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;
};

/// theta_n = exp(-theta_z^2 / 2) / sqrt(2 pi sigma_prev^2).
double compute_threshold(double sigma_prev, double theta_z);

struct StepRecord {
  int quadrature = 1;
  std::size_t step = 0;  // 1-based within the quadrature
  double mode = 0.0;     // belief mode used for the proposal
  double mu_i = 0.0;
  double sigma_i = 0.0;
  double sigma_p = 0.0;
  double tau = 0.0;
  int outcome = 0;         // reported: 1 up, 0 down
  double p_outcome = 0.0;  // predictive probability of the reported outcome
  double sigma_n = 0.0;    // effective width after the update
  double threshold = 0.0;
  double entropy = 0.0;  // bits, after the update
  double kl = 0.0;       // nats, posterior vs N(mode, sigma_n^2)
  double kick = 0.0;     // momentum shift booked for this step
  double correction_time = 0.0;
  double ledger = 0.0;  // after this step
};

/// Action requested from the simulator after a readout.
struct ScheduledActions {
  bool correction = false;  // hard pi flip followed by free evolution
  double free_time = 0.0;   // t* = delta / g
  double kick = 0.0;        // ledger increment
};

/// Adaptive measurement heuristic for one quadrature at a time.
class AdaptiveController {
 public:
  AdaptiveController(ControllerConfig config, BackactionCalibration calibration);

  const ControllerConfig& config() const { return config_; }
  double alpha() const { return alpha_; }
  const BackactionCalibration& calibration() const { return calib_; }

  /// Starts a quadrature with a prior of known analytic width sigma0.
  void begin_quadrature(int quadrature, double sigma0);

  int quadrature() const { return quadrature_; }
  double sigma() const { return sigma_; }
  double threshold() const { return theta_; }
  int sign() const { return sign_; }
  double ledger() const { return ledger_; }
  std::size_t count() const { return count_; }

  /// Pulse for the next measurement given the current belief.
  PulseSpec propose(const GridDistribution& belief) const;
  /// Books the reported outcome. For f = 1 only down outcomes kick; for
  /// f < 1 a correction sequence is scheduled after every readout.
  ScheduledActions register_outcome(int observed, const PulseSpec& pulse);
  /// Threshold and effective width of the posterior; updates sigma_n.
  WidthEstimate observe(const GridDistribution& posterior);

  bool should_stop() const;

 private:
  ControllerConfig config_;
  BackactionCalibration calib_;
  double alpha_ = 0.0;
  int quadrature_ = 1;
  double sigma_ = 1.0;
  double theta_ = 0.0;
  int sign_ = +1;
  double ledger_ = 0.0;
  std::size_t count_ = 0;
};

bool should_stop(double sigma_n, double sigma_stop);

}  // namespace levcool
