#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "levcool/bayes.hpp"
#include "levcool/controller.hpp"
#include "levcool/pulse.hpp"
#include "levcool/wigner.hpp"

namespace levcool {

enum class SimulationMode { bayes, wigner };
/// Likelihood used by the estimator: the fitted Gaussian or the sampled profile.
enum class LikelihoodModel { gaussian, numeric };

std::string to_string(SimulationMode m);
std::string to_string(LikelihoodModel m);
SimulationMode parse_mode(const std::string& s);
LikelihoodModel parse_likelihood(const std::string& s);

struct ProtocolConfig {
  ControllerConfig controller;
  double nbar = 100.0;
  double heating_rate = 0.0;             // Gamma, units of g
  double trap_frequency = 1.0 / 300.0;   // omega_M, angular, units of g
  SimulationMode mode = SimulationMode::bayes;
  LikelihoodModel likelihood = LikelihoodModel::gaussian;
  int quadratures = 2;                   // 1 runs part (i) only
  std::size_t belief_points = kDefaultBeliefPoints;
  std::size_t wigner_points = 512;
  double wigner_half_width = 0.0;        // 0: 6 sqrt(nbar + 1/2) + 10
  bool final_displacement = true;
  std::uint64_t seed = 1;

  std::vector<std::string> violations() const;
  void validate() const;
  double rotation_time() const;
};

/// Backaction calibration shared by all trajectories of a process (computed once).
const BackactionCalibration& default_calibration();

struct QuadratureSummary {
  std::size_t count = 0;
  bool converged = false;  // reached sigma_stop before max_steps
  double estimate = 0.0;   // belief mode at the end
  double ledger = 0.0;
  double sigma = 0.0;      // final sigma_n
  double belief_std = 0.0;
  double entropy_initial = 0.0;
  double entropy_final = 0.0;
  double pulse_time = 0.0;
  double correction_time = 0.0;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  SimulationMode mode = SimulationMode::bayes;
  std::string status = "ok";  // ok | impossible_outcome | error
  std::string message;
  std::vector<StepRecord> steps;
  std::vector<QuadratureSummary> quadratures;
  double rotation_time = 0.0;
  bool rotation_heating = false;
  double displacement_mu = 0.0;
  double displacement_nu = 0.0;
  double fidelity = 0.0;                 // wigner only (NaN in bayes mode)
  double fidelity_undisplaced = 0.0;     // wigner only
  double var_mu_before = 0.0;            // wigner only, spin-traced
  double var_nu_before = 0.0;
  double total_time = 0.0;

  std::size_t count(int quadrature) const;
  /// Final quadrature-1 entropy minus that of the sigma = 1/2 Gaussian.
  double final_entropy() const;
};

/// Simulator side of one measurement round.
class MeasurementBackend {
 public:
  virtual ~MeasurementBackend() = default;
  /// Applies the pulse and returns the reported outcome.
  virtual int measure(const PulseSpec& pulse, const InversionProfile& likelihood,
                      const GridDistribution& belief, double f) = 0;
  /// Hard pi flip followed by free evolution for t.
  virtual void correct(double t) = 0;
  virtual void reset_tls() = 0;
  virtual void rotate(double duration) = 0;
  virtual void displace(double dmu, double dnu) = 0;
};

/// Outcomes drawn from the estimator's own predictive distribution.
class BayesBackend final : public MeasurementBackend {
 public:
  explicit BayesBackend(std::uint64_t seed) : rng_(seed) {}
  int measure(const PulseSpec&, const InversionProfile& likelihood, const GridDistribution& belief,
              double f) override;
  void correct(double) override {}
  void reset_tls() override {}
  void rotate(double) override {}
  void displace(double, double) override {}

 private:
  std::mt19937_64 rng_;
};

/// Full phase-space simulation as ground truth.
class WignerBackend final : public MeasurementBackend {
 public:
  WignerBackend(BlockWigner state, std::uint64_t seed) : state_(std::move(state)), rng_(seed) {}
  int measure(const PulseSpec& pulse, const InversionProfile&, const GridDistribution&, double f) override;
  void correct(double t) override;
  void reset_tls() override { state_.reset_tls(); }
  void rotate(double duration) override { state_.quarter_rotation(duration); }
  void displace(double dmu, double dnu) override { state_.displace(dmu, dnu); }
  BlockWigner& state() { return state_; }

 private:
  BlockWigner state_;
  std::mt19937_64 rng_;
};

/// Hard pi flip then drive-free evolution for t.
void correction_sequence(BlockWigner& state, double t);

/// Likelihood matching the estimator model for a proposed pulse.
InversionProfile likelihood_for(const PulseSpec& pulse, double g, LikelihoodModel model);

/// Measurement loop of one quadrature; appends to `steps`.
QuadratureSummary squeeze_quadrature(MeasurementBackend& backend, AdaptiveController& controller,
                                     BeliefState& belief, int quadrature, double sigma0,
                                     LikelihoodModel model, std::vector<StepRecord>& steps);

TrajectoryRecord run_protocol(const ProtocolConfig& config);
TrajectoryRecord run_protocol(const ProtocolConfig& config, const BackactionCalibration& calibration);

// records.cpp
nlohmann::json to_json(const TrajectoryRecord& record);
void write_steps_csv(const std::vector<StepRecord>& steps, std::ostream& out);
void write_steps_csv(const std::vector<StepRecord>& steps, const std::string& path);

}  // namespace levcool
