#include "levcool/protocol.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "levcool/errors.hpp"

namespace levcool {

std::string to_string(SimulationMode m) { return m == SimulationMode::bayes ? "bayes" : "wigner"; }
std::string to_string(LikelihoodModel m) { return m == LikelihoodModel::gaussian ? "gaussian" : "numeric"; }

SimulationMode parse_mode(const std::string& s) {
  if (s == "bayes") return SimulationMode::bayes;
  if (s == "wigner") return SimulationMode::wigner;
  throw InvalidArgument("unknown mode '" + s + "' (expected bayes or wigner)");
}

LikelihoodModel parse_likelihood(const std::string& s) {
  if (s == "gaussian") return LikelihoodModel::gaussian;
  if (s == "numeric") return LikelihoodModel::numeric;
  throw InvalidArgument("unknown likelihood '" + s + "' (expected gaussian or numeric)");
}

std::vector<std::string> ProtocolConfig::violations() const {
  auto out = controller.violations();
  if (!(nbar >= 0)) out.push_back("nbar must be non-negative");
  if (!(heating_rate >= 0)) out.push_back("heating rate must be non-negative");
  if (heating_rate > 0 && !(nbar > 0)) out.push_back("heating needs nbar > 0 (gamma = Gamma / nbar)");
  if (!(trap_frequency > 0)) out.push_back("trap frequency must be positive");
  if (quadratures != 1 && quadratures != 2) out.push_back("quadratures must be 1 or 2");
  if (belief_points < 64) out.push_back("belief_points must be at least 64");
  if (mode == SimulationMode::wigner) {
    if (wigner_points < 16 || wigner_points % 2 != 0) out.push_back("wigner_points must be even and >= 16");
    if (wigner_half_width != 0 && wigner_half_width < 6 * std::sqrt(nbar + 0.5))
      out.push_back("wigner half width below 6 sqrt(nbar + 1/2)");
  }
  return out;
}

void ProtocolConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid protocol configuration:";
  for (const auto& s : v) msg << "\n  - " << s;
  throw InvalidArgument(msg.str());
}

double ProtocolConfig::rotation_time() const { return 0.5 * std::numbers::pi / trap_frequency; }

const BackactionCalibration& default_calibration() {
  static const BackactionCalibration calib = calibrate_backaction();
  return calib;
}

std::size_t TrajectoryRecord::count(int quadrature) const {
  const auto q = static_cast<std::size_t>(quadrature - 1);
  return q < quadratures.size() ? quadratures[q].count : 0;
}

double TrajectoryRecord::final_entropy() const {
  if (quadratures.empty()) return std::nan("");
  return quadratures.front().entropy_final - gaussian_entropy(0.5);
}

// --- backends ----------------------------------------------------------------

int BayesBackend::measure(const PulseSpec&, const InversionProfile& likelihood,
                          const GridDistribution& belief, double f) {
  const double p1 = outcome_probability(belief, likelihood, 1, f);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return uni(rng_) < p1 ? 1 : 0;
}

int WignerBackend::measure(const PulseSpec& pulse, const InversionProfile&, const GridDistribution&,
                           double f) {
  state_.evolve_pulse(pulse);
  return state_.readout(f, rng_);
}

void correction_sequence(BlockWigner& state, double t) {
  state.hard_flip();
  state.evolve_free(t);
}

void WignerBackend::correct(double t) { correction_sequence(state_, t); }

InversionProfile likelihood_for(const PulseSpec& pulse, double g, LikelihoodModel model) {
  if (model == LikelihoodModel::numeric)
    return PulseFamily::shared(pulse.duration_ratio()).profile(pulse, g);
  return InversionProfile::gaussian(pulse.center, pulse.width);
}

// --- protocol ----------------------------------------------------------------

QuadratureSummary squeeze_quadrature(MeasurementBackend& backend, AdaptiveController& controller,
                                     BeliefState& belief, int quadrature, double sigma0,
                                     LikelihoodModel model, std::vector<StepRecord>& steps) {
  const ControllerConfig& cfg = controller.config();
  controller.begin_quadrature(quadrature, sigma0);
  QuadratureSummary q;
  q.entropy_initial = shannon_entropy(belief.distribution());
  while (!controller.should_stop() && controller.count() < cfg.max_steps) {
    StepRecord rec;
    rec.quadrature = quadrature;
    rec.mode = belief.distribution().mode();
    const PulseSpec pulse = controller.propose(belief.distribution());
    const InversionProfile like = likelihood_for(pulse, cfg.g, model);
    const int observed = backend.measure(pulse, like, belief.distribution(), cfg.readout_fidelity);
    const ScheduledActions act = controller.register_outcome(observed, pulse);
    if (act.correction) backend.correct(act.free_time);
    backend.reset_tls();

    rec.p_outcome = belief.update(like, observed, cfg.readout_fidelity);
    const WidthEstimate w = controller.observe(belief.distribution());
    rec.step = controller.count();
    rec.mu_i = pulse.center;
    rec.sigma_i = pulse.width;
    rec.sigma_p = pulse.sigma_p;
    rec.tau = pulse.duration;
    rec.outcome = observed;
    rec.sigma_n = w.sigma;
    rec.threshold = w.threshold;
    rec.entropy = shannon_entropy(belief.distribution());
    rec.kl = kl_to_gaussian(belief.distribution(), w.mode, w.sigma);
    rec.kick = act.kick;
    rec.correction_time = act.correction ? act.free_time : 0.0;
    rec.ledger = controller.ledger();
    steps.push_back(rec);
    q.pulse_time += pulse.duration;
    q.correction_time += rec.correction_time;
    belief.maybe_regrid(w.sigma);
  }
  q.count = controller.count();
  q.converged = controller.should_stop();
  q.estimate = belief.distribution().mode();
  q.ledger = controller.ledger();
  q.sigma = controller.sigma();
  q.belief_std = std::sqrt(belief.distribution().variance());
  q.entropy_final = shannon_entropy(belief.distribution());
  return q;
}

TrajectoryRecord run_protocol(const ProtocolConfig& config) {
  return run_protocol(config, default_calibration());
}

TrajectoryRecord run_protocol(const ProtocolConfig& config, const BackactionCalibration& calibration) {
  config.validate();
  TrajectoryRecord rec;
  rec.fidelity = std::nan("");
  rec.seed = config.seed;
  rec.mode = config.mode;
  AdaptiveController controller(config.controller, calibration);
  const double g = config.controller.g;
  const double sigma0 = std::sqrt(config.nbar + 0.5);

  std::unique_ptr<MeasurementBackend> backend;
  WignerBackend* wigner = nullptr;
  if (config.mode == SimulationMode::wigner) {
    auto state = BlockWigner::thermal(config.nbar, config.wigner_points, config.wigner_half_width, g);
    if (config.heating_rate > 0)
      state.set_dissipation({config.heating_rate / config.nbar, config.nbar});
    auto wb = std::make_unique<WignerBackend>(std::move(state), config.seed);
    wigner = wb.get();
    backend = std::move(wb);
  } else {
    backend = std::make_unique<BayesBackend>(config.seed);
  }

  try {
    BeliefState belief(thermal_prior(config.nbar, thermal_grid(config.nbar, config.belief_points)),
                       config.belief_points);
    rec.quadratures.push_back(squeeze_quadrature(*backend, controller, belief, 1, sigma0,
                                                 config.likelihood, rec.steps));
    if (config.quadratures == 2) {
      rec.rotation_time = config.rotation_time();
      rec.rotation_heating = config.heating_rate > 0;
      backend->rotate(rec.rotation_time);
      const double ledger1 = rec.quadratures[0].ledger;
      BeliefState belief2(
          GridDistribution::gaussian(thermal_grid(config.nbar, config.belief_points, ledger1), ledger1, sigma0),
          config.belief_points);
      rec.quadratures.push_back(squeeze_quadrature(*backend, controller, belief2, 2, sigma0,
                                                   config.likelihood, rec.steps));
      const auto& q1 = rec.quadratures[0];
      const auto& q2 = rec.quadratures[1];
      rec.displacement_mu = -q2.estimate;
      rec.displacement_nu = q1.estimate - q2.ledger;
      if (wigner) {
        const PhaseMoments m = wigner->state().moments();
        rec.var_mu_before = m.var_mu;
        rec.var_nu_before = m.var_nu;
        rec.fidelity_undisplaced = wigner->state().gs_fidelity();
      }
      if (config.final_displacement) backend->displace(rec.displacement_mu, rec.displacement_nu);
      rec.fidelity = wigner ? wigner->state().gs_fidelity() : std::nan("");
    } else if (wigner) {
      const PhaseMoments m = wigner->state().moments();
      rec.var_mu_before = m.var_mu;
      rec.var_nu_before = m.var_nu;
      rec.fidelity = wigner->state().gs_fidelity();
    }
  } catch (const ImpossibleOutcome& e) {
    rec.status = "impossible_outcome";
    rec.message = e.what();
  }
  for (const auto& q : rec.quadratures) rec.total_time += q.pulse_time + q.correction_time;
  rec.total_time += rec.rotation_time;
  return rec;
}

}  // namespace levcool
