#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>

#include "levcool/errors.hpp"
#include "levcool/protocol.hpp"

namespace levcool {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json to_json(const TrajectoryRecord& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["mode"] = to_string(r.mode);
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  j["fidelity"] = finite_or_null(r.fidelity);
  if (r.mode == SimulationMode::wigner) {
    j["fidelity_undisplaced"] = finite_or_null(r.fidelity_undisplaced);
    j["var_mu_before_displacement"] = r.var_mu_before;
    j["var_nu_before_displacement"] = r.var_nu_before;
  }
  j["final_entropy"] = finite_or_null(r.final_entropy());
  j["total_time"] = r.total_time;
  j["rotation"] = {{"duration", r.rotation_time}, {"heating", r.rotation_heating}};
  j["final_displacement"] = {{"mu", r.displacement_mu}, {"nu", r.displacement_nu}};
  j["quadratures"] = nlohmann::json::array();
  for (const auto& q : r.quadratures)
    j["quadratures"].push_back({{"count", q.count},
                                {"converged", q.converged},
                                {"estimate", q.estimate},
                                {"ledger", q.ledger},
                                {"sigma_n", q.sigma},
                                {"belief_std", q.belief_std},
                                {"entropy_initial", q.entropy_initial},
                                {"entropy_final", q.entropy_final},
                                {"pulse_time", q.pulse_time},
                                {"correction_time", q.correction_time}});
  j["steps"] = nlohmann::json::array();
  for (const auto& s : r.steps)
    j["steps"].push_back({{"quadrature", s.quadrature},
                          {"step", s.step},
                          {"mode", s.mode},
                          {"mu_I", s.mu_i},
                          {"sigma_I", s.sigma_i},
                          {"sigma_p", s.sigma_p},
                          {"tau", s.tau},
                          {"outcome", s.outcome},
                          {"p_outcome", s.p_outcome},
                          {"sigma_n", s.sigma_n},
                          {"threshold", s.threshold},
                          {"entropy", s.entropy},
                          {"kl", finite_or_null(s.kl)},
                          {"kick", s.kick},
                          {"correction_time", s.correction_time},
                          {"ledger", s.ledger}});
  return j;
}

void write_steps_csv(const std::vector<StepRecord>& steps, std::ostream& out) {
  out << std::setprecision(12)
      << "quadrature,step,mode,mu_I,sigma_I,sigma_p,tau,outcome,p_outcome,sigma_n,threshold,entropy,kl,kick,"
         "correction_time,ledger\n";
  for (const auto& s : steps)
    out << s.quadrature << ',' << s.step << ',' << s.mode << ',' << s.mu_i << ',' << s.sigma_i << ','
        << s.sigma_p << ',' << s.tau << ',' << s.outcome << ',' << s.p_outcome << ',' << s.sigma_n << ','
        << s.threshold << ',' << s.entropy << ',' << s.kl << ',' << s.kick << ',' << s.correction_time
        << ',' << s.ledger << '\n';
}

void write_steps_csv(const std::vector<StepRecord>& steps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_steps_csv(steps, out);
}

}  // namespace levcool
