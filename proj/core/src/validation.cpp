#include "levcool/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "levcool/bayes.hpp"
#include "levcool/controller.hpp"
#include "levcool/lambert_w.hpp"
#include "levcool/pulse.hpp"
#include "levcool/wigner.hpp"

namespace levcool {

namespace {

OracleResult timed(const std::string& name, double tolerance,
                   const std::function<double(std::string&)>& body) {
  OracleResult r;
  r.name = name;
  r.tolerance = tolerance;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.error = body(r.detail);
    r.pass = std::isfinite(r.error) && r.error <= tolerance;
  } catch (const std::exception& e) {
    r.error = std::nan("");
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<OracleResult> validate_suite(const ValidationOptions& opt) {
  std::vector<OracleResult> out;

  out.push_back(timed("square_pulse_ode_vs_analytic", 1e-6, [](std::string& d) {
    const double rabi = 1.0, g = 1.0;
    const auto pulse = PulseSpec::square(0.0, rabi);
    double err = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double z = -5.0 + 10.0 * i / 400.0;
      err = std::max(err, std::abs(std::norm(tls_propagator(z, pulse, g).b) -
                                   square_profile_analytic(rabi, z, g)));
    }
    d = "Delta/Omega in [-5, 5], 401 points";
    return err;
  }));

  out.push_back(timed("gaussian_profile_vs_alpha_model", kMaxGaussianResidual, [&](std::string& d) {
    const double g = 1.0, sigma_p = 0.5;
    const double alpha = opt.alpha_override > 0 ? opt.alpha_override : PulseFamily::standard().alpha();
    const auto pulse = PulseSpec::gaussian_envelope(0.0, sigma_p);
    const double sigma_i = 1.0 / (g * sigma_p * std::sqrt(2.0 * alpha));
    double err = 0.0;
    for (int i = 0; i <= 240; ++i) {
      const double z = -6.0 * sigma_i + 12.0 * sigma_i * i / 240.0;
      const double model = std::exp(-0.5 * z * z / (sigma_i * sigma_i));
      err = std::max(err, std::abs(std::norm(tls_propagator(z, pulse, g).b) - model));
    }
    std::ostringstream s;
    s << "alpha = " << alpha;
    d = s.str();
    return err;
  }));

  out.push_back(timed("alpha_calibration", 0.05, [](std::string& d) {
    const auto& fam = PulseFamily::standard();
    std::ostringstream s;
    s << "alpha = " << fam.alpha() << ", fit residual " << fam.fit().max_residual;
    d = s.str();
    return std::max(std::abs(fam.alpha() - 1.15), fam.fit().max_residual > 0.05 ? 1.0 : 0.0);
  }));

  out.push_back(timed("bayes_gaussian_product", 1e-8, [](std::string& d) {
    const auto prior = GridDistribution::gaussian(UniformGrid::centered(0.0, 12.0, 4097), 0.0, 1.0);
    const auto r = update_perfect(prior, InversionProfile::gaussian(0.0, 1.0), Spin::up);
    const double s2 = 0.5;
    double err = std::abs(r.probability - 1.0 / std::sqrt(2.0));
    for (std::size_t i = 0; i < prior.size(); ++i) {
      const double z = prior.z(i);
      err = std::max(err, std::abs(r.posterior[i] - std::exp(-z * z / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2)));
    }
    d = "posterior N(0, 1/2), p = 1/sqrt(2)";
    return err;
  }));

  out.push_back(timed("imperfect_readout_limits", 1e-12, [](std::string& d) {
    const auto prior = GridDistribution::gaussian(UniformGrid::centered(0.3, 10.0, 2001), 0.3, 1.3);
    const auto prof = InversionProfile::gaussian(1.1, 0.8);
    double err = 0.0;
    for (int obs : {0, 1}) {
      const auto perfect = update_perfect(prior, prof, obs == 1 ? Spin::up : Spin::down);
      const auto one = update_imperfect(prior, prof, obs, 1.0);
      if (one.probability != perfect.probability) err = 1.0;
      for (std::size_t i = 0; i < prior.size(); ++i)
        if (one.posterior[i] != perfect.posterior[i]) err = 1.0;
      const auto half = update_imperfect(prior, prof, obs, 0.5);
      err = std::max(err, std::abs(half.probability - 0.5));
      for (std::size_t i = 0; i < prior.size(); ++i)
        err = std::max(err, std::abs(half.posterior[i] - prior[i]));
    }
    d = "f = 1 bit-exact, f = 1/2 identity";
    return err;
  }));

  out.push_back(timed("lambert_threshold_round_trip", 1e-9, [](std::string& d) {
    double err = std::abs(lambert_w_m1(-0.1) - (-3.577152063957297)) / 3.577152063957297;
    for (int i = 0; i <= 60; ++i) {
      const double sigma = std::pow(10.0, -3.0 + 6.0 * i / 60.0);
      const double span = 3.0 * sigma;
      const double h = 0.5 * span;
      const double theta = std::exp(-h * h / (2 * sigma * sigma)) / std::sqrt(2 * std::numbers::pi * sigma * sigma);
      err = std::max(err, std::abs(width_from_span(span, theta) - sigma) / sigma);
    }
    d = "sigma in [1e-3, 1e3], span 3 sigma";
    return err;
  }));

  out.push_back(timed("threshold_and_detuning_examples", 1e-3, [](std::string& d) {
    const double theta = compute_threshold(1.0, 2.75);
    const double offset = detuning_offset(1.0, 1.9, 0.4);
    d = "theta(1, 2.75) = 0.00910, offset(1, 1.9, 0.4) = 2.706";
    return std::max(std::abs(theta - 0.00910) / 0.00910, std::abs(offset - 2.706) / 2.706);
  }));

  out.push_back(timed("fidelity_identities", 1e-3, [](std::string& d) {
    auto vac = BlockWigner::thermal(0.0, 128, 8.0);
    auto th = BlockWigner::thermal(1.0, 128, 12.0);
    auto coh = BlockWigner::gaussian(128, 10.0, 0.7, -0.4, 0.5, 0.5);
    const double e1 = std::abs(vac.gs_fidelity() - 1.0);
    const double e2 = std::abs(th.gs_fidelity() - 0.5);
    const double e3 = std::abs(coh.gs_fidelity() - std::exp(-0.5 * (0.49 + 0.16)));
    d = "vacuum 1, thermal(1) 1/2, coherent exp(-(mu^2 + nu^2) / 2)";
    return std::max({e1, e2, e3});
  }));

  out.push_back(timed("rotation_involution", 1e-12, [](std::string& d) {
    auto w = BlockWigner::gaussian(64, 8.0, 1.0, -0.5, 0.3, 1.2);
    const auto ref = w.down();
    std::vector<double> before(ref.begin(), ref.end());
    const auto c0 = w.grid();
    for (int i = 0; i < 4; ++i) w.quarter_rotation();
    double err = std::abs(w.grid().center_mu - c0.center_mu) + std::abs(w.grid().center_nu - c0.center_nu);
    // The first row/column lose one edge line per turn; compare the interior.
    const std::size_t n = w.grid().n;
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t k = 1; k < n; ++k) err = std::max(err, std::abs(w.down()[j * n + k] - before[j * n + k]));
    d = "four quarter turns";
    return err;
  }));

  out.push_back(timed("backaction_linearity", 1e-3, [](std::string& d) {
    const auto cal = calibrate_backaction();
    std::ostringstream s;
    s << "slope " << cal.slope << ", R^2 " << cal.r_squared << ", max |up shift| " << cal.max_up_shift;
    d = s.str();
    return std::max(cal.max_up_shift, cal.r_squared > 0.99 ? 0.0 : 1.0);
  }));

  return out;
}

void print_report(const std::vector<OracleResult>& results, std::ostream& out) {
  out << std::left << std::setw(36) << "oracle" << std::setw(6) << "pass" << std::setw(14) << "error"
      << std::setw(12) << "tolerance" << std::setw(10) << "seconds" << "detail\n";
  for (const auto& r : results) {
    out << std::left << std::setw(36) << r.name << std::setw(6) << (r.pass ? "yes" : "NO") << std::setw(14)
        << std::setprecision(4) << r.error << std::setw(12) << r.tolerance << std::setw(10)
        << std::setprecision(3) << r.seconds << r.detail << '\n';
  }
}

bool all_passed(const std::vector<OracleResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

}  // namespace levcool
