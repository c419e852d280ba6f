// levcool: command-line front end for the cooling simulator.
#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "levcool/config.hpp"
#include "levcool/physics.hpp"
#include "levcool/protocol.hpp"
#include "levcool/pulse.hpp"
#include "levcool/sweep.hpp"
#include "levcool/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string output;
  std::size_t threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "YAML configuration file");
  app->add_option("--set", c.sets, "Override as section.key=value (repeatable)");
  app->add_option("-o,--output", c.output, "Output root directory");
  app->add_option("-j,--threads", c.threads, "Worker threads (0 = all cores)");
}

levcool::RunConfig load(const Common& c, std::vector<std::string> extra) {
  std::vector<std::string> overrides = c.sets;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (!c.output.empty()) overrides.push_back("output.dir=" + c.output);
  if (c.threads) overrides.push_back("output.threads=" + std::to_string(c.threads));
  return levcool::parse_and_validate(c.config.empty() ? std::nullopt : std::optional(c.config), overrides);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return s.str();
}

/// Timestamped run directory plus manifest bookkeeping.
class Run {
 public:
  Run(const std::string& root, const std::string& command, int argc, char** argv) : command_(command) {
    dir_ = fs::path(root) / (timestamp() + "-" + command);
    for (int i = 1; fs::exists(dir_); ++i) dir_ = fs::path(root) / (timestamp() + "-" + command + "-" + std::to_string(i));
    fs::create_directories(dir_);
    manifest_["command"] = command;
    for (int i = 0; i < argc; ++i) manifest_["argv"].push_back(argv[i]);
    manifest_["started"] = timestamp();
    manifest_["version"] = "0.1.0";
    manifest_["outputs"] = json::array();
  }

  fs::path file(const std::string& name) {
    manifest_["outputs"].push_back(name);
    return dir_ / name;
  }
  json& manifest() { return manifest_; }
  const fs::path& dir() const { return dir_; }

  void finish(const std::string& status) {
    manifest_["status"] = status;
    manifest_["finished"] = timestamp();
    std::ofstream(dir_ / "manifest.json") << manifest_.dump(2) << '\n';
    std::cout << "outputs: " << dir_.string() << '\n';
  }

 private:
  std::string command_;
  fs::path dir_;
  json manifest_;
};

json config_json(const levcool::RunConfig& c) {
  const auto& k = c.protocol.controller;
  const auto& p = c.protocol;
  json j;
  if (c.preset) j["preset"] = *c.preset;
  j["controller"] = {{"w", k.width_factor}, {"p_up", k.p_up}, {"theta_z", k.theta_z},
                     {"sigma_stop1", k.sigma_stop1}, {"sigma_stop2", k.sigma_stop2},
                     {"f", k.readout_fidelity}, {"g", k.g}, {"alpha", k.alpha},
                     {"duration_ratio", k.duration_ratio}, {"max_steps", k.max_steps}};
  j["protocol"] = {{"nbar", p.nbar}, {"gamma", p.heating_rate}, {"omega_m", p.trap_frequency},
                   {"mode", levcool::to_string(p.mode)}, {"likelihood", levcool::to_string(p.likelihood)},
                   {"quadratures", p.quadratures}, {"belief_points", p.belief_points},
                   {"wigner_points", p.wigner_points}, {"wigner_half_width", p.wigner_half_width},
                   {"final_displacement", p.final_displacement}, {"seed", p.seed}};
  return j;
}

int cmd_physics(const Common& common, const std::string& preset_file, int argc, char** argv) {
  auto cfg = load(common, {});
  levcool::physics::Preset preset{cfg.preset.value_or("custom"), "", cfg.physical, 0.0};
  if (!preset_file.empty()) preset = levcool::physics::load_preset_file(preset_file);
  const auto summary = levcool::physics::summarize(preset.params);
  Run run(cfg.output_dir, "physics", argc, argv);
  std::ofstream csv(run.file("physics.csv"));
  csv << std::setprecision(10) << "quantity,value\n";
  std::cout << "preset: " << preset.name << '\n';
  for (const auto& [k, v] : summary.rows) {
    csv << k << ',' << v << '\n';
    std::cout << "  " << std::left << std::setw(34) << k << std::setprecision(6) << v << '\n';
  }
  run.finish("ok");
  return 0;
}

struct ProfileArgs {
  std::string kind = "gaussian";
  double sigma_p = 0.5;
  double ratio = levcool::kDefaultDurationRatio;
  double rabi = 1.0;
  double g = 1.0;
  std::size_t points = 601;
  bool calibrate = false;
  std::string cache;
};

int cmd_profile(const Common& common, const ProfileArgs& a, int argc, char** argv) {
  auto cfg = load(common, {});
  Run run(cfg.output_dir, "profile", argc, argv);
  levcool::PulseSpec pulse = a.kind == "square" ? levcool::PulseSpec::square(0.0, a.rabi)
                                                : levcool::PulseSpec::gaussian_envelope(0.0, a.sigma_p, a.ratio);
  // Profile width scale: 1 / (g sigma_p) for gaussian, Omega / g for square.
  const double scale = a.kind == "square" ? a.rabi / a.g : 1.0 / (a.g * a.sigma_p);
  const auto grid = levcool::UniformGrid::centered(0.0, 6.0 * scale, a.points);
  const auto profile = levcool::inversion_profile(pulse, a.g, grid);
  {
    std::ofstream csv(run.file("profile.csv"));
    profile.write_csv(csv);
  }
  json fit;
  fit["kind"] = a.kind;
  fit["g"] = a.g;
  fit["sigma_p"] = pulse.sigma_p;
  fit["tau"] = pulse.duration;
  if (profile.fit) {
    fit["center"] = profile.fit->center;
    fit["variance"] = profile.fit->variance;
    fit["max_residual"] = profile.fit->max_residual;
  }
  fit["alpha"] = profile.alpha;
  fit["gaussian_ok"] = profile.gaussian_ok;
  {
    std::ofstream csv(run.file("fit.csv"));
    csv << std::setprecision(12) << "kind,sigma_p,tau,center,variance,max_residual,alpha,gaussian_ok\n"
        << a.kind << ',' << pulse.sigma_p << ',' << pulse.duration << ','
        << (profile.fit ? profile.fit->center : 0.0) << ',' << (profile.fit ? profile.fit->variance : 0.0)
        << ',' << (profile.fit ? profile.fit->max_residual : 0.0) << ',' << profile.alpha << ','
        << profile.gaussian_ok << '\n';
  }
  std::cout << fit.dump(2) << '\n';
  if (a.calibrate) {
    levcool::CalibrationOptions opt;
    opt.g = a.g;
    opt.duration_ratio = a.ratio;
    const auto cal = levcool::calibrate_backaction(opt);
    cal.save(run.file("calibration.json").string());
    if (!a.cache.empty()) cal.save(a.cache);
    std::cout << "backaction slope " << cal.slope << " intercept " << cal.intercept << " R^2 "
              << cal.r_squared << '\n';
  }
  run.finish(profile.gaussian_ok ? "ok" : "poor_gaussian_fit");
  return 0;
}

int cmd_cool(const Common& common, const std::vector<std::string>& extra, int argc, char** argv) {
  auto cfg = load(common, extra);
  Run run(cfg.output_dir, "cool", argc, argv);
  run.manifest()["config"] = config_json(cfg);
  const auto rec = levcool::run_protocol(cfg.protocol);
  std::ofstream(run.file("trajectory.json")) << levcool::to_json(rec).dump(2) << '\n';
  levcool::write_steps_csv(rec.steps, run.file("steps.csv").string());
  std::cout << "status " << rec.status << ", measurements " << rec.count(1) << " + " << rec.count(2)
            << ", total time " << rec.total_time << " /g";
  if (rec.mode == levcool::SimulationMode::wigner) std::cout << ", F = " << rec.fidelity;
  std::cout << ", final entropy " << rec.final_entropy() << " bits\n";
  run.finish(rec.status);
  return rec.status == "ok" ? 0 : kExitRuntime;
}

int cmd_sweep(const Common& common, const std::vector<std::string>& extra,
              const std::vector<std::string>& axes, int argc, char** argv) {
  auto cfg = load(common, extra);
  for (const auto& spec : axes) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw levcool::ValidationError({"--axis '" + spec + "': expected name=v1,v2"});
    levcool::SweepAxis axis{spec.substr(0, eq), {}};
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) axis.values.push_back(std::stod(item));
    std::erase_if(cfg.sweep.axes, [&](const auto& a) { return a.name == axis.name; });
    cfg.sweep.axes.push_back(std::move(axis));
  }
  if (const auto v = cfg.sweep.violations(); !v.empty()) throw levcool::ValidationError(v);
  Run run(cfg.output_dir, "sweep", argc, argv);
  run.manifest()["config"] = config_json(cfg);
  run.manifest()["sweep"] = {{"trajectories", cfg.sweep.trajectories}, {"seed_base", cfg.sweep.seed_base},
                             {"schema_version", levcool::kSweepSchemaVersion}};
  for (const auto& a : cfg.sweep.axes) run.manifest()["sweep"]["axes"][a.name] = a.values;
  const auto result = levcool::run_sweep(cfg.sweep, [](std::size_t done, std::size_t total) {
    if (done == total || done % 50 == 0) std::cerr << "\r" << done << "/" << total << std::flush;
  });
  std::cerr << '\n';
  levcool::write_long_csv(result, run.file("sweep_long.csv").string());
  levcool::write_summary_json(result, run.file("summary.json").string());
  {
    std::ofstream wide(run.file("sweep_wide.csv"));
    levcool::write_wide_csv(result, {{"F", "F"}, {"final_entropy", "S"}, {"duration", "T"}, {"count", "N1"},
                                     {"count_q2", "N2"}},
                            wide);
  }
  std::size_t failures = 0;
  for (const auto& p : result.points) failures += p.failures;
  std::cout << result.points.size() << " points x " << result.trajectories << " trajectories, " << failures
            << " failed trajectories\n";
  run.finish(failures ? "partial" : "ok");
  return 0;
}

int cmd_validate(const Common& common, double alpha, int argc, char** argv) {
  auto cfg = load(common, {});
  levcool::ValidationOptions opt;
  opt.alpha_override = alpha;
  const auto results = levcool::validate_suite(opt);
  levcool::print_report(results, std::cout);
  Run run(cfg.output_dir, "validate", argc, argv);
  json j = json::array();
  for (const auto& r : results)
    j.push_back({{"name", r.name}, {"pass", r.pass}, {"error", std::isfinite(r.error) ? json(r.error) : json()},
                 {"tolerance", r.tolerance}, {"seconds", r.seconds}, {"detail", r.detail}});
  std::ofstream(run.file("validate.json")) << j.dump(2) << '\n';
  const bool ok = levcool::all_passed(results);
  run.finish(ok ? "ok" : "failed");
  return ok ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-measurement ground-state cooling simulator"};
  app.require_subcommand(1);

  Common common;
  std::string preset_file;
  auto* physics = app.add_subcommand("physics", "Convert physical parameters to dimensionless units");
  add_common(physics, common);
  physics->add_option("--preset-file", preset_file, "YAML preset file (overrides the config preset)");
  std::string preset;
  physics->add_option("--preset", preset, "Named preset (table1-A, table1-B)");

  ProfileArgs pa;
  auto* profile = app.add_subcommand("profile", "Inversion profile, Gaussian fit and backaction calibration");
  add_common(profile, common);
  profile->add_option("--kind", pa.kind, "gaussian or square")->check(CLI::IsMember({"gaussian", "square"}));
  profile->add_option("--sigma-p", pa.sigma_p, "Envelope width (1/g)")->check(CLI::PositiveNumber);
  profile->add_option("--ratio", pa.ratio, "tau / sigma_p")->check(CLI::Range(6.0, 100.0));
  profile->add_option("--rabi", pa.rabi, "Square-pulse Rabi frequency (g)")->check(CLI::PositiveNumber);
  profile->add_option("--g", pa.g, "Coupling in the chosen time unit")->check(CLI::PositiveNumber);
  profile->add_option("--points", pa.points, "Samples over +-6 widths")->check(CLI::Range(11, 1000000));
  profile->add_flag("--calibrate", pa.calibrate, "Also fit the backaction displacement");
  profile->add_option("--cache", pa.cache, "Write the calibration to this file as well");

  std::string mode, likelihood;
  double nbar = -1, f = -1, gamma = -1;
  long long seed = -1;
  std::size_t grid = 0, quadratures = 0;
  auto* cool = app.add_subcommand("cool", "Run one cooling trajectory");
  add_common(cool, common);
  cool->add_option("--mode", mode, "bayes or wigner");
  cool->add_option("--likelihood", likelihood, "gaussian or numeric");
  cool->add_option("--nbar", nbar, "Initial thermal occupation");
  cool->add_option("--f", f, "Readout fidelity");
  cool->add_option("--gamma", gamma, "Heating rate Gamma (units of g)");
  cool->add_option("--seed", seed, "Random seed");
  cool->add_option("--grid", grid, "Wigner grid points per axis");
  cool->add_option("--quadratures", quadratures, "1 or 2");

  std::vector<std::string> axes;
  std::size_t trajectories = 0;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo parameter sweep");
  add_common(sweep, common);
  sweep->add_option("--axis", axes, "Axis as name=v1,v2,... (repeatable)");
  sweep->add_option("--trajectories", trajectories, "Trajectories per point");
  sweep->add_option("--mode", mode, "bayes or wigner");
  sweep->add_option("--quadratures", quadratures, "1 or 2");

  double alpha = 0.0;
  auto* validate = app.add_subcommand("validate", "Run the fast oracle suite");
  add_common(validate, common);
  validate->add_option("--alpha", alpha, "Override alpha in the profile oracle (fault injection)");

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> extra;
  if (!mode.empty()) extra.push_back("protocol.mode=" + mode);
  if (!likelihood.empty()) extra.push_back("protocol.likelihood=" + likelihood);
  if (nbar >= 0) extra.push_back("protocol.nbar=" + std::to_string(nbar));
  if (f >= 0) extra.push_back("controller.f=" + std::to_string(f));
  if (gamma >= 0) extra.push_back("protocol.gamma=" + std::to_string(gamma));
  if (seed >= 0) extra.push_back("protocol.seed=" + std::to_string(seed));
  if (grid) extra.push_back("protocol.wigner_points=" + std::to_string(grid));
  if (quadratures) extra.push_back("protocol.quadratures=" + std::to_string(quadratures));
  if (trajectories) extra.push_back("sweep.trajectories=" + std::to_string(trajectories));
  if (!preset.empty()) common.sets.push_back("preset=" + preset);

  try {
    if (*physics) return cmd_physics(common, preset_file, argc, argv);
    if (*profile) return cmd_profile(common, pa, argc, argv);
    if (*cool) return cmd_cool(common, extra, argc, argv);
    if (*sweep) return cmd_sweep(common, extra, axes, argc, argv);
    if (*validate) return cmd_validate(common, alpha, argc, argv);
  } catch (const levcool::ValidationError& e) {
    std::cerr << json{{"status", "validation_failed"}, {"errors", e.issues()}}.dump(2) << '\n';
    return kExitValidation;
  } catch (const levcool::ConfigFileMissing& e) {
    std::cerr << json{{"status", "config_missing"}, {"errors", {e.what()}}}.dump(2) << '\n';
    return kExitValidation;
  } catch (const levcool::ConfigFileMalformed& e) {
    std::cerr << json{{"status", "config_malformed"}, {"errors", {e.what()}}}.dump(2) << '\n';
    return kExitValidation;
  } catch (const levcool::InvalidArgument& e) {
    std::cerr << json{{"status", "invalid_argument"}, {"errors", {e.what()}}}.dump(2) << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << json{{"status", "runtime_error"}, {"errors", {e.what()}}}.dump(2) << '\n';
    return kExitRuntime;
  }
  return 0;
}
