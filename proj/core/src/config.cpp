#include "levcool/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace levcool {

namespace {

std::string join(const std::vector<std::string>& issues) {
  std::ostringstream s;
  s << "configuration invalid:";
  for (const auto& i : issues) s << "\n  - " << i;
  return s.str();
}

class Reader {
 public:
  Reader(const YAML::Node& root, std::vector<std::string>& issues) : root_(root), issues_(issues) {}

  template <class T>
  void get(const char* section, const char* key, T& out) {
    const YAML::Node sec = root_[section];
    if (!sec || !sec[key]) return;
    try {
      out = sec[key].as<T>();
    } catch (const YAML::Exception&) {
      issues_.push_back(std::string(section) + "." + key + ": cannot parse '" + scalar(sec[key]) + "'");
    }
  }

  void check_keys(const char* section, const std::set<std::string>& allowed) {
    const YAML::Node sec = root_[section];
    if (!sec) return;
    if (!sec.IsMap()) {
      issues_.push_back(std::string(section) + ": expected a mapping");
      return;
    }
    for (const auto& kv : sec) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) issues_.push_back(std::string(section) + "." + key + ": unknown key");
    }
  }

 private:
  static std::string scalar(const YAML::Node& n) {
    if (n.IsScalar()) return n.Scalar();
    YAML::Emitter e;
    e << n;
    return e.c_str();
  }
  const YAML::Node& root_;
  std::vector<std::string>& issues_;
};

void apply_override(YAML::Node& root, const std::string& item, std::vector<std::string>& issues) {
  const auto eq = item.find('=');
  const auto dot = item.find('.');
  if (eq != std::string::npos && item.compare(0, eq, "preset") == 0) {
    root["preset"] = item.substr(eq + 1);
    return;
  }
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    issues.push_back("override '" + item + "': expected section.key=value");
    return;
  }
  const std::string section = item.substr(0, dot);
  const std::string key = item.substr(dot + 1, eq - dot - 1);
  const std::string value = item.substr(eq + 1);
  try {
    root[section][key] = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    issues.push_back("override '" + item + "': " + e.what());
  }
}

RunConfig from_node(YAML::Node root, const std::vector<std::string>& overrides) {
  std::vector<std::string> issues;
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigFileMalformed("configuration root must be a mapping");

  if (const char* dir = std::getenv("LEVCOOL_OUTPUT_DIR"); dir && *dir) root["output"]["dir"] = dir;
  if (const char* th = std::getenv("LEVCOOL_THREADS"); th && *th) root["output"]["threads"] = YAML::Load(th);
  for (const auto& o : overrides) apply_override(root, o, issues);

  static const std::set<std::string> top{"preset", "physics", "controller", "protocol", "sweep", "output"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!top.count(key)) issues.push_back(key + ": unknown section");
  }

  Reader r(root, issues);
  RunConfig c;
  if (root["preset"]) {
    try {
      const auto name = root["preset"].as<std::string>();
      c.physical = physics::preset(name).params;
      c.preset = name;
    } catch (const std::exception& e) {
      issues.push_back(std::string("preset: ") + e.what());
    }
  }
  r.check_keys("physics", {"radius", "density", "magnetization", "sensor_distance", "trap_frequency",
                           "gyromagnetic_ratio", "temperature", "quality_factor", "readout_fidelity",
                           "coupling"});
  auto& p = c.physical;
  r.get("physics", "radius", p.radius);
  r.get("physics", "density", p.density);
  r.get("physics", "magnetization", p.magnetization);
  r.get("physics", "sensor_distance", p.sensor_distance);
  r.get("physics", "trap_frequency", p.trap_frequency);
  r.get("physics", "gyromagnetic_ratio", p.gyromagnetic_ratio);
  r.get("physics", "temperature", p.temperature);
  r.get("physics", "readout_fidelity", p.readout_fidelity);
  if (root["physics"] && root["physics"]["quality_factor"]) {
    double q = 0;
    r.get("physics", "quality_factor", q);
    p.quality_factor = q;
  }
  if (root["physics"] && root["physics"]["coupling"]) {
    double g = 0;
    r.get("physics", "coupling", g);
    p.coupling = g;
  }

  r.check_keys("controller", {"w", "p_up", "theta_z", "sigma_stop1", "sigma_stop2", "f", "g", "alpha",
                              "duration_ratio", "max_steps"});
  auto& k = c.protocol.controller;
  r.get("controller", "w", k.width_factor);
  r.get("controller", "p_up", k.p_up);
  r.get("controller", "theta_z", k.theta_z);
  r.get("controller", "sigma_stop1", k.sigma_stop1);
  r.get("controller", "sigma_stop2", k.sigma_stop2);
  r.get("controller", "f", k.readout_fidelity);
  r.get("controller", "g", k.g);
  r.get("controller", "alpha", k.alpha);
  r.get("controller", "duration_ratio", k.duration_ratio);
  r.get("controller", "max_steps", k.max_steps);

  r.check_keys("protocol", {"nbar", "gamma", "omega_m", "mode", "likelihood", "quadratures",
                            "belief_points", "wigner_points", "wigner_half_width", "final_displacement",
                            "seed"});
  auto& pr = c.protocol;
  r.get("protocol", "nbar", pr.nbar);
  r.get("protocol", "gamma", pr.heating_rate);
  r.get("protocol", "omega_m", pr.trap_frequency);
  r.get("protocol", "quadratures", pr.quadratures);
  r.get("protocol", "belief_points", pr.belief_points);
  r.get("protocol", "wigner_points", pr.wigner_points);
  r.get("protocol", "wigner_half_width", pr.wigner_half_width);
  r.get("protocol", "final_displacement", pr.final_displacement);
  r.get("protocol", "seed", pr.seed);
  std::string mode = to_string(pr.mode), like = to_string(pr.likelihood);
  r.get("protocol", "mode", mode);
  r.get("protocol", "likelihood", like);
  try {
    pr.mode = parse_mode(mode);
  } catch (const std::exception& e) {
    issues.push_back(std::string("protocol.mode: ") + e.what());
  }
  try {
    pr.likelihood = parse_likelihood(like);
  } catch (const std::exception& e) {
    issues.push_back(std::string("protocol.likelihood: ") + e.what());
  }

  r.check_keys("sweep", {"trajectories", "seed_base", "keep_records", "axes"});
  c.sweep.trajectories = pr.mode == SimulationMode::wigner ? 20 : 100;
  r.get("sweep", "trajectories", c.sweep.trajectories);
  r.get("sweep", "seed_base", c.sweep.seed_base);
  r.get("sweep", "keep_records", c.sweep.keep_records);
  if (root["sweep"] && root["sweep"]["axes"]) {
    const YAML::Node axes = root["sweep"]["axes"];
    if (!axes.IsMap()) {
      issues.push_back("sweep.axes: expected a mapping of axis name to value list");
    } else {
      for (const auto& kv : axes) {
        SweepAxis a;
        a.name = kv.first.as<std::string>();
        try {
          a.values = kv.second.IsSequence() ? kv.second.as<std::vector<double>>()
                                            : std::vector<double>{kv.second.as<double>()};
        } catch (const YAML::Exception&) {
          issues.push_back("sweep.axes." + a.name + ": expected numbers");
        }
        c.sweep.axes.push_back(std::move(a));
      }
    }
  }

  r.check_keys("output", {"dir", "threads"});
  r.get("output", "dir", c.output_dir);
  r.get("output", "threads", c.threads);
  c.sweep.threads = c.threads;
  c.sweep.base = c.protocol;

  for (auto& v : c.violations()) issues.push_back(std::move(v));
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : InvalidArgument(join(issues)), issues_(std::move(issues)) {}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out;
  for (const auto& v : physical.violations()) out.push_back("physics: " + v);
  for (const auto& v : protocol.violations()) out.push_back("protocol: " + v);
  if (!sweep.axes.empty())
    for (const auto& v : sweep.violations()) out.push_back("sweep: " + v);
  if (output_dir.empty()) out.push_back("output.dir must not be empty");
  return out;
}

RunConfig parse_and_validate(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  YAML::Node root;
  if (path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(*path, ec))
      throw ConfigFileMissing("configuration file '" + *path + "' not found");
    std::ifstream probe(*path);
    if (!probe) throw ConfigFileMissing("configuration file '" + *path + "' is not readable");
    try {
      root = YAML::LoadFile(*path);
    } catch (const YAML::Exception& e) {
      throw ConfigFileMalformed("configuration file '" + *path + "' is malformed: " + e.what());
    }
  }
  return from_node(root, overrides);
}

RunConfig parse_config_text(const std::string& yaml, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigFileMalformed(std::string("configuration text is malformed: ") + e.what());
  }
  return from_node(root, overrides);
}

}  // namespace levcool
