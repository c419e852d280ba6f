#include "levcool/physics.hpp"

#include <cmath>
#include <fstream>
#include <yaml-cpp/yaml.h>

#include "levcool/errors.hpp"

namespace levcool::physics {

std::vector<std::string> PhysicalParams::violations() const {
  std::vector<std::string> out;
  if (!(radius > 0)) out.emplace_back("radius must be positive");
  if (!(density > 0)) out.emplace_back("density must be positive");
  // The NV sits outside the particle; preset A has r0 = 1.3 R.
  if (!(sensor_distance > radius))
    out.emplace_back("sensor_distance must exceed the particle radius");
  if (!(trap_frequency > 0)) out.emplace_back("trap_frequency must be positive");
  if (!(temperature >= 0)) out.emplace_back("temperature must be non-negative");
  if (quality_factor && !(*quality_factor > 0))
    out.emplace_back("quality_factor must be positive");
  if (!(readout_fidelity >= 0.5 && readout_fidelity <= 1.0))
    out.emplace_back("readout_fidelity must lie in [0.5, 1]");
  if (coupling && !(*coupling >= 0)) out.emplace_back("coupling must be non-negative");
  return out;
}

void PhysicalParams::validate() const {
  auto v = violations();
  if (!v.empty()) throw InvalidArgument("PhysicalParams: " + v.front());
}

double PhysicalParams::mass() const {
  return 4.0 / 3.0 * kPi * radius * radius * radius * density;
}

double PhysicalParams::zero_point_length() const {
  if (!(trap_frequency > 0)) throw InvalidArgument("trap_frequency must be positive");
  return std::sqrt(kHbar / (mass() * trap_frequency));
}

FieldExpansion field_expansion(const PhysicalParams& p) {
  if (!(p.sensor_distance > 0)) throw InvalidArgument("sensor_distance must be positive");
  const double r3 = p.radius * p.radius * p.radius;
  const double d3 = p.sensor_distance * p.sensor_distance * p.sensor_distance;
  const double moment = kMu0 * p.magnetization * r3;
  return {2.0 * moment / (3.0 * d3), -2.0 * moment / (d3 * p.sensor_distance)};
}

double coupling_strength(const PhysicalParams& p) {
  if (p.coupling) return *p.coupling;
  if (!(p.trap_frequency > 0)) throw InvalidArgument("trap_frequency must be positive");
  const auto field = field_expansion(p);
  return std::abs(p.gyromagnetic_ratio * field.gradient * p.zero_point_length());
}

double thermal_occupation(double omega, double temperature) {
  if (!(omega > 0)) throw InvalidArgument("thermal_occupation: omega must be positive");
  if (!(temperature >= 0)) throw InvalidArgument("thermal_occupation: negative temperature");
  if (temperature == 0) return 0.0;
  const double x = kHbar * omega / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double heating_rate(double temperature, double quality_factor) {
  if (!(quality_factor > 0)) throw InvalidArgument("heating_rate: Q must be positive");
  if (!(temperature >= 0)) throw InvalidArgument("heating_rate: negative temperature");
  return kBoltzmann * temperature / (kHbar * quality_factor);
}

double damping_rate(double heating, double nbar) {
  if (!(nbar > 0)) throw InvalidArgument("damping_rate: nbar must be positive");
  return heating / nbar;
}

double transverse_detuning_ratio(double max_tilt, double nbar_xy) {
  if (!(max_tilt >= 0) || !(nbar_xy >= 0))
    throw InvalidArgument("transverse_detuning_ratio: arguments must be non-negative");
  return 0.5 * max_tilt * std::sqrt(nbar_xy + 0.5);
}

const std::vector<Preset>& presets() {
  // Magnetization is unknown for these cases, so g is stored verbatim.
  static const std::vector<Preset> table = [] {
    Preset a;
    a.name = "table1-A";
    a.description = "shallow NV: R = 0.5 um, w_M/2pi = 1 kHz, d = 0.65 um, g = 148 kHz";
    a.params.radius = 0.5e-6;
    a.params.density = 7e3;
    a.params.sensor_distance = 0.65e-6;
    a.params.trap_frequency = 2 * kPi * 1e3;
    a.params.coupling = 148e3;
    a.nv_depth = 0.1e-6;

    Preset b;
    b.name = "table1-B";
    b.description = "deep NV: R = 5 um, w_M/2pi = 0.1 kHz, d = 7 um, g = 6 kHz";
    b.params.radius = 5e-6;
    b.params.density = 7e3;
    b.params.sensor_distance = 7e-6;
    b.params.trap_frequency = 2 * kPi * 0.1e3;
    b.params.coupling = 6e3;
    b.nv_depth = 1e-6;
    return std::vector<Preset>{a, b};
  }();
  return table;
}

const Preset& preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw InvalidArgument("unknown preset '" + std::string(name) + "'");
}

namespace {

template <class T>
void read_if(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

}  // namespace

Preset load_preset_file(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw InvalidArgument("cannot open preset file '" + path + "'");
  YAML::Node node;
  try {
    node = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw InvalidArgument("malformed preset file '" + path + "': " + e.what());
  }
  Preset out;
  if (node["base"]) out = preset(node["base"].as<std::string>());
  try {
    read_if(node, "name", out.name);
    read_if(node, "description", out.description);
    auto& p = out.params;
    read_if(node, "radius", p.radius);
    read_if(node, "density", p.density);
    read_if(node, "magnetization", p.magnetization);
    read_if(node, "sensor_distance", p.sensor_distance);
    read_if(node, "trap_frequency", p.trap_frequency);
    read_if(node, "gyromagnetic_ratio", p.gyromagnetic_ratio);
    read_if(node, "temperature", p.temperature);
    read_if(node, "readout_fidelity", p.readout_fidelity);
    read_if(node, "nv_depth", out.nv_depth);
    if (node["quality_factor"]) p.quality_factor = node["quality_factor"].as<double>();
    if (node["coupling"]) p.coupling = node["coupling"].as<double>();
  } catch (const YAML::Exception& e) {
    throw InvalidArgument("malformed preset file '" + path + "': " + e.what());
  }
  return out;
}

void save_preset_file(const Preset& preset, const std::string& path) {
  YAML::Emitter out;
  const auto& p = preset.params;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << preset.name;
  out << YAML::Key << "description" << YAML::Value << preset.description;
  out << YAML::Key << "radius" << YAML::Value << p.radius;
  out << YAML::Key << "density" << YAML::Value << p.density;
  out << YAML::Key << "magnetization" << YAML::Value << p.magnetization;
  out << YAML::Key << "sensor_distance" << YAML::Value << p.sensor_distance;
  out << YAML::Key << "trap_frequency" << YAML::Value << p.trap_frequency;
  out << YAML::Key << "gyromagnetic_ratio" << YAML::Value << p.gyromagnetic_ratio;
  out << YAML::Key << "temperature" << YAML::Value << p.temperature;
  out << YAML::Key << "readout_fidelity" << YAML::Value << p.readout_fidelity;
  out << YAML::Key << "nv_depth" << YAML::Value << preset.nv_depth;
  if (p.quality_factor) out << YAML::Key << "quality_factor" << YAML::Value << *p.quality_factor;
  if (p.coupling) out << YAML::Key << "coupling" << YAML::Value << *p.coupling;
  out << YAML::EndMap;
  std::ofstream file(path);
  if (!file) throw Error("cannot write preset file '" + path + "'");
  file << out.c_str() << '\n';
}

Summary summarize(const PhysicalParams& p) {
  p.validate();
  Summary s;
  auto add = [&](std::string key, double value) { s.rows.emplace_back(std::move(key), value); };
  add("radius_m", p.radius);
  add("mass_kg", p.mass());
  add("trap_frequency_rad_s", p.trap_frequency);
  add("zero_point_length_m", p.zero_point_length());
  if (p.magnetization != 0.0) {
    const auto f = field_expansion(p);
    add("field_offset_T", f.offset);
    add("field_gradient_T_per_m", f.gradient);
  }
  const double g = coupling_strength(p);
  add("coupling_per_s", g);
  add("coupling_over_trap_frequency", g / p.trap_frequency);
  const double nbar = thermal_occupation(p.trap_frequency, p.temperature);
  add("thermal_occupation", nbar);
  add("entropy_budget_bits", nbar > 0 ? std::log2(nbar) : 0.0);
  if (p.quality_factor) {
    const double heating = heating_rate(p.temperature, *p.quality_factor);
    add("heating_rate_per_s", heating);
    add("heating_over_trap_frequency", heating / p.trap_frequency);
    if (g > 0) add("heating_over_coupling", heating / g);
    if (nbar > 0) add("damping_rate_per_s", damping_rate(heating, nbar));
  }
  if (g > 0) add("trap_frequency_over_coupling", p.trap_frequency / g);
  add("readout_fidelity", p.readout_fidelity);
  return s;
}

}  // namespace levcool::physics
