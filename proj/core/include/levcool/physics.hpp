#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace levcool::physics {

// CODATA 2018 exact / recommended values (SI).
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kMu0 = 1.25663706212e-6;
inline constexpr double kPi = 3.14159265358979323846;
/// Gyromagnetic ratio of the NV electron spin, rad/(s T).
inline constexpr double kGammaNV = 1.76085963023e11;

/// SI description of the levitated magnet and its sensor.
///
/// `coupling` is optional: when set it overrides the value derived from the
/// field gradient (the tabulated presets carry g directly).
struct PhysicalParams {
  double radius = 1e-6;             // m
  double density = 7e3;             // kg/m^3
  double magnetization = 0.0;       // A/m
  double sensor_distance = 2e-6;    // m, from the trap centre to the TLS
  double trap_frequency = 2 * kPi * 100.0;  // rad/s
  double gyromagnetic_ratio = kGammaNV;     // rad/(s T)
  double temperature = 4.0;         // K
  std::optional<double> quality_factor;  // dimensionless
  double readout_fidelity = 1.0;    // in [0.5, 1]
  std::optional<double> coupling;   // 1/s, verbatim override

  /// Throws InvalidArgument listing the first violated invariant.
  void validate() const;
  /// All violated invariants, empty when valid.
  std::vector<std::string> violations() const;

  double mass() const;
  double zero_point_length() const;
};

struct FieldExpansion {
  double offset;    // B0, T
  double gradient;  // G, T/m
};

FieldExpansion field_expansion(const PhysicalParams& params);

/// |g| = |gamma G a0|, in rad/s. Returns the override when one is set.
double coupling_strength(const PhysicalParams& params);

/// Bose occupation of a mode at angular frequency `omega` and temperature `T`.
double thermal_occupation(double omega, double temperature);

/// Gamma = k_B T / (hbar Q), rad/s.
double heating_rate(double temperature, double quality_factor);

/// Damping rate entering the phase-space dissipator, gamma = Gamma / nbar.
double damping_rate(double heating, double nbar);

/// Ratio Delta_xy / g_z of the worst-case transverse-mode detuning.
double transverse_detuning_ratio(double max_tilt, double nbar_xy);

/// Named parameter set shipped with the library.
struct Preset {
  std::string name;
  std::string description;
  PhysicalParams params;
  double nv_depth = 0.0;  // m, documentation only
};

/// "table1-A" (shallow NV) and "table1-B" (deep NV).
const std::vector<Preset>& presets();
const Preset& preset(std::string_view name);

/// Key/value preset file (YAML mapping of SI quantities).
Preset load_preset_file(const std::string& path);
void save_preset_file(const Preset& preset, const std::string& path);

/// SI and dimensionless summary of a parameter set, as ordered key/value
/// rows. Quantities that cannot be computed (e.g. no magnetization) are
/// omitted.
struct Summary {
  std::vector<std::pair<std::string, double>> rows;
};
Summary summarize(const PhysicalParams& params);

}  // namespace levcool::physics
