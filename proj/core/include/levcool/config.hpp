#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levcool/errors.hpp"
#include "levcool/physics.hpp"
#include "levcool/protocol.hpp"
#include "levcool/sweep.hpp"

namespace levcool {

/// Configuration failed cross-field validation; `issues` lists every violation.
class ValidationError : public InvalidArgument {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// The configuration file does not exist or cannot be read.
class ConfigFileMissing : public Error {
 public:
  using Error::Error;
};

/// The configuration file exists but is not valid YAML.
class ConfigFileMalformed : public Error {
 public:
  using Error::Error;
};

/// Merged run configuration.
///
/// YAML schema (every section optional):
///   preset: table1-A            # physical parameter set
///   physics: {radius: 5e-7, ...}  # SI overrides on top of the preset
///   controller: {w, p_up, theta_z, sigma_stop1, sigma_stop2, f, g, alpha,
///                duration_ratio, max_steps}
///   protocol: {nbar, gamma, omega_m, mode, likelihood, quadratures,
///              belief_points, wigner_points, wigner_half_width,
///              final_displacement, seed}
///   sweep: {trajectories, seed_base, keep_records, axes: {f: [0.8, 0.9], ...}}
///   output: {dir, threads}
struct RunConfig {
  std::optional<std::string> preset;
  physics::PhysicalParams physical;
  ProtocolConfig protocol;
  SweepSpec sweep;
  std::string output_dir = "runs";
  std::size_t threads = 0;

  std::vector<std::string> violations() const;
};

/// Loads `path` (if given), applies environment overrides (LEVCOOL_OUTPUT_DIR,
/// LEVCOOL_THREADS) and then `overrides` of the form "section.key=value".
/// Throws ConfigFileMissing, ConfigFileMalformed or ValidationError.
RunConfig parse_and_validate(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides = {});

/// Same, from YAML text (used by tests).
RunConfig parse_config_text(const std::string& yaml, const std::vector<std::string>& overrides = {});

}  // namespace levcool
