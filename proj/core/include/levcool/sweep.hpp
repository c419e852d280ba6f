#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "levcool/protocol.hpp"

namespace levcool {

/// Counter-based seed: splitmix64 applied to base, point and trajectory in turn.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trajectory);

struct SweepAxis {
  std::string name;  // f, nbar, w, p_up, theta_z, gamma, sigma_stop1, sigma_stop2
  std::vector<double> values;
};

/// Names accepted as sweep axes.
const std::vector<std::string>& sweep_axis_names();
/// Sets the named parameter on a protocol configuration.
void apply_axis(ProtocolConfig& config, const std::string& name, double value);

inline constexpr int kSweepSchemaVersion = 1;

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::size_t trajectories = 100;
  ProtocolConfig base;
  std::uint64_t seed_base = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool keep_records = false;
  /// Trajectory function; empty means run_protocol. Exceptions become per-point failures.
  std::function<TrajectoryRecord(const ProtocolConfig&, const BackactionCalibration&)> runner;

  std::size_t point_count() const;
  /// Axis values of point `index`, last axis fastest.
  std::vector<double> point_values(std::size_t index) const;
  ProtocolConfig point_config(std::size_t index) const;
  std::vector<std::string> violations() const;
  void validate() const;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;  // finite samples
};

MetricSummary summarize(const std::vector<double>& samples);

/// Metrics recorded per trajectory.
const std::vector<std::string>& sweep_metric_names();
/// F, final_entropy, duration, count, count_q2 for one trajectory.
std::map<std::string, double> trajectory_metrics(const TrajectoryRecord& record);

struct PointResult {
  std::size_t index = 0;
  std::vector<double> values;
  std::map<std::string, MetricSummary> metrics;
  std::size_t failures = 0;
  std::vector<std::string> errors;
  std::vector<TrajectoryRecord> records;  // only with keep_records
};

struct SweepResult {
  std::vector<std::string> axes;
  std::size_t trajectories = 0;
  std::uint64_t seed_base = 0;
  std::vector<PointResult> points;
};

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

SweepResult run_sweep(const SweepSpec& spec, const ProgressCallback& progress = {});

/// Per-step statistics aligned by step index within a quadrature. Finished
/// trajectories carry their last value forward.
struct StepSeries {
  std::vector<double> entropy_mean, entropy_std;
  std::vector<double> sigma_mean, sigma_std;
};

struct TrajectorySummary {
  std::size_t trajectories = 0;
  std::map<std::string, MetricSummary> metrics;
  std::vector<StepSeries> quadratures;
  /// Histograms of the final metrics: bin edges and counts.
  std::map<std::string, std::pair<std::vector<double>, std::vector<std::size_t>>> histograms;
};

TrajectorySummary aggregate_trajectories(const std::vector<TrajectoryRecord>& records,
                                         std::size_t bins = 10);

// Reports.
/// Long format: point,<axes...>,metric,mean,std,min,max,n,failures.
void write_long_csv(const SweepResult& result, std::ostream& out);
void write_long_csv(const SweepResult& result, const std::string& path);
SweepResult read_long_csv(std::istream& in);
SweepResult read_long_csv(const std::string& path);
/// Wide table of the axes followed by <label>_mean, <label>_std per metric.
void write_wide_csv(const SweepResult& result,
                    const std::vector<std::pair<std::string, std::string>>& metric_labels,
                    std::ostream& out);
nlohmann::json to_json(const SweepResult& result);
void write_summary_json(const SweepResult& result, const std::string& path);

}  // namespace levcool
