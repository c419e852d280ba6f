#include "levcool/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "levcool/errors.hpp"

namespace levcool {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trajectory) {
  return splitmix64(splitmix64(splitmix64(base) ^ point) ^ trajectory);
}

const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names{"f", "nbar", "w", "p_up", "theta_z", "gamma",
                                              "sigma_stop1", "sigma_stop2"};
  return names;
}

void apply_axis(ProtocolConfig& c, const std::string& name, double v) {
  if (name == "f") c.controller.readout_fidelity = v;
  else if (name == "nbar") c.nbar = v;
  else if (name == "w") c.controller.width_factor = v;
  else if (name == "p_up") c.controller.p_up = v;
  else if (name == "theta_z") c.controller.theta_z = v;
  else if (name == "gamma") c.heating_rate = v;
  else if (name == "sigma_stop1") c.controller.sigma_stop1 = v;
  else if (name == "sigma_stop2") c.controller.sigma_stop2 = v;
  else throw InvalidArgument("unknown sweep axis '" + name + "'");
}

std::size_t SweepSpec::point_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<double> SweepSpec::point_values(std::size_t index) const {
  std::vector<double> v(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    const std::size_t len = axes[i].values.size();
    v[i] = axes[i].values[index % len];
    index /= len;
  }
  return v;
}

ProtocolConfig SweepSpec::point_config(std::size_t index) const {
  ProtocolConfig c = base;
  const auto v = point_values(index);
  for (std::size_t i = 0; i < axes.size(); ++i) apply_axis(c, axes[i].name, v[i]);
  return c;
}

std::vector<std::string> SweepSpec::violations() const {
  std::vector<std::string> out;
  if (trajectories == 0) out.push_back("trajectories must be positive");
  const auto& names = sweep_axis_names();
  for (const auto& a : axes) {
    if (std::find(names.begin(), names.end(), a.name) == names.end())
      out.push_back("unknown sweep axis '" + a.name + "'");
    if (a.values.empty()) out.push_back("axis '" + a.name + "' has no values");
  }
  for (std::size_t i = 0; i < axes.size(); ++i)
    for (std::size_t k = i + 1; k < axes.size(); ++k)
      if (axes[i].name == axes[k].name) out.push_back("axis '" + axes[i].name + "' repeated");
  if (!out.empty()) return out;
  for (std::size_t p = 0; p < point_count(); ++p) {
    for (const auto& v : point_config(p).violations()) {
      std::ostringstream s;
      s << "point " << p << ": " << v;
      out.push_back(s.str());
    }
  }
  return out;
}

void SweepSpec::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid sweep:";
  for (const auto& s : v) msg << "\n  - " << s;
  throw InvalidArgument(msg.str());
}

MetricSummary summarize(const std::vector<double>& samples) {
  MetricSummary m;
  double sum = 0.0;
  m.min = std::numeric_limits<double>::infinity();
  m.max = -m.min;
  for (double x : samples) {
    if (!std::isfinite(x)) continue;
    ++m.n;
    sum += x;
    m.min = std::min(m.min, x);
    m.max = std::max(m.max, x);
  }
  if (m.n == 0) {
    m.mean = m.std = m.min = m.max = std::nan("");
    return m;
  }
  if (m.min == m.max) {
    m.mean = m.min;
    m.std = 0.0;
    return m;
  }
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0.0;
  for (double x : samples)
    if (std::isfinite(x)) ss += (x - m.mean) * (x - m.mean);
  m.std = m.n > 1 ? std::sqrt(ss / static_cast<double>(m.n - 1)) : 0.0;
  return m;
}

const std::vector<std::string>& sweep_metric_names() {
  static const std::vector<std::string> names{"F", "final_entropy", "duration", "count", "count_q2"};
  return names;
}

std::map<std::string, double> trajectory_metrics(const TrajectoryRecord& r) {
  const bool ok = r.status == "ok";
  const double nan = std::nan("");
  return {{"F", ok ? r.fidelity : nan},
          {"final_entropy", ok ? r.final_entropy() : nan},
          {"duration", ok ? r.total_time : nan},
          {"count", ok ? static_cast<double>(r.count(1)) : nan},
          {"count_q2", ok && r.quadratures.size() > 1 ? static_cast<double>(r.count(2)) : nan}};
}

SweepResult run_sweep(const SweepSpec& spec, const ProgressCallback& progress) {
  spec.validate();
  const std::size_t points = spec.point_count();
  const std::size_t total = points * spec.trajectories;
  std::vector<TrajectoryRecord> records(total);
  const BackactionCalibration& calib = default_calibration();  // built once, before the workers

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      const std::size_t p = task / spec.trajectories, t = task % spec.trajectories;
      ProtocolConfig c = spec.point_config(p);
      c.seed = derive_seed(spec.seed_base, p, t);
      try {
        records[task] = spec.runner ? spec.runner(c, calib) : run_protocol(c, calib);
      } catch (const std::exception& e) {
        records[task].seed = c.seed;
        records[task].mode = c.mode;
        records[task].status = "error";
        records[task].message = e.what();
      }
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  std::size_t threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(total, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SweepResult result;
  for (const auto& a : spec.axes) result.axes.push_back(a.name);
  result.trajectories = spec.trajectories;
  result.seed_base = spec.seed_base;
  for (std::size_t p = 0; p < points; ++p) {
    PointResult pr;
    pr.index = p;
    pr.values = spec.point_values(p);
    std::map<std::string, std::vector<double>> samples;
    for (std::size_t t = 0; t < spec.trajectories; ++t) {
      auto& r = records[p * spec.trajectories + t];
      if (r.status != "ok") {
        ++pr.failures;
        pr.errors.push_back(r.status + ": " + r.message);
      }
      for (const auto& [k, v] : trajectory_metrics(r)) samples[k].push_back(v);
      if (spec.keep_records) pr.records.push_back(std::move(r));
    }
    for (const auto& name : sweep_metric_names()) pr.metrics[name] = summarize(samples[name]);
    result.points.push_back(std::move(pr));
  }
  return result;
}

TrajectorySummary aggregate_trajectories(const std::vector<TrajectoryRecord>& records, std::size_t bins) {
  if (records.empty()) throw InvalidArgument("aggregate_trajectories: no records");
  TrajectorySummary s;
  s.trajectories = records.size();
  std::map<std::string, std::vector<double>> samples;
  for (const auto& r : records)
    for (const auto& [k, v] : trajectory_metrics(r)) samples[k].push_back(v);
  for (const auto& name : sweep_metric_names()) s.metrics[name] = summarize(samples[name]);

  for (int q = 1; q <= 2; ++q) {
    std::vector<std::vector<double>> ent, sig;
    std::size_t longest = 0;
    for (const auto& r : records) {
      std::vector<double> e, g;
      for (const auto& st : r.steps)
        if (st.quadrature == q) {
          e.push_back(st.entropy);
          g.push_back(st.sigma_n);
        }
      longest = std::max(longest, e.size());
      ent.push_back(std::move(e));
      sig.push_back(std::move(g));
    }
    if (longest == 0) break;
    StepSeries series;
    for (std::size_t k = 0; k < longest; ++k) {
      std::vector<double> ek, gk;
      for (std::size_t i = 0; i < ent.size(); ++i) {
        if (ent[i].empty()) continue;
        const std::size_t idx = std::min(k, ent[i].size() - 1);
        ek.push_back(ent[i][idx]);
        gk.push_back(sig[i][idx]);
      }
      const auto me = summarize(ek), mg = summarize(gk);
      series.entropy_mean.push_back(me.mean);
      series.entropy_std.push_back(me.std);
      series.sigma_mean.push_back(mg.mean);
      series.sigma_std.push_back(mg.std);
    }
    s.quadratures.push_back(std::move(series));
  }

  bins = std::max<std::size_t>(bins, 1);
  for (const auto& name : sweep_metric_names()) {
    const auto& m = s.metrics[name];
    if (m.n == 0) continue;
    std::vector<double> edges(bins + 1);
    const double width = m.max > m.min ? (m.max - m.min) / static_cast<double>(bins) : 1.0;
    for (std::size_t b = 0; b <= bins; ++b) edges[b] = m.min + width * static_cast<double>(b);
    std::vector<std::size_t> counts(bins, 0);
    for (double x : samples[name]) {
      if (!std::isfinite(x)) continue;
      auto b = static_cast<std::size_t>((x - m.min) / width);
      counts[std::min(b, bins - 1)]++;
    }
    s.histograms[name] = {std::move(edges), std::move(counts)};
  }
  return s;
}

// --- reports -----------------------------------------------------------------

void write_long_csv(const SweepResult& r, std::ostream& out) {
  out << std::setprecision(17) << "point";
  for (const auto& a : r.axes) out << ',' << a;
  out << ",metric,mean,std,min,max,n,failures\n";
  for (const auto& p : r.points)
    for (const auto& [name, m] : p.metrics) {
      out << p.index;
      for (double v : p.values) out << ',' << v;
      out << ',' << name << ',' << m.mean << ',' << m.std << ',' << m.min << ',' << m.max << ',' << m.n << ','
          << p.failures << '\n';
    }
}

void write_long_csv(const SweepResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_long_csv(r, out);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

}  // namespace

SweepResult read_long_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("sweep CSV: missing header");
  const auto header = split(line);
  if (header.size() < 8 || header.front() != "point" || header[header.size() - 7] != "metric")
    throw InvalidArgument("sweep CSV: unexpected header '" + line + "'");
  SweepResult r;
  const std::size_t naxes = header.size() - 8;
  r.axes.assign(header.begin() + 1, header.begin() + 1 + static_cast<std::ptrdiff_t>(naxes));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != header.size()) throw InvalidArgument("sweep CSV: ragged row '" + line + "'");
    const std::size_t index = std::stoul(c[0]);
    if (r.points.empty() || r.points.back().index != index) {
      PointResult p;
      p.index = index;
      for (std::size_t i = 0; i < naxes; ++i) p.values.push_back(parse_double(c[1 + i]));
      p.failures = std::stoul(c.back());
      r.points.push_back(std::move(p));
    }
    MetricSummary m;
    m.mean = parse_double(c[naxes + 2]);
    m.std = parse_double(c[naxes + 3]);
    m.min = parse_double(c[naxes + 4]);
    m.max = parse_double(c[naxes + 5]);
    m.n = std::stoul(c[naxes + 6]);
    r.points.back().metrics[c[naxes + 1]] = m;
  }
  return r;
}

SweepResult read_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_long_csv(in);
}

void write_wide_csv(const SweepResult& r, const std::vector<std::pair<std::string, std::string>>& labels,
                    std::ostream& out) {
  out << std::setprecision(17);
  bool first = true;
  for (const auto& a : r.axes) {
    out << (first ? "" : ",") << a;
    first = false;
  }
  for (const auto& [metric, label] : labels) {
    out << (first ? "" : ",") << label << "_mean," << label << "_std";
    first = false;
  }
  out << '\n';
  for (const auto& p : r.points) {
    first = true;
    for (double v : p.values) {
      out << (first ? "" : ",") << v;
      first = false;
    }
    for (const auto& [metric, label] : labels) {
      const auto it = p.metrics.find(metric);
      const MetricSummary m = it == p.metrics.end() ? MetricSummary{} : it->second;
      out << (first ? "" : ",") << m.mean << ',' << m.std;
      first = false;
    }
    out << '\n';
  }
}

nlohmann::json to_json(const SweepResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json j;
  j["schema"] = "levcool-sweep";
  j["version"] = kSweepSchemaVersion;
  j["axes"] = r.axes;
  j["trajectories"] = r.trajectories;
  j["seed_base"] = r.seed_base;
  j["points"] = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json jp;
    jp["index"] = p.index;
    jp["values"] = p.values;
    jp["failures"] = p.failures;
    if (!p.errors.empty()) jp["errors"] = p.errors;
    for (const auto& [name, m] : p.metrics)
      jp["metrics"][name] = {{"mean", num(m.mean)}, {"std", num(m.std)}, {"min", num(m.min)},
                             {"max", num(m.max)}, {"n", m.n}};
    j["points"].push_back(std::move(jp));
  }
  return j;
}

void write_summary_json(const SweepResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json(r).dump(2) << '\n';
}

}  // namespace levcool
