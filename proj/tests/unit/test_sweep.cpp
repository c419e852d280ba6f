#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "levcool/errors.hpp"
#include "levcool/sweep.hpp"

using namespace levcool;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.axes = {{"f", {0.9, 1.0}}, {"nbar", {50.0, 100.0, 200.0}}};
  s.trajectories = 4;
  s.seed_base = 17;
  s.threads = 1;
  return s;
}

void expect_same(const SweepResult& a, const SweepResult& b) {
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t p = 0; p < a.points.size(); ++p)
    for (const auto& [k, m] : a.points[p].metrics) {
      const auto& o = b.points[p].metrics.at(k);
      EXPECT_EQ(m.n, o.n);
      if (m.n) {
        EXPECT_EQ(m.mean, o.mean) << k;
        EXPECT_EQ(m.std, o.std) << k;
      }
    }
}

}  // namespace

TEST(Seeds, CounterBased) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t p = 0; p < 20; ++p)
    for (std::uint64_t t = 0; t < 20; ++t) seen.insert(derive_seed(7, p, t));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(5, 1, 2), splitmix64(splitmix64(splitmix64(5) ^ 1) ^ 2));
}

TEST(SweepSpec, PointLayout) {
  const auto s = small_spec();
  EXPECT_EQ(s.point_count(), 6u);
  EXPECT_EQ(s.point_values(0), (std::vector<double>{0.9, 50.0}));
  EXPECT_EQ(s.point_values(1), (std::vector<double>{0.9, 100.0}));
  EXPECT_EQ(s.point_values(5), (std::vector<double>{1.0, 200.0}));
  EXPECT_DOUBLE_EQ(s.point_config(4).nbar, 100.0);
  EXPECT_DOUBLE_EQ(s.point_config(4).controller.readout_fidelity, 1.0);
}

TEST(SweepSpec, Violations) {
  auto s = small_spec();
  s.axes.push_back({"bogus", {1.0}});
  s.trajectories = 0;
  EXPECT_GE(s.violations().size(), 2u);
  auto p = small_spec();
  p.axes = {{"p_up", {0.4, 0.9}}};
  EXPECT_FALSE(p.violations().empty());
  EXPECT_THROW(run_sweep(p), InvalidArgument);
}

TEST(Sweep, SinglePointReproducesProtocol) {
  SweepSpec s;
  s.trajectories = 1;
  s.seed_base = 99;
  s.keep_records = true;
  const auto res = run_sweep(s);
  ASSERT_EQ(res.points.size(), 1u);
  auto cfg = s.base;
  cfg.seed = derive_seed(99, 0, 0);
  const auto r = run_protocol(cfg);
  const auto& k = res.points[0].records.at(0);
  ASSERT_EQ(k.steps.size(), r.steps.size());
  EXPECT_EQ(k.total_time, r.total_time);
  EXPECT_EQ(res.points[0].metrics.at("final_entropy").mean, r.final_entropy());
  EXPECT_EQ(res.points[0].metrics.at("count").mean, static_cast<double>(r.count(1)));
}

TEST(Sweep, ReproducibleAndScheduleIndependent) {
  auto s = small_spec();
  const auto a = run_sweep(s);
  const auto b = run_sweep(s);
  expect_same(a, b);
  s.threads = 4;
  expect_same(a, run_sweep(s));
}

TEST(Sweep, PerPointFailuresRecorded) {
  SweepSpec s;
  s.axes = {{"nbar", {60.0, 5.0}}};
  s.trajectories = 3;
  s.runner = [](const ProtocolConfig& c, const BackactionCalibration& cal) {
    if (c.nbar > 10 && c.seed % 3 != 0) throw NumericalError("injected");
    return run_protocol(c, cal);
  };
  const auto r = run_sweep(s);
  ASSERT_EQ(r.points.size(), 2u);
  std::size_t expected = 0;
  for (std::size_t t = 0; t < 3; ++t) expected += derive_seed(s.seed_base, 0, t) % 3 != 0;
  EXPECT_EQ(r.points[0].failures, expected);
  EXPECT_EQ(r.points[0].errors.size(), expected);
  if (expected) EXPECT_NE(r.points[0].errors.front().find("injected"), std::string::npos);
  EXPECT_EQ(r.points[0].metrics.at("final_entropy").n, 3 - expected);
  EXPECT_EQ(r.points[1].failures, 0u);
}

TEST(Aggregate, Basics) {
  const auto m = summarize({0.4, 0.6});
  EXPECT_DOUBLE_EQ(m.mean, 0.5);
  EXPECT_NEAR(m.std, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(m.n, 2u);
  EXPECT_EQ(summarize({1.0, NAN}).n, 1u);

  ProtocolConfig c;
  c.seed = 4;
  const auto r = run_protocol(c);
  const auto sum = aggregate_trajectories({r, r, r});
  EXPECT_EQ(sum.trajectories, 3u);
  for (const auto& [k, v] : sum.metrics)
    if (v.n) EXPECT_EQ(v.std, 0.0) << k;
  ASSERT_EQ(sum.quadratures.size(), 2u);
  for (double s : sum.quadratures[0].entropy_std) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(sum.quadratures[0].entropy_mean.size(), r.count(1));
}

TEST(Aggregate, CarryForward) {
  ProtocolConfig c;
  c.quadratures = 1;
  std::vector<TrajectoryRecord> recs;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    c.seed = s;
    recs.push_back(run_protocol(c));
  }
  std::size_t longest = 0;
  for (const auto& r : recs) longest = std::max(longest, r.count(1));
  const auto sum = aggregate_trajectories(recs);
  EXPECT_EQ(sum.quadratures[0].entropy_mean.size(), longest);
  EXPECT_FALSE(sum.histograms.at("count").second.empty());
}

TEST(Report, EmptyTableIsHeaderOnly) {
  SweepResult empty;
  empty.axes = {"f", "nbar"};
  std::ostringstream out;
  write_long_csv(empty, out);
  EXPECT_EQ(out.str(), "point,f,nbar,metric,mean,std,min,max,n,failures\n");
}

TEST(Report, LongCsvRoundTrip) {
  const auto res = run_sweep(small_spec());
  std::stringstream io;
  write_long_csv(res, io);
  const auto back = read_long_csv(io);
  EXPECT_EQ(back.axes, res.axes);
  ASSERT_EQ(back.points.size(), res.points.size());
  for (std::size_t p = 0; p < res.points.size(); ++p) {
    EXPECT_EQ(back.points[p].values, res.points[p].values);
    EXPECT_EQ(back.points[p].failures, res.points[p].failures);
    for (const auto& [k, m] : res.points[p].metrics) {
      const auto& o = back.points[p].metrics.at(k);
      EXPECT_EQ(o.n, m.n);
      if (m.n) {
        EXPECT_EQ(o.mean, m.mean);
        EXPECT_EQ(o.max, m.max);
      }
    }
  }
}

TEST(Report, WideColumnsAndJson) {
  SweepResult r;
  r.axes = {"f", "nbar"};
  PointResult p;
  p.values = {0.9, 100.0};
  p.metrics["F"] = summarize({0.8, 0.9});
  r.points.push_back(p);
  std::ostringstream out;
  write_wide_csv(r, {{"F", "F"}}, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "f,nbar,F_mean,F_std");
  const auto j = to_json(r);
  EXPECT_EQ(j["schema"], "levcool-sweep");
  EXPECT_EQ(j["version"], kSweepSchemaVersion);
}
