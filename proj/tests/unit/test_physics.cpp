#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "levcool/errors.hpp"
#include "levcool/physics.hpp"

using namespace levcool;
using namespace levcool::physics;

namespace {

PhysicalParams reference_params() {
  PhysicalParams p;
  p.radius = 1e-6;
  p.magnetization = 1e6;
  p.sensor_distance = 2e-6;
  p.density = 7e3;
  p.trap_frequency = 2 * kPi * 100.0;
  return p;
}

}  // namespace

TEST(FieldExpansion, ZeroMagnetization) {
  auto p = reference_params();
  p.magnetization = 0.0;
  const auto f = field_expansion(p);
  EXPECT_EQ(f.offset, 0.0);
  EXPECT_EQ(f.gradient, 0.0);
}

TEST(FieldExpansion, ReferenceValues) {
  // mpmath, 30 digits
  const auto f = field_expansion(reference_params());
  EXPECT_NEAR(f.offset, 0.104719755176666666, 1e-15);
  EXPECT_NEAR(f.gradient / -157079.632765, 1.0, 1e-10);
}

TEST(FieldExpansion, PowerLaws) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int i = 0; i < 50; ++i) {
    auto p = reference_params();
    p.radius = u(rng) * 1e-6;
    p.sensor_distance = p.radius * (1.1 + u(rng));
    auto q = p;
    const double c = u(rng);
    q.sensor_distance *= c;
    const auto a = field_expansion(p), b = field_expansion(q);
    EXPECT_NEAR(b.offset / a.offset, std::pow(c, -3), 1e-12 * std::pow(c, -3));
    EXPECT_NEAR(b.gradient / a.gradient, std::pow(c, -4), 1e-12 * std::pow(c, -4));
    auto r = p;
    r.radius *= 0.5 * c;
    r.sensor_distance = p.sensor_distance;
    if (r.sensor_distance <= r.radius) continue;
    const auto d = field_expansion(r);
    EXPECT_NEAR(d.offset / a.offset, std::pow(0.5 * c, 3), 1e-12);
  }
  auto p = reference_params();
  auto q = p;
  q.sensor_distance *= 2;
  EXPECT_NEAR(field_expansion(p).offset / field_expansion(q).offset, 8.0, 1e-12);
  EXPECT_NEAR(field_expansion(p).gradient / field_expansion(q).gradient, 16.0, 1e-12);
}

TEST(FieldExpansion, RejectsNonPositiveDistance) {
  auto p = reference_params();
  p.sensor_distance = 0.0;
  EXPECT_THROW(field_expansion(p), InvalidArgument);
}

TEST(Coupling, FormulaChain) {
  const auto p = reference_params();
  // m -> a0 -> G -> g by hand (mpmath)
  EXPECT_NEAR(p.mass(), 2.93215314335047369e-14, 1e-26);
  EXPECT_NEAR(p.zero_point_length() / 2.39251583888947500e-12, 1.0, 1e-12);
  EXPECT_NEAR(coupling_strength(p) / 66175.8358841426465, 1.0, 1e-10);
}

TEST(Coupling, Scaling) {
  auto p = reference_params();
  p.magnetization = 0.0;
  EXPECT_EQ(coupling_strength(p), 0.0);

  p = reference_params();
  auto heavy = p;
  heavy.density *= 4;
  EXPECT_NEAR(heavy.zero_point_length() / p.zero_point_length(), 0.5, 1e-14);
  EXPECT_NEAR(coupling_strength(heavy) / coupling_strength(p), 0.5, 1e-14);

  for (double c : {0.1, 2.0, 17.0}) {
    auto q = p;
    q.magnetization *= c;
    EXPECT_NEAR(coupling_strength(q) / coupling_strength(p), c, 1e-12 * c);
  }
}

TEST(Coupling, OverrideIsVerbatim) {
  auto p = reference_params();
  p.coupling = 1234.5;
  EXPECT_EQ(coupling_strength(p), 1234.5);
}

TEST(Coupling, RejectsNonPositiveTrapFrequency) {
  auto p = reference_params();
  p.trap_frequency = 0.0;
  EXPECT_THROW(coupling_strength(p), InvalidArgument);
}

TEST(ThermalOccupation, Values) {
  EXPECT_EQ(thermal_occupation(1.0, 0.0), 0.0);
  // hbar omega / kT = 1
  const double omega = kBoltzmann * 3.0 / kHbar;
  EXPECT_NEAR(thermal_occupation(omega, 3.0), 0.581976706869326424, 1e-14);
  const double room = thermal_occupation(2 * kPi * 100.0, 300.0);
  EXPECT_NEAR(room / 62509857407.7837082, 1.0, 1e-10);
  EXPECT_GT(std::log10(room), 9.5);
  EXPECT_LT(std::log10(room), 11.0);
}

TEST(ThermalOccupation, Monotone) {
  double last = 0.0;
  for (double t = 1e-3; t < 1e3; t *= 1.7) {
    const double n = thermal_occupation(2 * kPi * 1e3, t);
    EXPECT_GT(n, last);
    last = n;
  }
  last = INFINITY;
  for (double w = 1.0; w < 1e12; w *= 3.1) {
    const double n = thermal_occupation(w, 4.0);
    EXPECT_LT(n, last);
    last = n;
  }
}

TEST(HeatingRate, Values) {
  EXPECT_EQ(heating_rate(0.0, 1e9), 0.0);
  EXPECT_NEAR(heating_rate(4.0, 1e9) / 523.681356828825628, 1.0, 1e-12);
  EXPECT_NEAR(heating_rate(8.0, 1e9) / heating_rate(4.0, 1e9), 2.0, 1e-14);
  EXPECT_THROW(heating_rate(4.0, 0.0), InvalidArgument);
  EXPECT_NEAR(damping_rate(10.0, 100.0), 0.1, 1e-15);
}

TEST(TransverseDetuning, Values) {
  EXPECT_EQ(transverse_detuning_ratio(0.0, 1e8), 0.0);
  EXPECT_NEAR(transverse_detuning_ratio(2e-5, 1e8), 0.1, 1e-9);
  EXPECT_NEAR(transverse_detuning_ratio(1e-3, 0.0), 1e-3 / (2 * std::sqrt(2.0)), 1e-16);
  EXPECT_THROW(transverse_detuning_ratio(-1.0, 0.0), InvalidArgument);
}

TEST(Params, Invariants) {
  auto p = reference_params();
  EXPECT_TRUE(p.violations().empty());
  p.radius = -1;
  p.readout_fidelity = 0.3;
  p.trap_frequency = 0;
  EXPECT_GE(p.violations().size(), 3u);
  EXPECT_THROW(p.validate(), InvalidArgument);
  auto q = reference_params();
  q.sensor_distance = 0.5 * q.radius;
  EXPECT_FALSE(q.violations().empty());
}

TEST(Presets, TableValues) {
  const auto& a = preset("table1-A");
  EXPECT_DOUBLE_EQ(a.params.radius, 0.5e-6);
  EXPECT_NEAR(a.params.trap_frequency / (2 * kPi), 1e3, 1e-9);
  EXPECT_DOUBLE_EQ(coupling_strength(a.params), 148e3);
  const auto& b = preset("table1-B");
  EXPECT_DOUBLE_EQ(coupling_strength(b.params), 6e3);
  EXPECT_THROW(preset("table1-Z"), InvalidArgument);
}

TEST(Presets, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "levcool_preset_test.yaml";
  save_preset_file(preset("table1-B"), path.string());
  const auto back = load_preset_file(path.string());
  EXPECT_EQ(back.name, "table1-B");
  EXPECT_DOUBLE_EQ(back.params.radius, 5e-6);
  EXPECT_DOUBLE_EQ(*back.params.coupling, 6e3);
  std::filesystem::remove(path);
  EXPECT_THROW(load_preset_file("/nonexistent/preset.yaml"), InvalidArgument);
}

TEST(Summary, ContainsDimensionlessQuantities) {
  const auto s = summarize(preset("table1-A").params);
  bool found = false;
  for (const auto& [k, v] : s.rows)
    if (k == "coupling_over_trap_frequency") {
      found = true;
      EXPECT_NEAR(v, 148e3 / (2 * kPi * 1e3), 1e-9);
    }
  EXPECT_TRUE(found);
}
