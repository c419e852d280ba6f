#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "levcool/bayes.hpp"
#include "levcool/errors.hpp"
#include "levcool/lambert_w.hpp"

using namespace levcool;
using std::numbers::pi;

namespace {

GridDistribution standard_normal() { return GridDistribution::gaussian(UniformGrid::centered(0.0, 12.0, 20001), 0.0, 1.0); }

double normal_pdf(double z, double mu, double s) {
  return std::exp(-0.5 * (z - mu) * (z - mu) / (s * s)) / std::sqrt(2 * pi * s * s);
}

GridDistribution random_distribution(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = UniformGrid::centered(u(rng) * 4 - 2, 10.0, 801);
  const double m1 = u(rng) * 6 - 3, m2 = u(rng) * 6 - 3, s1 = 0.3 + u(rng), s2 = 0.3 + 2 * u(rng), w = u(rng);
  return GridDistribution::from_function(grid, [&](double z) {
    return w * normal_pdf(z, m1, s1) + (1 - w) * normal_pdf(z, m2, s2) + 1e-3 * u(rng);
  });
}

}  // namespace

TEST(ThermalPrior, Moments) {
  const auto vac = thermal_prior(0.0, thermal_grid(0.0));
  EXPECT_NEAR(vac.variance(), 0.5, 1e-6);
  const auto p = thermal_prior(100.0, thermal_grid(100.0));
  EXPECT_NEAR(p.variance() / 100.5, 1.0, 1e-3);
  EXPECT_NEAR(p.total_mass(), 1.0, 1e-12);
  const auto q = thermal_prior(300.0, thermal_grid(300.0));
  EXPECT_NEAR(shannon_entropy(q), 0.5 * std::log2(2 * pi * std::numbers::e * 300.5), 1e-4);
}

TEST(ThermalPrior, RejectsNarrowGrid) {
  EXPECT_THROW(thermal_prior(100.0, UniformGrid::centered(0.0, 50.0, 1001)), GridTooSmall);
  EXPECT_THROW(thermal_prior(-1.0, thermal_grid(1.0)), InvalidArgument);
}

TEST(UpdatePerfect, UninformativeLikelihood) {
  const auto prior = standard_normal();
  const auto r = update_perfect(prior, InversionProfile::constant(1.0), Spin::up);
  EXPECT_NEAR(r.probability, 1.0, 1e-14);
  for (std::size_t i = 0; i < prior.size(); i += 97) EXPECT_NEAR(r.posterior[i], prior[i], 1e-15);
}

TEST(UpdatePerfect, GaussianProduct) {
  const auto prior = standard_normal();
  const auto r = update_perfect(prior, InversionProfile::gaussian(0.0, 1.0), Spin::up);
  EXPECT_NEAR(r.probability, 1.0 / std::sqrt(2.0), 1e-8);
  double err = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i)
    err = std::max(err, std::abs(r.posterior[i] - normal_pdf(prior.z(i), 0.0, std::sqrt(0.5))));
  EXPECT_LT(err, 1e-8);
  EXPECT_NEAR(r.posterior.variance(), 0.5, 1e-8);
}

TEST(UpdatePerfect, ProbabilitiesComplement) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto prior = random_distribution(rng);
    const auto prof = InversionProfile::gaussian(prior.mean() + 0.5 * i / 20.0, 0.5 + 0.1 * i);
    const double up = update_perfect(prior, prof, Spin::up).probability;
    const double down = update_perfect(prior, prof, Spin::down).probability;
    EXPECT_NEAR(up + down, 1.0, 1e-12);
  }
}

TEST(UpdatePerfect, ImpossibleOutcome) {
  const auto prior = standard_normal();
  EXPECT_THROW(update_perfect(prior, InversionProfile::constant(0.0), Spin::up), ImpossibleOutcome);
}

TEST(UpdateImperfect, PerfectLimitIsBitExact) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto prior = random_distribution(rng);
    const auto prof = InversionProfile::gaussian(0.3 * i - 1.0, 1.1);
    for (int obs : {0, 1}) {
      const auto a = update_imperfect(prior, prof, obs, 1.0);
      const auto b = update_perfect(prior, prof, reported_spin(obs));
      EXPECT_EQ(a.probability, b.probability);
      for (std::size_t k = 0; k < prior.size(); ++k) ASSERT_EQ(a.posterior[k], b.posterior[k]);
    }
  }
}

TEST(UpdateImperfect, HalfFidelityIsIdentity) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10; ++i) {
    const auto prior = random_distribution(rng);
    const auto prof = InversionProfile::gaussian(0.2 * i, 0.7);
    for (int obs : {0, 1}) {
      const auto r = update_imperfect(prior, prof, obs, 0.5);
      EXPECT_NEAR(r.probability, 0.5, 1e-12);
      for (std::size_t k = 0; k < prior.size(); ++k) ASSERT_NEAR(r.posterior[k], prior[k], 1e-12);
    }
  }
}

TEST(UpdateImperfect, QuadratureOracle) {
  const auto prior = standard_normal();
  const auto r = update_imperfect(prior, InversionProfile::gaussian(0.0, 1.0), 1, 0.9);
  const double p = 0.9 / std::sqrt(2.0) + 0.1 * (1.0 - 1.0 / std::sqrt(2.0));
  EXPECT_NEAR(r.probability, p, 1e-10);
  double err = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double z = prior.z(i), l = std::exp(-0.5 * z * z);
    err = std::max(err, std::abs(r.posterior[i] - (0.9 * l + 0.1 * (1 - l)) * normal_pdf(z, 0, 1) / p));
  }
  EXPECT_LT(err, 1e-10);
  EXPECT_THROW(update_imperfect(prior, InversionProfile::gaussian(0, 1), 1, 0.4), InvalidArgument);
  EXPECT_THROW(update_imperfect(prior, InversionProfile::gaussian(0, 1), 2, 0.9), InvalidArgument);
}

TEST(UpdateImperfect, MartingaleAndNormalisation) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> f(0.5, 1.0);
  for (int i = 0; i < 25; ++i) {
    const auto prior = random_distribution(rng);
    const auto prof = InversionProfile::gaussian(prior.mode() + 0.1 * i, 0.4 + 0.1 * i);
    const double fid = f(rng);
    const auto up = update_imperfect(prior, prof, 1, fid);
    const auto down = update_imperfect(prior, prof, 0, fid);
    EXPECT_NEAR(up.probability + down.probability, 1.0, 1e-12);
    EXPECT_NEAR(up.posterior.total_mass(), 1.0, 1e-10);
    for (std::size_t k = 0; k < prior.size(); ++k) {
      ASSERT_GE(up.posterior[k], 0.0);
      ASSERT_NEAR(up.probability * up.posterior[k] + down.probability * down.posterior[k], prior[k],
                  1e-12 * (1 + prior[k]));
    }
  }
}

TEST(Entropy, Gaussian) {
  for (double s : {0.01, 0.5, 3.0, 100.0}) {
    const auto d = GridDistribution::gaussian(UniformGrid::centered(0.0, 12 * s, 8001), 0.0, s);
    EXPECT_NEAR(shannon_entropy(d), gaussian_entropy(s), 1e-6);
    EXPECT_NEAR(gaussian_entropy(s), 0.5 * std::log2(2 * pi * std::numbers::e * s * s), 1e-14);
  }
}

TEST(Entropy, ScalingAddsOneBit) {
  std::mt19937_64 rng(2);
  const auto d = random_distribution(rng);
  auto g = d.grid();
  g.start *= 2;
  g.step *= 2;
  std::vector<double> half(d.density().begin(), d.density().end());
  const GridDistribution stretched(g, half);
  EXPECT_NEAR(shannon_entropy(stretched) - shannon_entropy(d), 1.0, 1e-12);
}

TEST(Entropy, ThermalBudget) {
  const double nbar = 1000.0;
  const auto th = thermal_prior(nbar, thermal_grid(nbar));
  EXPECT_NEAR(shannon_entropy(th) - gaussian_entropy(std::sqrt(0.5)), 0.5 * std::log2(2 * nbar + 1), 1e-5);
}

TEST(Kl, ClosedForms) {
  const auto grid = UniformGrid::centered(0.0, 20.0, 8001);
  const auto d = GridDistribution::gaussian(grid, 0.3, 1.4);
  EXPECT_NEAR(kl_to_gaussian(d, 0.3, 1.4), 0.0, 1e-9);
  const auto n01 = GridDistribution::gaussian(grid, 0.0, 1.0);
  EXPECT_NEAR(kl_to_gaussian(n01, 0.0, 2.0), std::log(2.0) + 1.0 / 8.0 - 0.5, 1e-9);
  EXPECT_NEAR(kl_to_gaussian(n01, 0.5, 2.0), std::log(2.0) + (1.0 + 0.25) / 8.0 - 0.5, 1e-9);
  EXPECT_THROW(kl_to_gaussian(n01, 0.0, 0.0), InvalidArgument);
  // Far-off narrow reference: finite, no underflow.
  const double far = std::log(0.01) + (1.0 + 225.0) / (2 * 1e-4) - 0.5;
  EXPECT_NEAR(kl_to_gaussian(n01, 15.0, 0.01) / far, 1.0, 1e-6);
}

TEST(Kl, Nonnegative) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const auto d = random_distribution(rng);
    EXPECT_GE(kl_to_gaussian(d, d.mean(), 0.5 + 0.2 * i), 0.0);
  }
}

TEST(EffectiveWidth, OneSigmaCrossing) {
  const auto d = GridDistribution::gaussian(UniformGrid::centered(1.0, 10.0, 40001), 1.0, 1.3);
  const auto w = effective_width(d, d.max_density() * std::exp(-0.5));
  EXPECT_NEAR(w.span / 2, 1.3, 1e-6);
  EXPECT_NEAR(w.sigma, w.span / 2, 1e-12);
  EXPECT_NEAR(w.mode, 1.0, 1e-3);
}

TEST(EffectiveWidth, LambertRoundTrip) {
  for (double s = 1e-3; s <= 1e3; s *= 1.5) {
    const double h = 1.5 * s;
    const double theta = std::exp(-0.5 * h * h / (s * s)) / std::sqrt(2 * pi * s * s);
    EXPECT_NEAR(width_from_span(3 * s, theta) / s, 1.0, 1e-9);
  }
}

TEST(EffectiveWidth, SidePeakWidensSpan) {
  const auto grid = UniformGrid::centered(0.0, 20.0, 4001);
  const auto main = GridDistribution::gaussian(grid, 0.0, 1.0);
  const auto both = GridDistribution::from_function(
      grid, [](double z) { return normal_pdf(z, 0, 1) + 0.3 * normal_pdf(z, 6, 0.5); });
  const double theta = 0.02;
  // Crossings move from about +-2.4 to about -2.4 and 7.
  EXPECT_GT(effective_width(both, theta).span, effective_width(main, theta).span + 4.0);
}

TEST(EffectiveWidth, ThresholdTooHigh) {
  const auto d = standard_normal();
  EXPECT_THROW(effective_width(d, 2 * d.max_density()), ThresholdTooHigh);
}

TEST(LambertW, Values) {
  EXPECT_NEAR(lambert_w_m1(-1.0 / std::numbers::e), -1.0, 1e-7);
  EXPECT_NEAR(lambert_w_m1(-0.1), -3.57715206395729714, 1e-12);
  EXPECT_THROW(lambert_w_m1(0.0), InvalidArgument);
  EXPECT_THROW(lambert_w_m1(-0.5), InvalidArgument);
  EXPECT_THROW(lambert_w_m1(0.1), InvalidArgument);
}

TEST(LambertW, ResidualRandom) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    // log-uniform over [1e-300, 1/e)
    const double x = -std::exp(-1.0 - u(rng) * 690.0);
    const double w = lambert_w_m1(x);
    EXPECT_LE(w, -1.0);
    EXPECT_LT(std::abs(w * std::exp(w) - x), 1e-12 * std::abs(x));
  }
}

TEST(Regrid, PreservesMoments) {
  const auto d = GridDistribution::gaussian(thermal_grid(100.0), 3.7, 0.2);
  const auto r = regrid(d, 0.2);
  EXPECT_NEAR(r.total_mass(), 1.0, 1e-8);
  EXPECT_NEAR(r.mean(), d.mean(), 1e-6 * std::abs(d.mean()));
  EXPECT_NEAR(r.variance() / d.variance(), 1.0, 1e-6);
  EXPECT_LT(r.grid().step, d.grid().step / 10);
}

TEST(BeliefState, RegridsOnlyWhenNarrow) {
  BeliefState b(thermal_prior(100.0, thermal_grid(100.0)));
  EXPECT_FALSE(b.maybe_regrid(10.0));
  EXPECT_TRUE(b.maybe_regrid(0.05));
}
