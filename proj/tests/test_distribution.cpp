#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <random>
#include <vector>

#include "cwfield/distribution.hpp"
#include "oracles.hpp"

using namespace cwfield;

namespace {

FieldSequence golden_identity(std::size_t n, double x = 0.0) {
  return field_sequence(TorusRotation::golden(), FieldFunction::identity(), x, n);
}

double tv(const MagnetizationLaw& law, const std::vector<double>& ref) {
  double s = 0.0;
  for (std::size_t j = 0; j < ref.size(); ++j) s += std::abs(law.mass(j) - ref[j]);
  return 0.5 * s;
}

}  // namespace

TEST(WalkPmf, SmallExamples) {
  const auto fair = walk_pmf(make_field_sequence({0.5, 0.5}));
  EXPECT_NEAR(fair.mass_at(-2), 0.25, 1e-16);
  EXPECT_NEAR(fair.mass_at(0), 0.5, 1e-16);
  EXPECT_NEAR(fair.mass_at(2), 0.25, 1e-16);
  const auto sure = walk_pmf(make_field_sequence({1.0, 1.0, 1.0}));
  EXPECT_EQ(sure.mass_at(3), 1.0);
  EXPECT_EQ(sure.mass_at(1), 0.0);
  EXPECT_EQ(sure.mass_at(-3), 0.0);
  EXPECT_THROW(walk_pmf(FieldSequence{}), DomainError);
}

TEST(WalkPmf, MatchesEnumeration) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> P(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p(10);
    for (auto& v : p) v = P(rng);
    const auto ref = oracle::enumerate_gibbs(p, 0.0);
    const auto law = walk_pmf(make_field_sequence(p));
    for (std::size_t j = 0; j <= 10; ++j) EXPECT_NEAR(law.mass(j), ref[j], 1e-13);
  }
}

TEST(GibbsPmf, TwoSitesAtLogTwoAreUniform) {
  const auto law = gibbs_pmf(make_field_sequence({0.5, 0.5}), ModelParams{std::log(2.0), 1.0});
  for (long long k : {-2, 0, 2}) EXPECT_NEAR(law.mass_at(k), 1.0 / 3.0, 1e-15);
}

TEST(GibbsPmf, InfiniteTemperatureIsTheWalk) {
  const auto f = golden_identity(300, 0.2);
  const auto w = walk_pmf(f);
  const auto g = gibbs_pmf(f, ModelParams{0.0, 1.0});
  EXPECT_EQ(w.log_mass, g.log_mass);
}

TEST(GibbsPmf, MatchesEnumerationOnRandomInstances) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> P(0.0, 1.0), T(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(1 + rng() % 16);
    for (auto& v : p) v = P(rng);
    const double theta = T(rng);
    const auto law = gibbs_pmf(make_field_sequence(p), ModelParams{theta, 1.0});
    EXPECT_LT(tv(law, oracle::enumerate_gibbs(p, theta)), 1e-12) << "instance " << t;
  }
}

TEST(GibbsPmf, TiltIdentity) {
  for (double theta : {0.5, 1.5, 2.5}) {
    const auto f = golden_identity(500, 0.37);
    const auto w = walk_pmf(f);
    const auto g = gibbs_pmf(f, ModelParams{theta, 1.0});
    const double c0 = g.log_mass[0] - w.log_mass[0] - theta * 500.0 / 2.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double k = static_cast<double>(g.k(j));
      EXPECT_NEAR(g.log_mass[j] - w.log_mass[j] - theta * k * k / 1000.0, c0, 1e-12 * std::max(1.0, std::abs(c0)));
    }
  }
}

TEST(GibbsPmf, ParityAndNormalization) {
  for (std::size_t n : {1u, 2u, 7u, 100u, 5000u}) {
    const auto law = gibbs_pmf(golden_identity(n), ModelParams{1.3, 1.0});
    EXPECT_NEAR(law.total_mass(), 1.0, 1e-12);
    EXPECT_EQ(law.size(), n + 1);
    const long long nn = static_cast<long long>(n);
    for (long long k = -nn - 2; k <= nn + 2; ++k)
      if ((k + nn) % 2 != 0 || k < -nn || k > nn) {
        EXPECT_EQ(law.mass_at(k), 0.0);
      }
  }
}

TEST(GibbsPmf, OverflowIsGuarded) {
  EXPECT_THROW(gibbs_pmf(golden_identity(10), ModelParams{std::numeric_limits<double>::infinity(), 1.0}),
               std::overflow_error);
}

TEST(GibbsPmf, CsvSchema) {
  const auto csv = gibbs_pmf(make_field_sequence({0.5, 0.5}), ModelParams{1.0, 1.0}).csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,mass");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(ScaledLaw, AffineRescalings) {
  const auto law = gibbs_pmf(golden_identity(64), ModelParams{1.0, 1.0});
  const auto lln = scaled_law(law, 0.0, 0.0);
  const auto clt = scaled_law(law, 0.0, 0.5);
  for (std::size_t j = 0; j < law.size(); ++j) {
    EXPECT_DOUBLE_EQ(lln.x[j], law.k(j) / 64.0);
    EXPECT_DOUBLE_EQ(clt.x[j], law.k(j) / 8.0);
    EXPECT_EQ(lln.w[j], law.mass(j));
  }
  const auto shifted = scaled_law(law, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(shifted.x[0], (-64.0 - 32.0) / 8.0);
}

TEST(ScaledLaw, SymmetricFieldGivesSymmetricLaw) {
  const auto law = gibbs_pmf(make_field_sequence({0.2, 0.8, 0.35, 0.65, 0.5}), ModelParams{1.7, 1.0});
  const auto s = scaled_law(law, 0.0, 0.5);
  for (std::size_t j = 0; j < s.x.size(); ++j) {
    EXPECT_DOUBLE_EQ(s.x[j], -s.x[s.x.size() - 1 - j]);
    EXPECT_NEAR(s.w[j], s.w[s.w.size() - 1 - j], 1e-15);
  }
  EXPECT_NEAR(s.mean(), 0.0, 1e-15);
}

TEST(LimitDensity, NormalizationAcrossOrdersAndRates) {
  for (int order : {2, 4, 6})
    for (double lt : {0.5, 1.0, 2.7}) {
      const LimitDensity d(order, lt);
      EXPECT_NEAR(d.quadrature_mass(), 1.0, 1e-10) << order << " " << lt;
      EXPECT_NEAR(d.cdf(0.0), 0.5, 1e-12);
    }
}

TEST(LimitDensity, QuarticConstantClosedForm) {
  const LimitDensity d(4, 2.7);
  const double want =
      std::sqrt(3.0) * std::tgamma(0.75) / (std::sqrt(2.0) * std::numbers::pi * std::pow(5.0, 0.25));
  EXPECT_NEAR(d.normalizer(), want, 1e-12);
  EXPECT_NEAR(d(1.3) / d.normalizer(), std::exp(-9.0 * std::pow(1.3, 4) / 80.0), 1e-14);
}

TEST(LimitDensity, NormalCase) {
  const auto d = LimitDensity::normal(2.0);
  for (double s : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    EXPECT_NEAR(d(s), std::exp(-s * s / 4.0) / std::sqrt(4.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(d.cdf(s), 0.5 * std::erfc(-s / 2.0), 1e-15);
  }
  // variance a / (1 - theta a) from the subcritical tilde strength
  const double a = 2.0 / 3.0, theta = 1.0, lambda = theta * (1.0 - theta * a);
  const LimitDensity sub(2, 1.0 / (1.0 / lambda - 1.0 / theta));
  EXPECT_NEAR(1.0 / sub.lambda_tilde(), a / (1.0 - theta * a), 1e-12);
}

TEST(LimitDensity, CdfIsMonotoneAndMatchesQuadrature) {
  const LimitDensity d(6, 1.0);
  double prev = 0.0;
  for (int i = -80; i <= 80; ++i) {
    const double s = 0.05 * i;
    const double c = d.cdf(s);
    EXPECT_GE(c, prev - 1e-15);
    prev = c;
  }
  EXPECT_NEAR(d.cdf(1.0) - d.cdf(-1.0), d.integral(-1.0, 1.0), 1e-13);
  EXPECT_THROW(LimitDensity(3, 1.0), DomainError);
  EXPECT_THROW(LimitDensity(4, 0.0), DomainError);
}

TEST(KsDistance, DiscretizedLimitIsWithinMaxMass) {
  for (int order : {2, 4}) {
    const LimitDensity d(order, 1.0);
    DiscreteLaw law;
    const double lo = -8.0, h = 0.1;
    for (int i = 0; i < 160; ++i) {
      const double a = lo + h * i, b = a + h;
      law.x.push_back(b);
      law.w.push_back(d.cdf(b) - d.cdf(a));
    }
    const double ks = ks_distance(law, d);
    EXPECT_LE(ks, law.max_mass() + 1e-12);
    EXPECT_GT(ks, 0.0);
  }
}

TEST(KsDistance, InfiniteTemperatureCentralLimit) {
  const auto law = gibbs_pmf(make_field_sequence(std::vector<double>(10000, 0.5)), ModelParams{0.0, 1.0});
  EXPECT_LT(ks_distance(scaled_law(law, 0.0, 0.5), LimitDensity::normal(1.0)), 0.02);
}

TEST(KsDistance, SubcriticalGoldenRotation) {
  const auto law = gibbs_pmf(golden_identity(4000), ModelParams{1.0, 1.0});
  const auto s = scaled_law(law, 0.0, 0.5);
  EXPECT_NEAR(s.variance(), 2.0, 0.1);
  EXPECT_LT(ks_distance(s, LimitDensity::normal(2.0)), 0.05);
}

TEST(LawOfLargeNumbers, MassOutsideShrinkingWindow) {
  const auto law = gibbs_pmf(golden_identity(10000), ModelParams{1.0, 1.0});
  const auto s = scaled_law(law, 0.0, 0.0);
  EXPECT_LT(std::max(0.0, 1.0 - s.mass_in(-0.05, 0.05)), 1e-3);
}

TEST(LawOfLargeNumbers, TailMassDecaysExponentially) {
  std::vector<double> ns, logs;
  for (std::size_t n : {500u, 1000u, 1500u, 2000u, 2500u}) {
    const auto law = gibbs_pmf(golden_identity(n), ModelParams{1.0, 1.0});
    double tail = 0.0;
    for (std::size_t j = 0; j < law.size(); ++j)
      if (std::abs(static_cast<double>(law.k(j)) / n) >= 0.1) tail += law.mass(j);
    ns.push_back(static_cast<double>(n));
    logs.push_back(std::log(tail));
  }
  const double mx = std::accumulate(ns.begin(), ns.end(), 0.0) / ns.size();
  const double my = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxy += (ns[i] - mx) * (logs[i] - my);
    sxx += (ns[i] - mx) * (ns[i] - mx);
  }
  EXPECT_LT(sxy / sxx, 0.0);
  for (std::size_t i = 1; i < logs.size(); ++i) EXPECT_LT(logs[i], logs[i - 1]);
}

TEST(Supercritical, MassConcentratesNearBothPeaks) {
  const auto law = gibbs_pmf(make_field_sequence(std::vector<double>(4000, 0.5)), ModelParams{2.0, 1.0});
  const double m = oracle::tanh_fixed_point(2.0);
  const auto s = scaled_law(law, 0.0, 0.0);
  const double inside = s.mass_in(m - 0.1, m + 0.1) + s.mass_in(-m - 0.1, -m + 0.1);
  EXPECT_LT(std::max(0.0, 1.0 - inside), 0.05);
  EXPECT_NEAR(s.mass_in(0.0, 2.0), s.mass_in(-2.0, 0.0), 1e-12);
}

TEST(MixtureWeights, SingleMinimumHasUnitWeight) {
  const auto dist = FieldDistribution::uniform();
  const auto rep = find_minima(ModelParams{1.0, 1.0}, dist);
  for (std::size_t n : {10u, 1000u}) {
    const auto w = mixture_weights(rep, golden_identity(n)).normalized();
    ASSERT_EQ(w.size(), 1u);
    EXPECT_DOUBLE_EQ(w[0], 1.0);
  }
}

TEST(MixtureWeights, ConstantHalfIsSymmetric) {
  const ModelParams params{2.0, 1.0};
  const auto field = make_field_sequence(std::vector<double>(777, 0.5));
  const double m = oracle::tanh_fixed_point(2.0);
  const auto sym = mixture_weights_symmetric(m, params, field);
  EXPECT_EQ(sym.log_b[0], sym.log_b[1]);
  EXPECT_NEAR(sym.normalized()[0], 0.5, 1e-12);
  const auto rep = find_minima(params, FieldDistribution::constant(0.5));
  const auto w = mixture_weights(rep, field).normalized();
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NEAR(w[0], 0.5, 1e-9);
  EXPECT_NEAR(sym.predict([](double z) { return z; }), 0.0, 1e-15);
}

TEST(MixtureWeights, PredictionGapShrinksWithN) {
  const ModelParams params{2.0, 1.0};
  const auto rep = find_minima(params, FieldDistribution::uniform());
  ASSERT_EQ(rep.minima.size(), 2u);
  const double m = rep.minima[1].m;
  std::vector<double> gap1, gap2;
  for (std::size_t n : {1000u, 10000u}) {
    const auto field = golden_identity(n, 0.3);
    const auto law = scaled_law(gibbs_pmf(field, params), 0.0, 0.0);
    const auto mw = mixture_weights(rep, field);
    const double e1 = law.expect([](double z) { return z; });
    const double e2 = law.expect([](double z) { return z * z; });
    gap1.push_back(std::abs(e1 - mw.predict([](double z) { return z; })) / m);
    gap2.push_back(std::abs(e2 - mw.predict([](double z) { return z * z; })) / (m * m));
  }
  EXPECT_LT(gap1[1], gap1[0]);
  EXPECT_LT(gap2[1], gap2[0]);
}

TEST(MixtureWeights, RejectsUnclassifiedMinima) {
  FreeEnergyReport rep{ModelParams{1.0, 1.0}, FieldDistribution::uniform(), 0.0, {}, std::nullopt,
                       HStatus::Inconclusive, Phase::Unknown};
  EXPECT_THROW(mixture_weights(rep, golden_identity(10)), DomainError);
  rep.minima.push_back(MinimumRecord{0.0, 2, 0.0, 0.0, 0.0});
  EXPECT_THROW(mixture_weights(rep, golden_identity(10)), DomainError);
}

TEST(Metropolis, MatchesExactLawAtEightSites) {
  const auto field = golden_identity(8, 0.1);
  const ModelParams params{1.2, 1.0};
  const auto mc = metropolis_sample(field, params, 1000000, 7);
  EXPECT_LT(total_variation(mc, gibbs_pmf(field, params)), 0.01);
  EXPECT_EQ(mc.recorded, 900000u);
}

TEST(Metropolis, DeterministicForFixedSeed) {
  const auto field = golden_identity(12);
  const ModelParams params{1.0, 1.0};
  const auto a = metropolis_sample(field, params, 20000, 99);
  const auto b = metropolis_sample(field, params, 20000, 99);
  const auto c = metropolis_sample(field, params, 20000, 100);
  EXPECT_EQ(a.histogram, b.histogram);
  EXPECT_EQ(a.acceptance_rate, b.acceptance_rate);
  EXPECT_NE(a.histogram, c.histogram);
}

TEST(Metropolis, InfiniteTemperatureRatioIsSiteOdds) {
  const double p = 0.3, lp = std::log(p), lq = std::log1p(-p);
  for (long long M : {-4LL, 0LL, 6LL}) {
    EXPECT_DOUBLE_EQ(metropolis_log_ratio(-1, M, 10, 0.0, lp, lq), std::log(p / (1 - p)));
    EXPECT_DOUBLE_EQ(metropolis_log_ratio(1, M, 10, 0.0, lp, lq), std::log((1 - p) / p));
  }
  // with coupling the tilt enters through the change of M^2
  EXPECT_NEAR(metropolis_log_ratio(-1, 2, 10, 1.0, lp, lq), (16.0 - 4.0) / 20.0 + lp - lq, 1e-15);
}
