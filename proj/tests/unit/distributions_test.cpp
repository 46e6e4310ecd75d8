#include <gtest/gtest.h>

#include <cmath>

#include "bgq/distributions.hpp"
#include "bgq/stats.hpp"
#include "oracles.hpp"

namespace {

using namespace bgq;

TEST(Pmf, BerGeomValues) {
  const BerGeom d{1.0 / 3.0, 2.0 / 3.0};
  EXPECT_DOUBLE_EQ(pmf(d, 0), 2.0 / 3.0);
  EXPECT_NEAR(pmf(d, 2), 2.0 / 27.0, 1e-16);
  for (int k = 0; k < 40; ++k) EXPECT_NEAR(pmf(d, k), oracle::ber_geom_pmf(d.p, d.alpha, k), 1e-16);
}

TEST(Pmf, DiagonalBerGeomIsGeomZero) {
  for (int k = 0; k <= 50; ++k) EXPECT_NEAR(pmf(BerGeom{0.5, 0.5}, k), pmf(GeomZero{0.5}, k), 1e-16);
}

TEST(Pmf, NearlyDegenerateGeometricPartIsBernoulli) {
  const double a = 1.0 - 1e-9;
  for (int k = 0; k <= 5; ++k) EXPECT_NEAR(pmf(BerGeom{0.3, a}, k), pmf(Bernoulli{0.3}, k), 1e-9);
}

TEST(Pmf, SumsToOneWithAnalyticTail) {
  const std::vector<DistSpec> specs = {BerGeom{1.0 / 3.0, 2.0 / 3.0}, BerGeom{0.9, 0.05}, GeomPlus{0.25},
                                       GeomZero{0.1},                 Bernoulli{0.7},      Deterministic{4},
                                       Categorical{{0.25, 0.25, 0.5}}};
  for (const auto& spec : specs) {
    double total = 0.0;
    for (int k = 0; k <= 1000; ++k) total += pmf(spec, k);
    EXPECT_NEAR(total + prob_at_least(spec, 1001), 1.0, 1e-12) << kind_name(spec);
  }
}

TEST(Pmf, ConditionalOnPositiveIsGeomPlus) {
  const BerGeom d{0.35, 0.2};
  for (int k = 1; k <= 100; ++k) EXPECT_NEAR(pmf(d, k) / d.p, pmf(GeomPlus{0.2}, k), 1e-12);
}

TEST(Pmf, ContinuousLawsAreRejected) {
  EXPECT_THROW(pmf(Exponential{1.0}, 1), std::domain_error);
  EXPECT_THROW(pmf(BerExp{0.5, 1.0}, 0), std::domain_error);
  EXPECT_THROW(pgf(Exponential{1.0}, 0.5), std::domain_error);
  try {
    pmf(Exponential{2.0}, 0);
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "discrete-only operation");
  }
}

TEST(Validate, RejectsOutOfRangeParameters) {
  EXPECT_THROW(validate(BerGeom{0.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(validate(BerGeom{0.5, 1.5}), std::invalid_argument);
  EXPECT_THROW(validate(Exponential{0.0}), std::invalid_argument);
  EXPECT_THROW(validate(Deterministic{-1.0}), std::invalid_argument);
  EXPECT_THROW(validate(Categorical{{0.5, 0.6}}), std::invalid_argument);
  EXPECT_NO_THROW(validate(BerGeom{0.3, 0.7}));
}

TEST(Mean, KnownValues) {
  EXPECT_DOUBLE_EQ(mean(BerGeom{1.0 / 3.0, 2.0 / 3.0}), 0.5);
  EXPECT_DOUBLE_EQ(mean(Deterministic{7}), 7.0);
  double truncated = 0.0;
  for (int k = 1; k <= 10000; ++k) truncated += k * pmf(GeomPlus{0.25}, k);
  EXPECT_NEAR(mean(GeomPlus{0.25}), truncated, 1e-10);
  EXPECT_DOUBLE_EQ(mean(GeomPlus{0.25}), 4.0);
}

TEST(Mean, MatchesPgfSlopeAtOne) {
  const std::vector<DistSpec> specs = {BerGeom{0.2, 0.4}, GeomZero{0.3}, Bernoulli{0.6},
                                       Categorical{{0.1, 0.2, 0.7}}};
  const double h = 1e-6;
  for (const auto& spec : specs) {
    // Second-order one-sided difference; pgf is only defined on [0, 1].
    const double slope = (3 * pgf(spec, 1.0) - 4 * pgf(spec, 1 - h) + pgf(spec, 1 - 2 * h)) / (2 * h);
    EXPECT_NEAR(slope, mean(spec), 1e-5) << kind_name(spec);
  }
}

TEST(Pgf, AgreesWithSeries) {
  const BerGeom d{0.5, 0.5};
  EXPECT_DOUBLE_EQ(pgf(d, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(pgf(d, 0.0), 0.5);
  double series = 0.0;
  for (int k = 0; k <= 200; ++k) series += pmf(d, k) * std::pow(0.5, k);
  EXPECT_NEAR(pgf(d, 0.5), series, 1e-12);
  EXPECT_NEAR(pgf(d, 0.5), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(pgf(d, 1.5), std::invalid_argument);
}

TEST(Variance, MatchesSeries) {
  const BerGeom d{0.3, 0.4};
  double m1 = 0.0, m2 = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    m1 += k * pmf(d, k);
    m2 += double(k) * k * pmf(d, k);
  }
  EXPECT_NEAR(variance(d), m2 - m1 * m1, 1e-10);
}

TEST(Tail, BerExpSurvival) {
  const BerExp d{0.4, 1.5};
  for (double x : {0.1, 0.5, 2.0}) EXPECT_NEAR(tail(d, x), 0.4 * std::exp(-1.5 * x), 1e-15);
  EXPECT_DOUBLE_EQ(tail(d, 0.0), 1.0);
}

TEST(Sample, DeterministicIsConstant) {
  RandomStream s(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(Deterministic{3}, s), 3.0);
}

TEST(Sample, RepeatableForFixedSeed) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(BerGeom{1.0 / 3.0, 2.0 / 3.0}, a), sample(BerGeom{1.0 / 3.0, 2.0 / 3.0}, b));
}

TEST(Sample, BerGeomMeanWithinThreeSigma) {
  const BerGeom d{1.0 / 3.0, 2.0 / 3.0};
  RandomStream s(11);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample(d, s);
  EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(variance(d) / n));
}

TEST(Sample, BerGeomFitsPmf) {
  const BerGeom d{1.0 / 3.0, 2.0 / 3.0};
  RandomStream s(12);
  EmpiricalPmf emp(20);
  for (int i = 0; i < 1000000; ++i) emp.add(sample_count(d, s));
  const auto r = chi_square_gof(emp, [&](std::int64_t k) { return pmf(d, k); });
  EXPECT_GT(r.p_value, 0.01) << r.statistic;
}

TEST(SampleCompound, MatchesBerGeomAtThreePoints) {
  const std::pair<double, double> points[] = {{0.2, 0.4}, {1.0 / 3.0, 2.0 / 3.0}, {0.6, 0.1}};
  std::uint64_t seed = 100;
  for (const auto& [p, a] : points) {
    RandomStream s(seed++);
    EmpiricalPmf emp(30);
    for (int i = 0; i < 1000000; ++i) emp.add(sample_compound(p, a, s));
    const auto r = chi_square_gof(emp, [&](std::int64_t k) { return pmf(BerGeom{p, a}, k); });
    EXPECT_GT(r.p_value, 0.01) << "p=" << p << " a=" << a;
  }
}

TEST(SampleCompound, BoundaryCaseCountsOnes) {
  // a = 1 - p makes every summand exactly 1, so the draw is the count V.
  RandomStream s(5);
  EmpiricalPmf emp(15);
  for (int i = 0; i < 200000; ++i) emp.add(sample_compound(1.0 / 3.0, 2.0 / 3.0, s));
  const auto r = chi_square_gof(emp, [](std::int64_t k) { return (2.0 / 3.0) * std::pow(1.0 / 3.0, double(k)); });
  EXPECT_GT(r.p_value, 0.01);
}

TEST(SampleCompound, RejectsUnavailableRepresentation) {
  RandomStream s(1);
  EXPECT_THROW(sample_compound(0.6, 0.5, s), std::domain_error);
}

TEST(Sample, BerExpTailMatchesKs) {
  const BerExp d{0.4, 1.5};
  RandomStream s(21);
  std::vector<double> positive;
  int zeros = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = sample(d, s);
    if (x > 0.0) {
      positive.push_back(x);
    } else {
      ++zeros;
    }
  }
  EXPECT_NEAR(double(zeros) / n, 0.6, 4.0 * std::sqrt(0.24 / n));
  const auto r = ks_test(positive, [](double x) { return 1.0 - std::exp(-1.5 * x); });
  EXPECT_GT(r.p_value, 0.01);
}

TEST(Json, RoundTripsEveryKind) {
  const std::vector<DistSpec> specs = {Bernoulli{0.3},    GeomPlus{0.4},     GeomZero{0.5},
                                       BerGeom{0.2, 0.6}, Exponential{2.0},  BerExp{0.3, 1.5},
                                       Deterministic{2},  Categorical{{0.5, 0.5}}};
  for (const auto& spec : specs) {
    const auto back = dist_from_json(to_json(spec));
    EXPECT_EQ(to_json(back), to_json(spec));
  }
  EXPECT_EQ(to_json(BerGeom{0.333, 0.667}),
            (nlohmann::json{{"kind", "ber_geom"}, {"p", 0.333}, {"alpha", 0.667}}));
  EXPECT_THROW(dist_from_json({{"kind", "poisson"}}), std::invalid_argument);
  EXPECT_THROW(dist_from_json({{"kind", "ber_geom"}, {"p", 0.2}}), std::invalid_argument);
}

TEST(SupportBound, CoversRequestedMass) {
  const BerGeom d{0.5, 0.3};
  const auto n = support_bound(d, 1e-12);
  EXPECT_LT(prob_at_least(d, n + 1), 1e-12);
  EXPECT_GE(prob_at_least(d, n), 1e-12);
}

}  // namespace
