#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bgq/queue.hpp"
#include "bgq/stats.hpp"
#include "oracles.hpp"

namespace {

using namespace bgq;

const QueueParams kRef{1.0 / 3.0, 2.0 / 3.0, 0.5, 0.5};

TEST(Step, Examples) {
  auto o = step<Count>(3, 2, 4);
  EXPECT_EQ(o.next_queue, 1);
  EXPECT_EQ(o.departures, 4);
  EXPECT_EQ(o.unused, 0);
  o = step<Count>(0, 0, 5);
  EXPECT_EQ(o.next_queue, 0);
  EXPECT_EQ(o.departures, 0);
  EXPECT_EQ(o.unused, 5);
  o = step<Count>(1, 0, 3);
  EXPECT_EQ(o.next_queue, 0);
  EXPECT_EQ(o.departures, 1);
  EXPECT_EQ(o.unused, 2);
  EXPECT_THROW(step<Count>(-1, 0, 0), std::domain_error);
  EXPECT_THROW(step<double>(0.0, -0.5, 1.0), std::domain_error);
}

TEST(Simulate, UnitInputsKeepQueueEmpty) {
  RandomStream s(1);
  const auto t = simulate(Deterministic{1}, Deterministic{1}, 1000, 0, s);
  for (const auto& slot : t.slots) {
    EXPECT_EQ(slot.queue_before, 0);
    EXPECT_EQ(slot.departures, 1);
  }
  EXPECT_FALSE(t.slots.back().unused_plus_next.has_value());
}

TEST(Simulate, EverySlotSatisfiesIdentities) {
  RandomStream s(2);
  const auto t = simulate(kRef.arrival(), kRef.service(), 200000, 0, s);
  EXPECT_FALSE(first_inconsistent_slot(t).has_value());
  for (std::size_t n = 0; n + 1 < t.size(); ++n) {
    const auto& a = t[n];
    ASSERT_EQ(a.queue_after, a.queue_before + a.arrivals);
    ASSERT_EQ(a.departures, std::min(a.queue_after, a.service));
    ASSERT_EQ(a.departures + a.unused, a.service);
    ASSERT_EQ(t[n + 1].queue_before - a.queue_before, a.arrivals - a.departures);
    ASSERT_EQ(a.unused_plus_arrival, a.unused + a.arrivals);
    ASSERT_EQ(*a.unused_plus_next, a.unused + t[n + 1].arrivals);
  }
}

TEST(Simulate, TamperedTraceIsDetected) {
  RandomStream s(3);
  auto t = simulate(kRef.arrival(), kRef.service(), 100, 0, s);
  t.slots[40].queue_before += 1;
  ASSERT_TRUE(first_inconsistent_slot(t).has_value());
  EXPECT_LE(*first_inconsistent_slot(t), 40u);
}

TEST(Simulate, RealValuedTraceUsesSameRecurrence) {
  RandomStream s(4);
  const auto t = simulate_real(BerExp{0.3, 1.0}, BerExp{0.6, 1.0}, 10000, 0.0, s);
  EXPECT_FALSE(first_inconsistent_slot(t, 1e-12).has_value());
  EXPECT_THROW(simulate(BerExp{0.3, 1.0}, Bernoulli{0.5}, 10, 0, s), std::domain_error);
}

TEST(Simulate, ContinuousConditionTraceHasExpectedMeanWork) {
  // Ber(p)Exp work balanced by the condition alpha p/(1-p) = beta q/(1-q)
  // gives a queue whose departures again carry mean p/alpha.
  RandomStream s(5);
  const auto t = simulate_real(BerExp{1.0 / 3.0, 1.0}, BerExp{0.5, 0.5}, 400000, 0.0, s);
  double dep = 0.0;
  for (std::size_t n = 10000; n < t.size(); ++n) dep += t[n].departures;
  EXPECT_NEAR(dep / (t.size() - 10000), 1.0 / 3.0, 0.01);
}

TEST(PathMax, Examples) {
  const Count a1[] = {0, 0, 0}, s1[] = {1, 1, 1};
  EXPECT_EQ(path_max_queue(a1, s1), 0);
  const Count a2[] = {3, 0}, s2[] = {1, 1};
  EXPECT_EQ(path_max_queue(a2, s2), 1);
  const Count a3[] = {1};
  EXPECT_THROW(path_max_queue(a3, s2), std::invalid_argument);
}

TEST(PathMax, EqualsRecurrenceOnRandomInstances) {
  RandomStream s(6);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Count> a(20), d(20);
    for (int n = 0; n < 20; ++n) {
      a[n] = sample_count(kRef.arrival(), s);
      d[n] = sample_count(kRef.service(), s);
    }
    Count x = 0;
    for (int n = 0; n < 20; ++n) x = step(x, a[n], d[n]).next_queue;
    ASSERT_EQ(path_max_queue(a, d), x);
  }
}

TEST(Condition, Residuals) {
  EXPECT_NEAR(check_condition(kRef), 0.0, 1e-15);
  for (double a : {0.2, 0.5, 0.9}) {
    for (double b : {0.1, 0.4, 0.8}) EXPECT_NEAR(check_condition({1 - a, a, 1 - b, b}), 0.0, 1e-12);
  }
  EXPECT_GT(std::abs(check_condition({0.2, 0.9, 0.5, 0.5})), 1e-3);
  EXPECT_TRUE(condition_holds(kRef));
  EXPECT_FALSE(condition_holds({0.2, 0.9, 0.5, 0.5}));
}

TEST(Condition, ContinuousResiduals) {
  EXPECT_NEAR(check_continuous_condition(1.0 / 3.0, 1.0, 0.5, 0.5), 0.0, 1e-15);
  EXPECT_EQ(check_continuous_condition(0.3, 2.0, 0.3, 2.0), 0.0);
  EXPECT_GT(std::abs(check_continuous_condition(0.2, 1.0, 0.5, 1.0)), 0.1);
}

TEST(SolveArrival, Examples) {
  const auto a = solve_arrival(0.5, 0.5, 0.5);
  EXPECT_NEAR(a.p, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(a.alpha, 2.0 / 3.0, 1e-14);
  const auto b = solve_arrival(0.6, 0.3, 1.0);
  EXPECT_NEAR(b.p, 3.0 / (3.0 + std::sqrt(14.0)), 1e-14);
  EXPECT_NEAR(b.alpha, 3.0 / (3.0 + std::sqrt(14.0)), 1e-14);
  EXPECT_THROW(solve_arrival(0.5, 0.5, 1.0), std::domain_error);
  EXPECT_THROW(solve_arrival(0.5, 0.5, 0.0), std::domain_error);
}

TEST(SolveArrival, SatisfiesBothIntensityForms) {
  for (double q : {0.2, 0.5, 0.9}) {
    for (double b : {0.1, 0.5, 0.8}) {
      const double mu = q / b;
      for (double frac : {0.01, 0.3, 0.7, 0.99}) {
        const double lambda = frac * mu;
        const auto s = solve_arrival(q, b, lambda);
        EXPECT_NEAR(s.p / s.alpha, lambda, 1e-10 * lambda);
        EXPECT_TRUE(condition_holds({s.p, s.alpha, q, b}));
        const double form1 = s.p * (s.p * (1 - q) * (1 - b) / ((1 - s.p) * q * b) + 1);
        const double form2 =
            (1 - s.alpha) * b * q / (s.alpha * s.alpha * (1 - b - q) + s.alpha * b * q);
        EXPECT_NEAR(form1, lambda, 1e-10 * std::max(1.0, lambda));
        EXPECT_NEAR(form2, lambda, 1e-10 * std::max(1.0, lambda));
        EXPECT_GT(s.alpha, b);
        EXPECT_LT(s.p, q);
      }
    }
  }
}

TEST(StationaryLaw, ReferenceValues) {
  const auto law = stationary_law(kRef);
  EXPECT_NEAR(law.c, 0.5, 1e-15);
  EXPECT_NEAR(law.gamma, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(law.y_bernoulli, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(law.mean_x(), 1.5, 1e-14);
  EXPECT_NEAR(law.mean_y(), 2.0, 1e-14);
  EXPECT_THROW(stationary_law({0.2, 0.9, 0.5, 0.5}), std::domain_error);
}

TEST(StationaryLaw, AgreesWithEliminationOracle) {
  for (const auto& qp : {kRef, QueueParams{0.3, 0.7, 0.4, 0.6}}) {
    if (!condition_holds(qp)) continue;
    const auto P = oracle::queue_chain([&](int a) { return pmf(qp.arrival(), a); },
                                       [&](int s) { return pmf(qp.service(), s); }, 150, 150);
    const auto pi = oracle::stationary_by_elimination(P);
    const auto law = stationary_law(qp);
    for (int k = 0; k <= 60; ++k) EXPECT_NEAR(pi[k], law.pmf_x(k), 1e-12) << k;
  }
  // Geometric pair p = 1 - alpha, q = 1 - beta.
  const QueueParams geo{0.4, 0.6, 0.7, 0.3};
  const auto P = oracle::queue_chain([&](int a) { return pmf(geo.arrival(), a); },
                                     [&](int s) { return pmf(geo.service(), s); }, 150, 150);
  const auto pi = oracle::stationary_by_elimination(P);
  const auto law = stationary_law(geo);
  EXPECT_NEAR(law.c, (0.3 / 0.7) * (0.4 / 0.6), 1e-15);
  EXPECT_NEAR(law.gamma, (0.6 - 0.3) / 0.7, 1e-15);
  for (int k = 0; k <= 40; ++k) EXPECT_NEAR(pi[k], law.pmf_x(k), 1e-12);
}

TEST(MarkovOracle, BernoulliQueueBusyProbability) {
  // Birth-death chain with up rate p(1-q), down rate q(1-p).
  const double p = 0.3, q = 0.6;
  const auto oracle = markov_oracle(Bernoulli{p}, Bernoulli{q}, 200);
  EXPECT_NEAR(1.0 - oracle.pi[0], p * (1 - q) / (q * (1 - p)), 1e-10);
}

TEST(DetailedBalance, HoldsOnConditionCurve) {
  for (double lambda : {0.1, 0.5, 0.9}) {
    for (double b : {0.3, 0.5}) {
      const auto s = solve_arrival(0.5, b, lambda * 0.5 / b);
      EXPECT_LE(verify_detailed_balance({s.p, s.alpha, 0.5, b}, 30), 1e-12);
    }
  }
  EXPECT_GT(verify_detailed_balance({0.2, 0.9, 0.5, 0.5}, 30), 1e-6);
}

TEST(DetailedBalance, GridOfConditionSatisfyingParameters) {
  for (double q = 0.1; q < 0.95; q += 0.2) {
    for (double b = 0.1; b < 0.95; b += 0.2) {
      for (double frac : {0.2, 0.6, 0.9}) {
        const auto s = solve_arrival(q, b, frac * q / b);
        const QueueParams qp{s.p, s.alpha, q, b};
        ASSERT_TRUE(condition_holds(qp));
        EXPECT_LE(verify_detailed_balance(qp, 30), 1e-12) << q << ' ' << b << ' ' << frac;
      }
    }
  }
}

double direct_loglik(const QueueParams& qp, const std::vector<Count>& a, const std::vector<Count>& d) {
  double ll = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ll += std::log(oracle::ber_geom_pmf(qp.p, qp.alpha, a[i]));
    if (i + 1 < a.size()) {
      ll += std::log(oracle::ber_geom_pmf(qp.q, qp.beta, d[i]));
    } else {
      ll += std::log(d[i] == 0 ? 1.0 : qp.q * std::pow(1 - qp.beta, double(d[i] - 1)));
    }
  }
  return ll;
}

TEST(Excursion, MatchesDirectProduct) {
  const QueueParams qp{0.25, 0.5, 0.6, 0.35};
  const std::vector<Count> a = {3, 1, 1, 1}, d = {1, 1, 2, 2};
  EXPECT_NEAR(excursion_loglik(qp, a, d), direct_loglik(qp, a, d), 1e-12);
  EXPECT_NEAR(excursion_loglik_product_form(qp, a, d) - excursion_loglik(qp, a, d),
              a.size() * std::log((1 - qp.alpha) * (1 - qp.beta)), 1e-12);
}

TEST(Excursion, ReversalInvariantExactlyOnCondition) {
  const std::vector<Count> a = {2, 0}, d = {1, 1}, ra = {1, 1}, rd = {0, 2};
  const auto s = solve_arrival(0.6, 0.3, 1.0);
  const QueueParams on{s.p, s.alpha, 0.6, 0.3};
  EXPECT_NEAR(excursion_loglik(on, a, d), excursion_loglik(on, ra, rd), 1e-12);
  const QueueParams off{0.2, 0.5, 0.5, 0.5};
  EXPECT_GT(std::abs(excursion_loglik(off, a, d) - excursion_loglik(off, ra, rd)), 1e-3);

  const std::vector<Count> one = {2};
  EXPECT_NEAR(excursion_loglik(on, one, one), excursion_loglik(on, one, one), 0.0);
}

TEST(Excursion, GeometricCaseClosedForm) {
  const double al = 0.55, be = 0.35;
  const QueueParams geo{1 - al, al, 1 - be, be};
  const std::vector<Count> a = {2, 1, 3}, d = {1, 1, 4};
  const double n = 3, sa = 6, sd = 6;
  const double expected =
      n * std::log(al) + sa * std::log(1 - al) + (n - 1) * std::log(be) + sd * std::log(1 - be);
  EXPECT_NEAR(excursion_loglik(geo, a, d), expected, 1e-12);
  std::vector<Count> ra(a.rbegin(), a.rend()), rd(d.rbegin(), d.rend());
  // Reversal maps arrivals to departures: (a, d) -> (reverse d, reverse a).
  EXPECT_NEAR(excursion_loglik(geo, rd, ra), expected, 1e-12);
}

TEST(Excursion, RejectsInvalidShapes) {
  const std::vector<Count> a = {1, 1}, d = {2, 0};
  EXPECT_THROW(excursion_loglik(kRef, a, d), std::invalid_argument);
  const std::vector<Count> a2 = {0, 2}, d2 = {1, 1};
  EXPECT_THROW(excursion_loglik(kRef, a2, d2), std::invalid_argument);
  const std::vector<Count> a3 = {2}, d3 = {1};
  EXPECT_THROW(excursion_loglik(kRef, a3, d3), std::invalid_argument);
}

TEST(MarkovOracle, ReferenceLawWithinTolerance) {
  const auto r = markov_oracle(kRef.arrival(), kRef.service(), 200);
  const auto law = stationary_law(kRef);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.pi.size(); ++k) worst = std::max(worst, std::abs(r.pi[k] - law.pmf_x(k)));
  EXPECT_LE(worst, 1e-10);
  EXPECT_LE(r.leaked_mass, 1e-12);
}

TEST(MarkovOracle, BernoulliQueueIsGeomZeroShaped) {
  const auto r = markov_oracle(Bernoulli{0.3}, Bernoulli{0.6}, 200);
  const double ratio = r.pi[2] / r.pi[1];
  for (int k = 1; k < 50; ++k) EXPECT_NEAR(r.pi[k + 1] / r.pi[k], ratio, 1e-9);
}

TEST(MarkovOracle, GeneralServiceGivesConstantRatio) {
  const std::vector<DistSpec> services = {Deterministic{1}, Bernoulli{0.6}, Categorical{{1. / 3, 1. / 3, 1. / 3}}};
  for (const auto& svc : services) {
    const auto r = markov_oracle(BerGeom{0.2, 0.5}, svc, 200);
    const double ratio = r.pi[2] / r.pi[1];
    for (int k = 1; k <= 50; ++k) EXPECT_NEAR(r.pi[k + 1] / r.pi[k], ratio, 1e-9) << kind_name(svc) << k;
  }
}

TEST(MarkovOracle, AgreesWithEliminationOffCondition) {
  const QueueParams qp{0.2, 0.9, 0.5, 0.5};
  const auto r = markov_oracle(qp.arrival(), qp.service(), 120);
  const auto P = oracle::queue_chain([&](int a) { return pmf(qp.arrival(), a); },
                                     [&](int s) { return pmf(qp.service(), s); }, 120, 150);
  const auto pi = oracle::stationary_by_elimination(P);
  for (int k = 0; k <= 40; ++k) EXPECT_NEAR(r.pi[k], pi[k], 1e-12);
}

TEST(MarkovOracle, SmallTruncationAsksForMore) {
  EXPECT_THROW(markov_oracle(BerGeom{0.4, 0.3}, BerGeom{0.5, 0.3}, 10), std::runtime_error);
}

TEST(Simulate, StationaryStatisticsOfReferenceQueue) {
  RandomStream s(8);
  const std::size_t burn = burn_in_slots(kRef.arrival_rate(), kRef.service_rate());
  EXPECT_EQ(burn, 10000u);
  const auto t = simulate(kRef.arrival(), kRef.service(), burn + 1000000, 0, s);
  std::vector<double> x;
  std::vector<std::int64_t> dep;
  for (std::size_t n = burn; n < t.size(); ++n) {
    x.push_back(double(t[n].queue_before));
    dep.push_back(t[n].departures);
  }
  const double m = mean_confidence(x).mean;
  EXPECT_NEAR(m, 1.5, 3 * batch_means_stderr(x));
  const auto r = chi_square_gof(EmpiricalPmf(20, dep), [](std::int64_t k) { return pmf(kRef.arrival(), k); });
  EXPECT_GT(r.p_value, 0.01);
}

TEST(TraceCsv, HeaderAndFirstRows) {
  const Count a[] = {2, 0, 1}, s[] = {1, 3, 0};
  const auto t = trace_from_inputs<Count>(a, s);
  std::ostringstream os;
  write_trace_csv(os, t);
  EXPECT_EQ(os.str(),
            "n,A,S,X,Y,D,U,I,T\n"
            "0,2,1,0,2,1,0,0,2\n"
            "1,0,3,1,1,1,2,3,2\n"
            "2,1,0,0,1,0,0,,1\n");
}

}  // namespace
