#include "bgq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

#include "bgq/distributions.hpp"
#include "bgq/percolation.hpp"
#include "bgq/queue.hpp"
#include "bgq/random.hpp"
#include "bgq/tandem.hpp"
#include "bgq/time_constants.hpp"

namespace bgq {
namespace {

constexpr double kLevel = 0.01;

class SuiteBuilder {
 public:
  explicit SuiteBuilder(std::string name) { report_.suite = std::move(name); }

  void check(std::string name, bool ok, nlohmann::json detail = nlohmann::json::object()) {
    report_.checks.push_back({std::move(name), ok, std::move(detail)});
  }

  // Records a tolerance check |value - target| <= tol.
  void close(std::string name, double value, double target, double tol) {
    const double err = std::abs(value - target);
    check(std::move(name), err <= tol,
          {{"value", value}, {"target", target}, {"error", err}, {"tolerance", tol}});
  }

  void test(TestResult r) { report_.tests.push_back(std::move(r)); }

  // Guards a block so an exception becomes a failed check instead of aborting the run.
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(name, false, {{"error", e.what()}});
    }
  }

  SuiteReport finish() {
    const double level = bonferroni(kLevel, report_.tests.size());
    for (auto& t : report_.tests) {
      t.level = level;
      t.passed = t.p_value >= level;
    }
    return std::move(report_);
  }

 private:
  SuiteReport report_;
};

std::size_t uniform_index(RandomStream& stream, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(stream.uniform() * static_cast<double>(n)));
}

std::vector<std::int64_t> draws(const DistSpec& spec, std::size_t n, RandomStream& stream) {
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = sample_count(spec, stream);
  return out;
}

std::function<double(std::int64_t)> pmf_of(DistSpec spec) {
  return [spec = std::move(spec)](std::int64_t k) { return pmf(spec, k); };
}

// Fixed-point parameter sets on the condition curve, all stable.
std::vector<QueueParams> condition_sets() {
  const double table[][3] = {{0.5, 0.5, 0.5}, {0.6, 0.3, 1.0}, {0.8, 0.2, 2.0},
                             {0.3, 0.7, 0.2}, {0.9, 0.5, 1.2}};
  std::vector<QueueParams> out;
  for (const auto& row : table) {
    const auto a = solve_arrival(row[0], row[1], row[2]);
    out.push_back({a.p, a.alpha, row[0], row[1]});
  }
  return out;
}

// ---------------------------------------------------------------- distributions

SuiteReport distributions_suite(RandomStream stream) {
  SuiteBuilder s("distributions");

  const std::vector<DistSpec> specs = {BerGeom{1.0 / 3.0, 2.0 / 3.0}, BerGeom{0.2, 0.4},
                                       GeomPlus{0.25},  GeomZero{0.5},
                                       Bernoulli{0.3},  Categorical{{0.2, 0.5, 0.3}}};
  for (const auto& spec : specs) {
    double total = 0.0;
    for (std::int64_t k = 0; k <= 1000; ++k) total += pmf(spec, k);
    total += prob_at_least(spec, 1001);
    s.close("pmf_normalization/" + kind_name(spec), total, 1.0, 1e-12);

    const double h = 1e-6;
    const double slope = (3.0 * pgf(spec, 1.0) - 4.0 * pgf(spec, 1.0 - h) + pgf(spec, 1.0 - 2.0 * h)) /
                         (2.0 * h);
    s.close("mean_vs_pgf_slope/" + kind_name(spec), slope, mean(spec), 1e-5);
  }

  s.close("ber_geom_pmf_at_2", pmf(BerGeom{1.0 / 3.0, 2.0 / 3.0}, 2), 2.0 / 27.0, 1e-15);
  s.close("ber_geom_mean", mean(BerGeom{1.0 / 3.0, 2.0 / 3.0}), 0.5, 1e-15);

  {
    double worst = 0.0;
    for (std::int64_t k = 0; k <= 50; ++k) {
      worst = std::max(worst, std::abs(pmf(BerGeom{0.5, 0.5}, k) - pmf(GeomZero{0.5}, k)));
    }
    s.check("ber_geom_equals_geom_zero_on_diagonal", worst <= 1e-15, {{"max_difference", worst}});
  }
  {
    const BerGeom d{0.3, 0.45};
    double worst = 0.0;
    for (std::int64_t k = 1; k <= 100; ++k) {
      const double cond = pmf(d, k) / d.p;
      worst = std::max(worst, std::abs(cond - pmf(GeomPlus{d.alpha}, k)));
    }
    s.check("conditional_law_given_positive", worst <= 1e-12, {{"max_difference", worst}});
  }

  {
    const BerGeom d{1.0 / 3.0, 2.0 / 3.0};
    auto sub = stream.substream(0);
    const auto xs = draws(d, 1000000, sub);
    std::vector<double> as_real(xs.begin(), xs.end());
    const auto ci = mean_confidence(as_real);
    const double sigma = std::sqrt(variance(d) / static_cast<double>(xs.size()));
    s.check("sampler_mean_within_3_sigma", std::abs(ci.mean - mean(d)) <= 3.0 * sigma,
            {{"mean", ci.mean}, {"target", mean(d)}, {"sigma", sigma}});
    s.test(chi_square_gof(EmpiricalPmf(20, xs), pmf_of(d), kLevel, "sampler_chi2/ber_geom"));
  }

  const std::pair<double, double> compound_points[] = {{0.2, 0.4}, {1.0 / 3.0, 2.0 / 3.0}, {0.5, 0.3}};
  std::uint64_t idx = 1;
  for (const auto& [p, a] : compound_points) {
    auto sub = stream.substream(idx++);
    EmpiricalPmf emp(25);
    for (int i = 0; i < 1000000; ++i) emp.add(sample_compound(p, a, sub));
    s.test(chi_square_gof(emp, pmf_of(BerGeom{p, a}), kLevel,
                          "compound_chi2/p=" + std::to_string(p) + ",a=" + std::to_string(a)));
  }

  {
    const BerExp d{0.4, 1.5};
    auto sub = stream.substream(10);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample(d, sub);
    std::vector<double> positive;
    for (double x : xs) {
      if (x > 0.0) positive.push_back(x);
    }
    // Atom at zero checked by count, positive part by KS against p e^{-a x} / p.
    const double zero_share = 1.0 - static_cast<double>(positive.size()) / static_cast<double>(xs.size());
    const double sd = std::sqrt(d.p * (1.0 - d.p) / static_cast<double>(xs.size()));
    s.check("ber_exp_atom_within_4_sigma", std::abs(zero_share - (1.0 - d.p)) <= 4.0 * sd,
            {{"zero_share", zero_share}, {"target", 1.0 - d.p}});
    s.test(ks_test(positive, [&](double x) { return 1.0 - tail(d, x) / d.p; }, kLevel,
                   "ber_exp_tail_ks"));
  }

  {
    RandomStream a(42), b(42);
    bool same = true;
    for (int i = 0; i < 100; ++i) same = same && sample(BerGeom{0.3, 0.5}, a) == sample(BerGeom{0.3, 0.5}, b);
    s.check("seeded_draws_repeat", same);
  }
  s.guarded("compound_rejects_a_above_one_minus_p", [&] {
    RandomStream r(1);
    bool threw = false;
    try {
      sample_compound(0.6, 0.5, r);
    } catch (const std::domain_error&) {
      threw = true;
    }
    s.check("compound_rejects_a_above_one_minus_p", threw);
  });
  return s.finish();
}

// ---------------------------------------------------------------- queue

std::int64_t capped(std::int64_t v, std::int64_t cap) { return std::min(v, cap); }

SuiteReport queue_suite(RandomStream stream) {
  SuiteBuilder s("queue");

  {
    const auto o1 = step<Count>(3, 2, 4);
    const auto o2 = step<Count>(0, 0, 5);
    const auto o3 = step<Count>(1, 0, 3);
    s.check("step_examples", o1.next_queue == 1 && o1.departures == 4 && o1.unused == 0 &&
                                 o2.next_queue == 0 && o2.departures == 0 && o2.unused == 5 &&
                                 o3.next_queue == 0 && o3.departures == 1 && o3.unused == 2);
  }

  {
    auto sub = stream.substream(0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      std::vector<Count> a(20), d(20);
      for (int n = 0; n < 20; ++n) {
        a[n] = static_cast<Count>(uniform_index(sub, 5));
        d[n] = static_cast<Count>(uniform_index(sub, 5));
      }
      const auto t = trace_from_inputs<Count>(a, d);
      if (path_max_queue(a, d) != t.final_queue()) ++mismatches;
    }
    s.check("path_max_equals_recurrence", mismatches == 0, {{"instances", 1000}, {"mismatches", mismatches}});
  }

  {
    const auto a = solve_arrival(0.5, 0.5, 0.5);
    s.check("solve_arrival_example",
            std::abs(a.p - 1.0 / 3.0) <= 1e-12 && std::abs(a.alpha - 2.0 / 3.0) <= 1e-12,
            {{"p", a.p}, {"alpha", a.alpha}});
    const auto b = solve_arrival(0.6, 0.3, 1.0);
    const double target = 3.0 / (3.0 + std::sqrt(14.0));
    s.check("solve_arrival_equal_parameters",
            std::abs(b.p - target) <= 1e-12 && std::abs(b.alpha - target) <= 1e-12,
            {{"p", b.p}, {"alpha", b.alpha}, {"target", target}});
  }

  const auto sets = condition_sets();
  {
    double worst = 0.0;
    for (const auto& p : sets) worst = std::max(worst, verify_detailed_balance(p, 30));
    s.check("detailed_balance_on_condition", worst <= 1e-12, {{"max_residual", worst}});
    const double off = verify_detailed_balance({0.2, 0.9, 0.5, 0.5}, 30);
    s.check("detailed_balance_fails_off_condition", off > 1e-6, {{"residual", off}});
  }

  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto name = "oracle_matches_stationary_law/" + std::to_string(i);
    s.guarded(name, [&] {
      const auto law = stationary_law(sets[i]);
      const auto oracle = markov_oracle(sets[i].arrival(), sets[i].service(), 200);
      double worst = 0.0;
      for (std::size_t k = 0; k < oracle.pi.size(); ++k) {
        worst = std::max(worst, std::abs(oracle.pi[k] - law.pmf_x(static_cast<Count>(k))));
      }
      s.check(name, worst <= 1e-10, {{"sup_norm", worst}, {"leaked_mass", oracle.leaked_mass}});
    });
  }

  {
    const QueueParams p{0.2, 0.5, 0.5, 0.5};
    const Count a[] = {2, 0}, d[] = {1, 1}, ra[] = {1, 1}, rd[] = {0, 2};
    const double off = excursion_loglik(p, a, d) - excursion_loglik(p, ra, rd);
    const QueueParams on = sets[1];
    const double diff = excursion_loglik(on, a, d) - excursion_loglik(on, ra, rd);
    s.check("excursion_reversal_invariant_on_condition", std::abs(diff) <= 1e-12, {{"difference", diff}});
    s.check("excursion_reversal_breaks_off_condition", std::abs(off) > 1e-6, {{"difference", off}});
  }

  // Stationary statistics of the reference queue.
  const QueueParams ref{1.0 / 3.0, 2.0 / 3.0, 0.5, 0.5};
  const auto law = stationary_law(ref);
  const std::size_t burn = burn_in_slots(ref.arrival_rate(), ref.service_rate());
  const std::size_t n = 1000000;
  std::size_t stride = 1;
  {
    auto sub = stream.substream(1);
    const auto trace = simulate(ref.arrival(), ref.service(), burn + n, 0, sub);
    s.check("trace_identities", !first_inconsistent_slot(trace).has_value());

    std::vector<double> x(n);
    std::vector<std::int64_t> xi(n), dep(n);
    for (std::size_t k = 0; k < n; ++k) {
      xi[k] = trace[burn + k].queue_before;
      x[k] = static_cast<double>(xi[k]);
      dep[k] = trace[burn + k].departures;
    }
    // Queue lengths are a Markov chain; the Pearson tests below use every
    // stride-th slot so the tested draws are effectively independent.
    stride = decorrelation_stride(x);
    s.check("decorrelation_stride", stride < n / 1000, {{"stride", stride}});
    EmpiricalPmf x_counts(30);
    for (std::size_t k = 0; k < n; k += stride) x_counts.add(xi[k]);
    s.test(chi_square_gof(x_counts, [&](std::int64_t k) { return law.pmf_x(k); }, kLevel,
                          "queue_length_chi2"));
    const double m = mean_confidence(x).mean;
    const double se = batch_means_stderr(x);
    s.check("mean_queue_within_3_sigma", std::abs(m - law.mean_x()) <= 3.0 * se,
            {{"mean", m}, {"target", law.mean_x()}, {"sigma", se}});

    s.test(chi_square_gof(EmpiricalPmf(20, dep), pmf_of(ref.arrival()), kLevel, "departure_chi2"));
    for (std::size_t lag : {1u, 2u}) {
      const auto ac = lag_autocorr(std::span<const std::int64_t>(dep), lag);
      s.check("departure_autocorr_lag" + std::to_string(lag), std::abs(ac.rho) < 3.0 * ac.standard_error,
              {{"rho", ac.rho}, {"bound", 3.0 * ac.standard_error}});
    }
    const auto xac = lag_autocorr(std::span<const double>(x), 1);
    s.check("queue_length_autocorr_positive", xac.rho > 3.0 * xac.standard_error, {{"rho", xac.rho}});

    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::size_t k = 2; k < n; k += stride) {
      pairs.emplace_back(xi[k], capped(dep[k - 1], 5) * 6 + capped(dep[k - 2], 5));
    }
    s.test(independence_chi2(pairs, 8, 35, kLevel, "queue_vs_past_departures"));
  }

  {
    // Forward windows from one trace, reversed windows from an independent one.
    auto fwd_stream = stream.substream(2);
    auto rev_stream = stream.substream(3);
    const auto fwd = simulate(ref.arrival(), ref.service(), burn + n + 1, 0, fwd_stream);
    const auto rev = simulate(ref.arrival(), ref.service(), burn + n + 1, 0, rev_stream);
    auto code = [](Count a, Count b, Count c, Count d) {
      return ((capped(a, 10) * 11 + capped(b, 10)) * 11 + capped(c, 10)) * 11 + capped(d, 10);
    };
    std::vector<std::int64_t> first, second;
    for (std::size_t k = burn; k < burn + n; k += stride) {
      first.push_back(code(fwd[k].queue_before, fwd[k].queue_after, fwd[k + 1].queue_before,
                           fwd[k + 1].queue_after));
      second.push_back(code(rev[k + 1].queue_before, rev[k].queue_after, rev[k].queue_before,
                            rev[k - 1].queue_after));
    }
    s.test(homogeneity_chi2(first, second, kLevel, "reversibility_windows"));
  }

  {
    auto sub = stream.substream(4);
    const DistSpec arr = GeomPlus{0.6}, svc = GeomPlus{0.4};
    const std::size_t gburn = burn_in_slots(mean(arr), mean(svc));
    const auto t = simulate(arr, svc, gburn + n, 0, sub);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::size_t k = gburn; k + 1 < t.size(); ++k) {
      pairs.emplace_back(t[k].departures, *t[k].unused_plus_next);
    }
    s.test(chi_square_joint_gof(pairs, pmf_of(arr), pmf_of(svc), 10, 12, kLevel,
                                "joint_burke_geom_plus"));
  }
  {
    auto sub = stream.substream(5);
    const DistSpec arr = Bernoulli{0.3}, svc = Bernoulli{0.6};
    const std::size_t bburn = burn_in_slots(mean(arr), mean(svc));
    const auto t = simulate(arr, svc, bburn + n, 0, sub);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::size_t k = bburn; k < t.size(); ++k) {
      pairs.emplace_back(t[k].departures, t[k].unused_plus_arrival);
    }
    s.test(chi_square_joint_gof(pairs, pmf_of(arr), pmf_of(svc), 2, 2, kLevel, "joint_burke_bernoulli"));
  }

  {
    const DistSpec arrival = BerGeom{0.2, 0.5};
    const std::vector<std::pair<std::string, DistSpec>> services = {
        {"deterministic", Deterministic{1.0}},
        {"bernoulli", Bernoulli{0.6}},
        {"uniform3", Categorical{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}}};
    for (const auto& [label, svc] : services) {
      const auto name = "general_service_ratio/" + label;
      s.guarded(name, [&] {
        const auto oracle = markov_oracle(arrival, svc, 200);
        const double r0 = oracle.pi[2] / oracle.pi[1];
        double worst = 0.0;
        for (std::size_t k = 1; k <= 50; ++k) {
          worst = std::max(worst, std::abs(oracle.pi[k + 1] / oracle.pi[k] - r0));
        }
        s.check(name, worst <= 1e-9, {{"ratio", r0}, {"max_deviation", worst}});
      });
    }
  }
  return s.finish();
}

// ---------------------------------------------------------------- tandem

SuiteReport tandem_suite(RandomStream stream) {
  SuiteBuilder s("tandem");
  const QueueParams ref{1.0 / 3.0, 2.0 / 3.0, 0.5, 0.5};
  const auto config = TandemConfig::ber_geom(ref.p, ref.alpha, ref.q, ref.beta, 4);
  const std::size_t burn = burn_in_slots(ref.arrival_rate(), ref.service_rate());
  const std::size_t n = 1000000;
  auto sub = stream.substream(0);
  const auto trace = simulate_tandem(config, burn + n, sub);

  s.check("feed_forward", feed_forward_holds(trace));
  bool identities = true;
  for (const auto& stage : trace.stages) identities = identities && !first_inconsistent_slot(stage);
  s.check("stage_identities", identities);

  for (std::size_t r = 0; r < trace.stages.size(); ++r) {
    std::vector<std::int64_t> dep;
    dep.reserve(n);
    for (std::size_t k = burn; k < trace.size(); ++k) dep.push_back(trace.stages[r][k].departures);
    s.test(chi_square_gof(EmpiricalPmf(20, dep), pmf_of(ref.arrival()), kLevel,
                          "departures_stage_" + std::to_string(r + 1)));
  }

  // Product-form tests join the suite's Bonferroni family.
  const auto report = verify_product_form(trace, stationary_law(ref), burn, kLevel);
  s.check("product_form_stride", report.stride < n / 1000, {{"stride", report.stride}});
  for (const auto* family : {&report.marginals, &report.cross_stage, &report.staggered_y}) {
    for (const auto& t : *family) s.test(t);
  }

  {
    const TandemConfig unit{Deterministic{1.0}, {Deterministic{1.0}, Deterministic{1.0}, Deterministic{1.0}}};
    auto r = stream.substream(1);
    const auto t = simulate_tandem(unit, 100, r);
    bool empty = true;
    for (const auto& st : t.stages) {
      for (const auto& slot : st.slots) empty = empty && slot.queue_before == 0 && slot.departures == 1;
    }
    s.check("unit_tandem_stays_empty", empty);
  }
  return s.finish();
}

// ---------------------------------------------------------------- percolation

SuiteReport perc_suite(RandomStream stream) {
  SuiteBuilder s("perc");

  {
    const WeightField f({{1, 5}, {4, 0}, {9, 2}});
    const PathQuery q{0, 0, 2, 1, true};
    s.check("hand_example", first_passage(f, q) == 3.0 && enumerate_first_passage(f, q) == 3.0,
            {{"dp", first_passage(f, q)}, {"brute_force", enumerate_first_passage(f, q)}});
  }

  {
    auto sub = stream.substream(0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t cols = 1 + uniform_index(sub, 8);
      const std::size_t rows = 1 + uniform_index(sub, 8);
      WeightField f(cols, rows);
      for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) f.at(c, r) = static_cast<double>(uniform_index(sub, 10));
      }
      PathQuery q;
      q.start_column = uniform_index(sub, cols);
      q.end_column = q.start_column + uniform_index(sub, cols - q.start_column);
      q.start_row = uniform_index(sub, rows);
      q.end_row = q.start_row + uniform_index(sub, rows - q.start_row);
      q.pinned = (i % 4) != 0;
      if (first_passage(f, q) != enumerate_first_passage(f, q)) ++mismatches;
    }
    s.check("dp_equals_brute_force", mismatches == 0, {{"instances", 1000}, {"mismatches", mismatches}});
  }

  {
    auto sub = stream.substream(1);
    const DistSpec arrival = BerGeom{1.0 / 3.0, 2.0 / 3.0};
    std::size_t failures = 0, instances = 0;
    for (std::size_t stages = 1; stages <= 4; ++stages) {
      auto r = sub.substream(stages);
      const auto rep = tandem_identity_check(arrival, std::vector<DistSpec>(stages, BerGeom{0.5, 0.5}),
                                             50, 250, r);
      failures += rep.failures;
      instances += rep.instances;
    }
    s.check("tandem_identity", failures == 0, {{"instances", instances}, {"failures", failures}});
  }

  {
    JumpField f;
    f.horizon = 3.0;
    f.rows = {{{1.0, 5.0}}, {{2.0, 3.0}}};
    s.close("continuous_two_row_example", continuous_first_passage(f, 0.0, 3.0, 0, 1), 3.0, 0.0);
    JumpField empty;
    empty.horizon = 1.0;
    empty.rows.resize(3);
    s.close("continuous_empty_field", continuous_first_passage(empty, 0.0, 1.0, 0, 2), 0.0, 0.0);
  }

  {
    auto sub = stream.substream(2);
    const auto field = JumpField::poisson(4, 10.0, GeomPlus{0.5}, sub);
    const double base = continuous_first_passage(field, 0.0, 10.0, 0, 3);
    auto moved = field;
    // Shifting an event within its gap in the merged list keeps the value.
    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> merged;
    for (std::size_t r = 0; r < moved.rows.size(); ++r) {
      for (std::size_t i = 0; i < moved.rows[r].size(); ++i) merged.push_back({moved.rows[r][i].time, {r, i}});
    }
    std::sort(merged.begin(), merged.end());
    for (std::size_t m = 0; m < merged.size(); ++m) {
      const double lo = m == 0 ? 0.0 : merged[m - 1].first;
      const double hi = m + 1 == merged.size() ? 10.0 : merged[m + 1].first;
      const auto [r, i] = merged[m].second;
      moved.rows[r][i].time = 0.5 * (lo + hi);
    }
    s.check("continuous_switch_point_insensitive",
            continuous_first_passage(moved, 0.0, 10.0, 0, 3) == base, {{"value", base}});
  }
  return s.finish();
}

// ---------------------------------------------------------------- time constants

SuiteReport tc_suite() {
  SuiteBuilder s("tc");
  const std::pair<double, double> sets[] = {{0.5, 0.5}, {0.7, 0.4}, {0.3, 0.6}};
  for (const auto& [q, b] : sets) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double x = 0.2 + 0.2 * i;
      worst = std::max(worst, std::abs(f_legendre(q, b, x).value - f_bergeom(q, b, x).value));
      worst = std::max(worst, std::abs(f_bergeom_alpha(q, b, x).value - f_bergeom(q, b, x).value));
    }
    s.check("parameterizations_agree/q=" + std::to_string(q) + ",beta=" + std::to_string(b), worst <= 1e-8,
            {{"max_difference", worst}});
  }

  s.close("geometric_case", f_bergeom(0.5, 0.5, 3.0).value, 6.0 - 4.0 * std::sqrt(2.0), 1e-8);
  s.close("geometric_closed_form", f_geometric(0.5, 3.0), 6.0 - 4.0 * std::sqrt(2.0), 1e-12);
  s.close("bernoulli_limit", f_bergeom(0.5, 1.0 - 1e-6, 3.0).value, f_bernoulli(0.5, 3.0), 1e-2);
  s.close("exponential_closed_form", f_exponential(3.0), 1.0, 1e-15);
  s.close("ber_exp_limit", f_berexp(1.0 - 1e-6, 3.0).value, f_exponential(3.0), 1e-3);
  s.close("continuous_exp_quadratic", ftilde_exp(2.0).value, ftilde_exp_closed(2.0), 1e-10);
  s.close("continuous_exp_value", ftilde_exp_closed(2.0), 0.0567003, 1e-7);
  s.close("continuous_geom_limit", ftilde_geom(1.0 - 1e-4, 3.0).value, ftilde_poisson(3.0), 1e-2);
  s.check("poisson_exact", ftilde_poisson(4.0) == 1.0 && ftilde_poisson(0.5) == 0.0);

  {
    bool flat = true, positive = true;
    for (const auto& [q, b] : sets) {
      const double crit = (1.0 - q) / q;
      flat = flat && f_bergeom(q, b, crit).value == 0.0 && f_bergeom(q, b, 0.5 * crit).value == 0.0;
      positive = positive && f_bergeom(q, b, crit + 0.01).value > 0.0;
    }
    flat = flat && f_bernoulli(0.5, 1.0) == 0.0 && f_geometric(0.5, 1.0) == 0.0 && ftilde_exp(1.0).value == 0.0;
    s.check("flat_region_exact_zero", flat);
    s.check("positive_past_critical_point", positive);
  }

  {
    bool shape = true;
    for (const auto& [q, b] : sets) {
      std::vector<double> v;
      for (int i = 0; i < 50; ++i) v.push_back(f_bergeom(q, b, 0.2 + 0.2 * i).value);
      for (std::size_t i = 0; i + 2 < v.size(); ++i) {
        shape = shape && v[i] >= 0.0 && v[i + 1] >= v[i] - 1e-12 && v[i + 2] - 2.0 * v[i + 1] + v[i] >= -1e-9;
      }
    }
    s.check("nonnegative_nondecreasing_convex", shape);
  }

  s.guarded("h_forms_agree", [&] {
    bool increasing = true;
    for (double q : {0.3, 0.5, 0.8}) {
      for (double b : {0.2, 0.5, 0.7}) {
        const double mu = q / b;
        double prev = 0.0;
        for (int i = 1; i < 20; ++i) {
          // h_of_lambda throws if its two closed forms disagree.
          const double h = h_of_lambda(q, b, mu * i / 20.0);
          increasing = increasing && h > prev;
          prev = h;
        }
      }
    }
    s.check("h_forms_agree_and_increase", increasing);
  });
  s.close("h_reference_value", h_of_lambda(0.5, 0.5, 0.5), 1.5, 1e-12);
  return s.finish();
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; }) &&
         std::all_of(tests.begin(), tests.end(), [](const TestResult& t) { return t.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"distributions", "queue", "tandem", "perc", "tc"};
  return names;
}

std::vector<SuiteReport> run_verification(const std::string& suite, std::uint64_t seed) {
  const auto& names = suite_names();
  std::vector<std::string> selected;
  if (suite == "all") {
    selected = names;
  } else if (std::find(names.begin(), names.end(), suite) != names.end()) {
    selected = {suite};
  } else {
    throw std::invalid_argument("unknown suite: " + suite);
  }
  const RandomStream root(seed);
  std::vector<SuiteReport> out;
  for (const auto& name : selected) {
    const auto index = static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin());
    const auto stream = root.substream(index);
    if (name == "distributions") out.push_back(distributions_suite(stream));
    if (name == "queue") out.push_back(queue_suite(stream));
    if (name == "tandem") out.push_back(tandem_suite(stream));
    if (name == "perc") out.push_back(perc_suite(stream));
    if (name == "tc") out.push_back(tc_suite());
  }
  return out;
}

nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : report.tests) tests.push_back(to_json(t));
  return {{"suite", report.suite}, {"passed", report.passed()}, {"checks", checks}, {"tests", tests}};
}

nlohmann::json verification_report(const std::vector<SuiteReport>& reports, std::uint64_t seed) {
  nlohmann::json suites = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : reports) {
    suites.push_back(to_json(r));
    ok = ok && r.passed();
  }
  return {{"seed", seed}, {"suites", suites}, {"passed", ok}};
}

}  // namespace bgq
