#pragma once

// Single batch queue in discrete time.
//
// Slot n: X customers present, A arrive (Y = X + A), S service offered,
// D = min(Y, S) depart, U = S - D unused, next X = Y - D.
// Derived: I = U + A(next slot), T = U + A(this slot).

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgq/distributions.hpp"
#include "bgq/random.hpp"

namespace bgq {

using Count = std::int64_t;

template <class V>
struct SlotOutcome {
  V next_queue{};
  V departures{};
  V unused{};
};

template <class V>
struct BasicSlotRecord {
  V arrivals{};        // A
  V service{};         // S
  V queue_before{};    // X
  V queue_after{};     // Y = X + A
  V departures{};      // D = min(Y, S)
  V unused{};          // U = S - D
  std::optional<V> unused_plus_next;  // I = U + A', absent on the last slot
  V unused_plus_arrival{};            // T = U + A

  friend bool operator==(const BasicSlotRecord&, const BasicSlotRecord&) = default;
};

using SlotRecord = BasicSlotRecord<Count>;
using RealSlotRecord = BasicSlotRecord<double>;

template <class V>
struct BasicTrace {
  std::vector<BasicSlotRecord<V>> slots;
  std::uint64_t seed = 0;
  DistSpec arrival = Deterministic{0.0};
  DistSpec service = Deterministic{0.0};

  std::size_t size() const { return slots.size(); }
  const BasicSlotRecord<V>& operator[](std::size_t n) const { return slots[n]; }
  V final_queue() const {
    return slots.empty() ? V{} : slots.back().queue_after - slots.back().departures;
  }
};

using Trace = BasicTrace<Count>;
using RealTrace = BasicTrace<double>;

// One slot of the recurrence. Throws std::domain_error on negative input.
template <class V>
SlotOutcome<V> step(V queue, V arrivals, V service) {
  if (queue < V{} || arrivals < V{} || service < V{}) {
    throw std::domain_error("queue step inputs must be nonnegative");
  }
  const V after = queue + arrivals;
  const V departed = after < service ? after : service;
  return {after - departed, departed, service - departed};
}

// Runs the recurrence over given input sequences starting from `initial`.
template <class V>
BasicTrace<V> trace_from_inputs(std::span<const V> arrivals, std::span<const V> services,
                                V initial = V{}) {
  if (arrivals.size() != services.size()) {
    throw std::invalid_argument("arrival and service sequences differ in length");
  }
  BasicTrace<V> trace;
  trace.slots.resize(arrivals.size());
  V x = initial;
  for (std::size_t n = 0; n < arrivals.size(); ++n) {
    auto& rec = trace.slots[n];
    const auto out = step(x, arrivals[n], services[n]);
    rec.arrivals = arrivals[n];
    rec.service = services[n];
    rec.queue_before = x;
    rec.queue_after = x + arrivals[n];
    rec.departures = out.departures;
    rec.unused = out.unused;
    rec.unused_plus_arrival = out.unused + arrivals[n];
    if (n > 0) trace.slots[n - 1].unused_plus_next = trace.slots[n - 1].unused + arrivals[n];
    x = out.next_queue;
  }
  return trace;
}

// Integer-valued simulation; both laws must be discrete.
Trace simulate(const DistSpec& arrival, const DistSpec& service, std::size_t n_slots,
               Count initial, RandomStream& stream);

// Real-valued simulation (e.g. BerExp work); same recurrence.
RealTrace simulate_real(const DistSpec& arrival, const DistSpec& service, std::size_t n_slots,
                        double initial, RandomStream& stream);

// Checks every slot identity and the slot-to-slot links. For real traces the
// comparisons use absolute tolerance `tol`. Returns the first failing slot, if any.
std::optional<std::size_t> first_inconsistent_slot(const Trace& trace);
std::optional<std::size_t> first_inconsistent_slot(const RealTrace& trace, double tol = 1e-12);

// max over k of sum_{r=k}^{n-1} (A_r - S_r), empty sum = 0: the queue length
// after the window when started empty at its beginning.
Count path_max_queue(std::span<const Count> arrivals, std::span<const Count> services);

// Ber(p)Geom(alpha) arrivals against Ber(q)Geom(beta) services.
struct QueueParams {
  double p = 0.0;
  double alpha = 0.0;
  double q = 0.0;
  double beta = 0.0;

  DistSpec arrival() const { return BerGeom{p, alpha}; }
  DistSpec service() const { return BerGeom{q, beta}; }
  double arrival_rate() const { return p / alpha; }
  double service_rate() const { return q / beta; }
};

void validate(const QueueParams& params);
bool is_stable(const QueueParams& params);

// [alpha/(1-alpha)][p/(1-p)] - [beta/(1-beta)][q/(1-q)]; zero iff the
// reversibility condition holds.
double check_condition(const QueueParams& params);

// Relative form of the condition test, usable when the odds ratios are huge.
bool condition_holds(const QueueParams& params, double rel_tol = 1e-9);

// alpha p/(1-p) - beta q/(1-q) for Ber(p)Exp(alpha) / Ber(q)Exp(beta).
double check_continuous_condition(double p, double alpha_rate, double q, double beta_rate);

struct ArrivalParams {
  double p = 0.0;
  double alpha = 0.0;
};

// Unique (p, alpha) on the condition curve of (q, beta) with p/alpha = lambda.
// Throws std::domain_error for lambda <= 0 or lambda >= q/beta ("unstable intensity").
ArrivalParams solve_arrival(double q, double beta, double lambda);

struct StationaryLaw {
  double c = 0.0;            // P(X > 0)
  double gamma = 0.0;        // geometric parameter of X given X > 0
  double y_bernoulli = 0.0;  // P(Y > 0) = p + c - pc

  double pmf_x(Count k) const;
  double pmf_y(Count k) const;
  double mean_x() const { return c / gamma; }
  double mean_y() const { return y_bernoulli / gamma; }
};

// X ~ Ber(c)Geom(gamma), Y ~ Ber(p+c-pc)Geom(gamma). Requires stability and the
// condition; otherwise throws std::domain_error (use markov_oracle instead).
StationaryLaw stationary_law(const QueueParams& params);

// The same formulas without the precondition checks.
StationaryLaw stationary_law_unchecked(const QueueParams& params);

// max |pi(k)P(Y=m|X=k)P(X'=r|Y=m) - pi(r)P(Y=m|X=r)P(X'=k|Y=m)| over
// 0 <= k, r <= m <= K, with pi from stationary_law_unchecked.
double verify_detailed_balance(const QueueParams& params, int max_level);

// Log-likelihood of a busy period given it starts from an empty queue:
// log P(A = a, S_1..S_{n-1} = d_1..d_{n-1}, S_n >= d_n | X_0 = 0).
// Throws std::invalid_argument unless sum a = sum d, every proper prefix of a
// exceeds that of d, a_1 > 0 and d_n > 0.
double excursion_loglik(const QueueParams& params, std::span<const Count> arrivals,
                        std::span<const Count> departures);

// The product-form expression for the same excursion written in terms of
// zero counts. Equals excursion_loglik + n log((1-alpha)(1-beta)).
double excursion_loglik_product_form(const QueueParams& params, std::span<const Count> arrivals,
                                     std::span<const Count> departures);

struct OracleResult {
  std::vector<double> pi;    // stationary law of X on {0..K}
  double leaked_mass = 0.0;  // probability flow out of {0..K} under pi
  std::size_t iterations = 0;
};

// Stationary law of the X-chain truncated to {0..K}: exact one-slot kernel
// from pmf/tails (inputs cut where their tail is < 1e-250, so the deep tail
// of pi keeps full relative accuracy), then power
// iteration until the largest relative change is below 1e-13.
// Throws std::runtime_error("increase K") if leaked_mass > 1e-12.
OracleResult markov_oracle(const DistSpec& arrival, const DistSpec& service, int max_level);

// max(1e4, 100 / (mu - lambda)) slots.
std::size_t burn_in_slots(double arrival_rate, double service_rate);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(std::ostream& out, const RealTrace& trace);

nlohmann::json to_json(const StationaryLaw& law);
nlohmann::json to_json(const QueueParams& params);

}  // namespace bgq
