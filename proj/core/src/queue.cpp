#include "bgq/queue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bgq/format.hpp"

namespace bgq {
namespace {

double odds(double v) { return v / (1.0 - v); }

void require_probability(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0,1)");
}

template <class V, class Eq>
std::optional<std::size_t> first_bad(const BasicTrace<V>& trace, Eq eq) {
  const auto& s = trace.slots;
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto& r = s[n];
    const V d = std::min(r.queue_after, r.service);
    bool ok = eq(r.queue_after, r.queue_before + r.arrivals) && eq(r.departures, d) &&
              eq(r.departures + r.unused, r.service) &&
              eq(r.unused_plus_arrival, r.unused + r.arrivals) && r.queue_before >= V{} &&
              r.unused >= V{};
    if (n + 1 < s.size()) {
      const auto& next = s[n + 1];
      ok = ok && eq(next.queue_before, r.queue_after - r.departures) &&
           eq(next.queue_before - r.queue_before, r.arrivals - r.departures) &&
           r.unused_plus_next.has_value() &&
           eq(*r.unused_plus_next, r.unused + next.arrivals);
    } else {
      ok = ok && !r.unused_plus_next.has_value();
    }
    if (!ok) return n;
  }
  return std::nullopt;
}

template <class V>
void write_csv(std::ostream& out, const BasicTrace<V>& trace) {
  const ClassicLocaleScope classic(out);
  auto put = [&out](V v) {
    if constexpr (std::is_floating_point_v<V>) {
      out << format_double(v);
    } else {
      out << v;
    }
  };
  out << "n,A,S,X,Y,D,U,I,T\n";
  for (std::size_t n = 0; n < trace.slots.size(); ++n) {
    const auto& r = trace.slots[n];
    out << n << ',';
    put(r.arrivals);
    out << ',';
    put(r.service);
    out << ',';
    put(r.queue_before);
    out << ',';
    put(r.queue_after);
    out << ',';
    put(r.departures);
    out << ',';
    put(r.unused);
    out << ',';
    if (r.unused_plus_next) put(*r.unused_plus_next);
    out << ',';
    put(r.unused_plus_arrival);
    out << '\n';
  }
}

void check_excursion(std::span<const Count> a, std::span<const Count> d) {
  if (a.empty() || a.size() != d.size()) {
    throw std::invalid_argument("excursion sequences must be nonempty and aligned");
  }
  Count sa = 0, sd = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || d[i] < 0) throw std::invalid_argument("excursion values must be >= 0");
    sa += a[i];
    sd += d[i];
    if (i + 1 < a.size() && !(sa > sd)) {
      throw std::invalid_argument("excursion returns to zero before its end");
    }
  }
  if (sa != sd) throw std::invalid_argument("excursion arrivals and departures must balance");
  if (a.front() <= 0 || d.back() <= 0) {
    throw std::invalid_argument("excursion must start with an arrival and end with a departure");
  }
}

}  // namespace

Trace simulate(const DistSpec& arrival, const DistSpec& service, std::size_t n_slots,
               Count initial, RandomStream& stream) {
  if (n_slots < 1) throw std::invalid_argument("n_slots must be >= 1");
  if (!is_discrete(arrival) || !is_discrete(service)) {
    throw std::domain_error("discrete-only operation: use simulate_real");
  }
  std::vector<Count> a(n_slots), s(n_slots);
  for (std::size_t n = 0; n < n_slots; ++n) {
    a[n] = sample_count(arrival, stream);
    s[n] = sample_count(service, stream);
  }
  auto trace = trace_from_inputs<Count>(a, s, initial);
  trace.seed = stream.seed();
  trace.arrival = arrival;
  trace.service = service;
  return trace;
}

RealTrace simulate_real(const DistSpec& arrival, const DistSpec& service, std::size_t n_slots,
                        double initial, RandomStream& stream) {
  if (n_slots < 1) throw std::invalid_argument("n_slots must be >= 1");
  std::vector<double> a(n_slots), s(n_slots);
  for (std::size_t n = 0; n < n_slots; ++n) {
    a[n] = sample(arrival, stream);
    s[n] = sample(service, stream);
  }
  auto trace = trace_from_inputs<double>(a, s, initial);
  trace.seed = stream.seed();
  trace.arrival = arrival;
  trace.service = service;
  return trace;
}

std::optional<std::size_t> first_inconsistent_slot(const Trace& trace) {
  return first_bad(trace, [](Count x, Count y) { return x == y; });
}

std::optional<std::size_t> first_inconsistent_slot(const RealTrace& trace, double tol) {
  return first_bad(trace, [tol](double x, double y) { return std::abs(x - y) <= tol; });
}

Count path_max_queue(std::span<const Count> arrivals, std::span<const Count> services) {
  if (arrivals.size() != services.size()) {
    throw std::invalid_argument("arrival and service sequences differ in length");
  }
  // Suffix sums from the end of the window backwards; k = n gives the empty sum.
  Count best = 0, suffix = 0;
  for (std::size_t k = arrivals.size(); k-- > 0;) {
    suffix += arrivals[k] - services[k];
    best = std::max(best, suffix);
  }
  return best;
}

void validate(const QueueParams& params) {
  require_probability(params.p, "p");
  require_probability(params.alpha, "alpha");
  require_probability(params.q, "q");
  require_probability(params.beta, "beta");
}

bool is_stable(const QueueParams& params) {
  return params.p * params.beta < params.q * params.alpha;
}

double check_condition(const QueueParams& params) {
  return odds(params.alpha) * odds(params.p) - odds(params.beta) * odds(params.q);
}

bool condition_holds(const QueueParams& params, double rel_tol) {
  const double lhs = odds(params.alpha) * odds(params.p);
  const double rhs = odds(params.beta) * odds(params.q);
  return std::abs(lhs - rhs) <= rel_tol * std::max(std::abs(lhs), std::abs(rhs));
}

double check_continuous_condition(double p, double alpha_rate, double q, double beta_rate) {
  return alpha_rate * odds(p) - beta_rate * odds(q);
}

ArrivalParams solve_arrival(double q, double beta, double lambda) {
  require_probability(q, "q");
  require_probability(beta, "beta");
  if (!(lambda > 0.0)) throw std::domain_error("arrival intensity must be positive");
  if (!(lambda < q / beta)) throw std::domain_error("unstable intensity: lambda >= q/beta");
  // lambda (alpha^2 (1-beta-q) + alpha beta q) = (1-alpha) beta q, i.e.
  // A alpha^2 + B alpha + C = 0 with C < 0 < B; the root in (beta, 1) is the
  // positive one, taken in the cancellation-free form.
  const double a2 = lambda * (1.0 - beta - q);
  const double b1 = beta * q * (1.0 + lambda);
  const double c0 = -beta * q;
  const double disc = b1 * b1 - 4.0 * a2 * c0;
  const double alpha = -2.0 * c0 / (b1 + std::sqrt(std::max(disc, 0.0)));
  return {lambda * alpha, alpha};
}

double StationaryLaw::pmf_x(Count k) const {
  if (k < 0) return 0.0;
  return k == 0 ? 1.0 - c : c * gamma * std::pow(1.0 - gamma, static_cast<double>(k - 1));
}

double StationaryLaw::pmf_y(Count k) const {
  if (k < 0) return 0.0;
  return k == 0 ? 1.0 - y_bernoulli
                : y_bernoulli * gamma * std::pow(1.0 - gamma, static_cast<double>(k - 1));
}

StationaryLaw stationary_law_unchecked(const QueueParams& params) {
  StationaryLaw law;
  law.c = odds(params.beta) * (1.0 - params.alpha) / params.alpha;
  law.gamma = (params.alpha - params.beta) / (1.0 - params.beta);
  law.y_bernoulli = params.p + law.c - params.p * law.c;
  return law;
}

StationaryLaw stationary_law(const QueueParams& params) {
  validate(params);
  if (!is_stable(params)) throw std::domain_error("unstable parameters: need p*beta < q*alpha");
  if (!condition_holds(params)) {
    throw std::domain_error(
        "reversibility condition violated; the stationary law is not of this form, "
        "use markov_oracle");
  }
  return stationary_law_unchecked(params);
}

double verify_detailed_balance(const QueueParams& params, int max_level) {
  validate(params);
  const auto law = stationary_law_unchecked(params);
  const DistSpec a = params.arrival();
  const DistSpec s = params.service();
  const auto levels = static_cast<std::size_t>(max_level) + 1;
  std::vector<double> pa(levels), ps(levels), ps_tail(levels), pi(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    const auto kk = static_cast<Count>(k);
    pa[k] = pmf(a, kk);
    ps[k] = pmf(s, kk);
    ps_tail[k] = prob_at_least(s, kk);
    pi[k] = law.pmf_x(kk);
  }
  // P(X' = r | Y = m)
  auto down = [&](std::size_t m, std::size_t r) { return r == 0 ? ps_tail[m] : ps[m - r]; };
  double worst = 0.0;
  for (std::size_t m = 0; m < levels; ++m) {
    for (std::size_t k = 0; k <= m; ++k) {
      for (std::size_t r = 0; r <= m; ++r) {
        const double lhs = pi[k] * pa[m - k] * down(m, r);
        const double rhs = pi[r] * pa[m - r] * down(m, k);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

double excursion_loglik(const QueueParams& params, std::span<const Count> arrivals,
                        std::span<const Count> departures) {
  validate(params);
  check_excursion(arrivals, departures);
  const DistSpec a = params.arrival();
  const DistSpec s = params.service();
  const std::size_t n = arrivals.size();
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) ll += std::log(pmf(a, arrivals[i]));
  for (std::size_t i = 0; i + 1 < n; ++i) ll += std::log(pmf(s, departures[i]));
  ll += std::log(prob_at_least(s, departures[n - 1]));
  return ll;
}

double excursion_loglik_product_form(const QueueParams& params, std::span<const Count> arrivals,
                                     std::span<const Count> departures) {
  validate(params);
  check_excursion(arrivals, departures);
  const auto [p, alpha, q, beta] = params;
  const double n = static_cast<double>(arrivals.size());
  double sum_a = 0.0, sum_d = 0.0, zero_a = 0.0, zero_d = 0.0;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    sum_a += static_cast<double>(arrivals[i]);
    sum_d += static_cast<double>(departures[i]);
    zero_a += arrivals[i] == 0 ? 1.0 : 0.0;
    zero_d += departures[i] == 0 ? 1.0 : 0.0;
  }
  return n * std::log(p * alpha) + sum_a * std::log1p(-alpha) +
         zero_a * std::log((1.0 - p) / p * (1.0 - alpha) / alpha) + n * std::log(q) +
         (n - 1.0) * std::log(beta) + sum_d * std::log1p(-beta) +
         zero_d * std::log((1.0 - q) / q * (1.0 - beta) / beta);
}

OracleResult markov_oracle(const DistSpec& arrival, const DistSpec& service, int max_level) {
  if (max_level < 1) throw std::invalid_argument("truncation level must be >= 1");
  if (!is_discrete(arrival) || !is_discrete(service)) {
    throw std::domain_error("discrete-only operation");
  }
  // Inputs are cut only where their remaining mass is far below anything a
  // double can resolve relative to pi(K); an absolute cut such as 1e-14 would
  // distort the deep tail of pi by a relative amount of the same order.
  constexpr double kInputTail = 1e-250;
  const auto K = static_cast<std::size_t>(max_level);
  const auto amax = static_cast<std::size_t>(support_bound(arrival, kInputTail));
  const auto smax = static_cast<std::size_t>(support_bound(service, kInputTail));

  std::vector<double> pa(amax + 1), ps(smax + 1), s_tail(K + amax + 2);
  for (std::size_t k = 0; k <= amax; ++k) pa[k] = pmf(arrival, static_cast<Count>(k));
  for (std::size_t k = 0; k <= smax; ++k) ps[k] = pmf(service, static_cast<Count>(k));
  for (std::size_t y = 0; y < s_tail.size(); ++y) {
    s_tail[y] = prob_at_least(service, static_cast<Count>(y));
  }

  // kernel[k][r] = sum_a P(A=a) P(X'=r | Y=k+a); mass landing above K is lost.
  std::vector<double> kernel((K + 1) * (K + 1), 0.0);
  for (std::size_t k = 0; k <= K; ++k) {
    double* row = &kernel[k * (K + 1)];
    for (std::size_t a = 0; a <= amax; ++a) {
      const std::size_t y = k + a;
      row[0] += pa[a] * s_tail[y];
      // r = y - s with 1 <= r <= K and s <= smax
      const std::size_t r_lo = y > smax ? std::max<std::size_t>(1, y - smax) : 1;
      for (std::size_t r = r_lo; r <= std::min(K, y); ++r) row[r] += pa[a] * ps[y - r];
    }
  }

  OracleResult out;
  std::vector<double> pi(K + 1, 0.0), next(K + 1);
  pi[0] = 1.0;
  constexpr std::size_t kMaxIter = 2'000'000;
  for (out.iterations = 1; out.iterations <= kMaxIter; ++out.iterations) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t k = 0; k <= K; ++k) {
      const double w = pi[k];
      if (w == 0.0) continue;
      const double* row = &kernel[k * (K + 1)];
      for (std::size_t r = 0; r <= K; ++r) next[r] += w * row[r];
    }
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t r = 0; r <= K; ++r) {
      next[r] /= total;
      if (next[r] > 1e-300) change = std::max(change, std::abs(next[r] - pi[r]) / next[r]);
    }
    pi.swap(next);
    if (change < 1e-13) break;
  }
  if (out.iterations > kMaxIter) throw std::runtime_error("power iteration did not converge");

  for (std::size_t k = 0; k <= K; ++k) {
    double row_sum = 0.0;
    for (std::size_t r = 0; r <= K; ++r) row_sum += kernel[k * (K + 1) + r];
    out.leaked_mass += pi[k] * std::max(0.0, 1.0 - row_sum);
  }
  if (out.leaked_mass > 1e-12) {
    throw std::runtime_error("increase K: truncated mass " + format_double(out.leaked_mass));
  }
  out.pi = std::move(pi);
  return out;
}

std::size_t burn_in_slots(double arrival_rate, double service_rate) {
  const double gap = service_rate - arrival_rate;
  const double scaled = gap > 0.0 ? 100.0 / gap : std::numeric_limits<double>::infinity();
  return static_cast<std::size_t>(std::max(1e4, std::min(scaled, 1e9)));
}

void write_trace_csv(std::ostream& out, const Trace& trace) { write_csv(out, trace); }
void write_trace_csv(std::ostream& out, const RealTrace& trace) { write_csv(out, trace); }

nlohmann::json to_json(const StationaryLaw& law) {
  return {{"c", law.c},
          {"gamma", law.gamma},
          {"y_bernoulli", law.y_bernoulli},
          {"mean_x", law.mean_x()},
          {"mean_y", law.mean_y()}};
}

nlohmann::json to_json(const QueueParams& params) {
  return {{"p", params.p}, {"alpha", params.alpha}, {"q", params.q}, {"beta", params.beta}};
}

}  // namespace bgq
