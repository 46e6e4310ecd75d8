#pragma once

// Batch-size distributions for arrivals and services.
//
// Geometric naming is always qualified:
//   GeomPlus(a)  on {1, 2, ...}  P(k) = a (1-a)^(k-1)
//   GeomZero(a)  on {0, 1, ...}  = GeomPlus(a) - 1
//   BerGeom(p,a) = Bernoulli(p) * GeomPlus(a): mass 1-p at 0, p a (1-a)^(k-1) above.
//   BerExp(p,a)  = Bernoulli(p) * Exp(a): P(X >= x) = p e^(-a x) for x > 0.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgq/random.hpp"

namespace bgq {

struct Bernoulli {
  double p;
};
struct GeomPlus {
  double alpha;
};
struct GeomZero {
  double alpha;
};
struct BerGeom {
  double p;
  double alpha;
};
struct Exponential {
  double rate;
};
struct BerExp {
  double p;
  double rate;
};
struct Deterministic {
  double value;
};
// Finite law on {0, 1, ..., probs.size()-1}; e.g. uniform{0,1,2}.
struct Categorical {
  std::vector<double> probs;
};

using DistSpec = std::variant<Bernoulli, GeomPlus, GeomZero, BerGeom, Exponential,
                              BerExp, Deterministic, Categorical>;

// Throws std::invalid_argument when a parameter is out of range.
void validate(const DistSpec& spec);

// Deterministic counts as discrete only when its value is a whole number.
bool is_discrete(const DistSpec& spec);

std::string kind_name(const DistSpec& spec);

// P(X = k). Throws std::domain_error("discrete-only operation") for continuous laws.
double pmf(const DistSpec& spec, std::int64_t k);

// P(X >= k) for discrete laws.
double prob_at_least(const DistSpec& spec, std::int64_t k);

// P(X >= x) for any law (x real).
double tail(const DistSpec& spec, double x);

double mean(const DistSpec& spec);
double variance(const DistSpec& spec);

// E[z^X], 0 <= z <= 1. Discrete laws only.
double pgf(const DistSpec& spec, double z);

// Smallest n with P(X > n) < eps. Discrete laws only.
std::int64_t support_bound(const DistSpec& spec, double eps);

// One draw. Geometric parts use inverse transform ceil(log U / log(1-a)).
double sample(const DistSpec& spec, RandomStream& stream);

// One draw as an integer; discrete laws only.
std::int64_t sample_count(const DistSpec& spec, RandomStream& stream);

// Draws GeomPlus(a) (a == 1 gives 1).
std::int64_t sample_geom_plus(double a, RandomStream& stream);

// BerGeom(p, a) drawn as W_1 + ... + W_V with P(V = k) = (1-p) p^k and
// W_i ~ GeomPlus(a / (1-p)). Requires a <= 1 - p, otherwise throws
// std::domain_error("compound representation unavailable").
std::int64_t sample_compound(double p, double a, RandomStream& stream);

nlohmann::json to_json(const DistSpec& spec);
DistSpec dist_from_json(const nlohmann::json& j);

}  // namespace bgq
