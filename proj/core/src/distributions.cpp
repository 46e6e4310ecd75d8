#include "bgq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bgq {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_probability(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0,1)");
  }
}

void require_rate(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("rate must be strictly positive");
  }
}

[[noreturn]] void discrete_only() {
  throw std::domain_error("discrete-only operation");
}

bool whole(double v) { return std::floor(v) == v; }

// P(GeomPlus(a) >= k) for k >= 1.
double geom_plus_tail(double a, std::int64_t k) {
  return std::pow(1.0 - a, static_cast<double>(k - 1));
}

}  // namespace

void validate(const DistSpec& spec) {
  std::visit(overloaded{
                 [](const Bernoulli& d) { require_probability(d.p, "p"); },
                 [](const GeomPlus& d) { require_probability(d.alpha, "alpha"); },
                 [](const GeomZero& d) { require_probability(d.alpha, "alpha"); },
                 [](const BerGeom& d) {
                   require_probability(d.p, "p");
                   require_probability(d.alpha, "alpha");
                 },
                 [](const Exponential& d) { require_rate(d.rate); },
                 [](const BerExp& d) {
                   require_probability(d.p, "p");
                   require_rate(d.rate);
                 },
                 [](const Deterministic& d) {
                   if (!(d.value >= 0.0) || !std::isfinite(d.value)) {
                     throw std::invalid_argument("deterministic value must be >= 0");
                   }
                 },
                 [](const Categorical& d) {
                   if (d.probs.empty()) {
                     throw std::invalid_argument("categorical law needs at least one cell");
                   }
                   double total = 0.0;
                   for (double w : d.probs) {
                     if (!(w >= 0.0)) {
                       throw std::invalid_argument("categorical probabilities must be >= 0");
                     }
                     total += w;
                   }
                   if (std::abs(total - 1.0) > 1e-12) {
                     throw std::invalid_argument("categorical probabilities must sum to 1");
                   }
                 },
             },
             spec);
}

bool is_discrete(const DistSpec& spec) {
  return std::visit(overloaded{
                        [](const Exponential&) { return false; },
                        [](const BerExp&) { return false; },
                        [](const Deterministic& d) { return whole(d.value); },
                        [](const auto&) { return true; },
                    },
                    spec);
}

std::string kind_name(const DistSpec& spec) {
  return std::visit(overloaded{
                        [](const Bernoulli&) { return "bernoulli"; },
                        [](const GeomPlus&) { return "geom_plus"; },
                        [](const GeomZero&) { return "geom_zero"; },
                        [](const BerGeom&) { return "ber_geom"; },
                        [](const Exponential&) { return "exp"; },
                        [](const BerExp&) { return "ber_exp"; },
                        [](const Deterministic&) { return "deterministic"; },
                        [](const Categorical&) { return "categorical"; },
                    },
                    spec);
}

double pmf(const DistSpec& spec, std::int64_t k) {
  if (!is_discrete(spec)) discrete_only();
  if (k < 0) return 0.0;
  return std::visit(
      overloaded{
          [k](const Bernoulli& d) { return k == 0 ? 1.0 - d.p : (k == 1 ? d.p : 0.0); },
          [k](const GeomPlus& d) {
            return k == 0 ? 0.0 : d.alpha * geom_plus_tail(d.alpha, k);
          },
          [k](const GeomZero& d) { return d.alpha * geom_plus_tail(d.alpha, k + 1); },
          [k](const BerGeom& d) {
            return k == 0 ? 1.0 - d.p : d.p * d.alpha * geom_plus_tail(d.alpha, k);
          },
          [k](const Deterministic& d) {
            return static_cast<double>(k) == d.value ? 1.0 : 0.0;
          },
          [k](const Categorical& d) {
            return static_cast<std::size_t>(k) < d.probs.size()
                       ? d.probs[static_cast<std::size_t>(k)]
                       : 0.0;
          },
          [](const auto&) -> double { discrete_only(); },
      },
      spec);
}

double prob_at_least(const DistSpec& spec, std::int64_t k) {
  if (!is_discrete(spec)) discrete_only();
  if (k <= 0) return 1.0;
  return std::visit(
      overloaded{
          [k](const Bernoulli& d) { return k == 1 ? d.p : 0.0; },
          [k](const GeomPlus& d) { return geom_plus_tail(d.alpha, k); },
          [k](const GeomZero& d) { return geom_plus_tail(d.alpha, k + 1); },
          [k](const BerGeom& d) { return d.p * geom_plus_tail(d.alpha, k); },
          [k](const Deterministic& d) { return d.value >= static_cast<double>(k) ? 1.0 : 0.0; },
          [k](const Categorical& d) {
            double s = 0.0;
            for (std::size_t i = static_cast<std::size_t>(k); i < d.probs.size(); ++i) {
              s += d.probs[i];
            }
            return s;
          },
          [](const auto&) -> double { discrete_only(); },
      },
      spec);
}

double tail(const DistSpec& spec, double x) {
  if (x <= 0.0) return 1.0;
  return std::visit(overloaded{
                        [x](const Exponential& d) { return std::exp(-d.rate * x); },
                        [x](const BerExp& d) { return d.p * std::exp(-d.rate * x); },
                        [x](const Deterministic& d) { return d.value >= x ? 1.0 : 0.0; },
                        [x, &spec](const auto&) {
                          return prob_at_least(spec, static_cast<std::int64_t>(std::ceil(x)));
                        },
                    },
                    spec);
}

double mean(const DistSpec& spec) {
  return std::visit(overloaded{
                        [](const Bernoulli& d) { return d.p; },
                        [](const GeomPlus& d) { return 1.0 / d.alpha; },
                        [](const GeomZero& d) { return (1.0 - d.alpha) / d.alpha; },
                        [](const BerGeom& d) { return d.p / d.alpha; },
                        [](const Exponential& d) { return 1.0 / d.rate; },
                        [](const BerExp& d) { return d.p / d.rate; },
                        [](const Deterministic& d) { return d.value; },
                        [](const Categorical& d) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < d.probs.size(); ++i) {
                            m += static_cast<double>(i) * d.probs[i];
                          }
                          return m;
                        },
                    },
                    spec);
}

double variance(const DistSpec& spec) {
  return std::visit(overloaded{
                        [](const Bernoulli& d) { return d.p * (1.0 - d.p); },
                        [](const GeomPlus& d) { return (1.0 - d.alpha) / (d.alpha * d.alpha); },
                        [](const GeomZero& d) { return (1.0 - d.alpha) / (d.alpha * d.alpha); },
                        [](const BerGeom& d) {
                          return (d.p * (2.0 - d.alpha) - d.p * d.p) / (d.alpha * d.alpha);
                        },
                        [](const Exponential& d) { return 1.0 / (d.rate * d.rate); },
                        [](const BerExp& d) { return (2.0 * d.p - d.p * d.p) / (d.rate * d.rate); },
                        [](const Deterministic&) { return 0.0; },
                        [](const Categorical& d) {
                          double m = 0.0, m2 = 0.0;
                          for (std::size_t i = 0; i < d.probs.size(); ++i) {
                            const double v = static_cast<double>(i);
                            m += v * d.probs[i];
                            m2 += v * v * d.probs[i];
                          }
                          return m2 - m * m;
                        },
                    },
                    spec);
}

double pgf(const DistSpec& spec, double z) {
  if (!is_discrete(spec)) discrete_only();
  if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("pgf argument must lie in [0,1]");
  return std::visit(
      overloaded{
          [z](const Bernoulli& d) { return 1.0 - d.p + d.p * z; },
          [z](const GeomPlus& d) { return d.alpha * z / (1.0 - (1.0 - d.alpha) * z); },
          [z](const GeomZero& d) { return d.alpha / (1.0 - (1.0 - d.alpha) * z); },
          [z](const BerGeom& d) {
            return ((1.0 - d.p) - (1.0 - d.p - d.alpha) * z) / (1.0 - (1.0 - d.alpha) * z);
          },
          [z](const Deterministic& d) { return d.value == 0.0 ? 1.0 : std::pow(z, d.value); },
          [z](const Categorical& d) {
            double s = 0.0, zk = 1.0;
            for (double w : d.probs) {
              s += w * zk;
              zk *= z;
            }
            return s;
          },
          [](const auto&) -> double { discrete_only(); },
      },
      spec);
}

std::int64_t support_bound(const DistSpec& spec, double eps) {
  if (!is_discrete(spec)) discrete_only();
  // P(X > n) = scale * (1-a)^n for the geometric families (scale 1, 1-a, p
  // for GeomPlus, GeomZero, BerGeom).
  auto geometric = [eps](double scale, double a) -> std::int64_t {
    if (scale < eps) return 0;
    const double n = std::log(eps / scale) / std::log1p(-a);
    auto k = static_cast<std::int64_t>(std::floor(n));
    if (k < 0) k = 0;
    while (scale * std::pow(1.0 - a, static_cast<double>(k)) >= eps) ++k;
    return k;
  };
  return std::visit(
      overloaded{
          [eps](const Bernoulli& d) -> std::int64_t { return d.p < eps ? 0 : 1; },
          [&](const GeomPlus& d) { return geometric(1.0, d.alpha); },
          [&](const GeomZero& d) { return geometric(1.0 - d.alpha, d.alpha); },
          [&](const BerGeom& d) { return geometric(d.p, d.alpha); },
          [](const Deterministic& d) { return static_cast<std::int64_t>(d.value); },
          [eps](const Categorical& d) {
            double above = 1.0;
            std::int64_t n = 0;
            for (std::size_t i = 0; i < d.probs.size(); ++i) {
              above -= d.probs[i];
              n = static_cast<std::int64_t>(i);
              if (above < eps) break;
            }
            return n;
          },
          [](const auto&) -> std::int64_t { discrete_only(); },
      },
      spec);
}

std::int64_t sample_geom_plus(double a, RandomStream& stream) {
  if (a >= 1.0) return 1;
  const double u = stream.uniform();
  const double k = std::ceil(std::log(u) / std::log1p(-a));
  return k < 1.0 ? 1 : static_cast<std::int64_t>(k);
}

double sample(const DistSpec& spec, RandomStream& stream) {
  return std::visit(
      overloaded{
          [&](const Bernoulli& d) { return stream.uniform() < d.p ? 1.0 : 0.0; },
          [&](const GeomPlus& d) { return static_cast<double>(sample_geom_plus(d.alpha, stream)); },
          [&](const GeomZero& d) {
            return static_cast<double>(sample_geom_plus(d.alpha, stream) - 1);
          },
          [&](const BerGeom& d) {
            if (!(stream.uniform() < d.p)) return 0.0;
            return static_cast<double>(sample_geom_plus(d.alpha, stream));
          },
          [&](const Exponential& d) { return -std::log(stream.uniform()) / d.rate; },
          [&](const BerExp& d) {
            if (!(stream.uniform() < d.p)) return 0.0;
            return -std::log(stream.uniform()) / d.rate;
          },
          [](const Deterministic& d) { return d.value; },
          [&](const Categorical& d) {
            const double u = stream.uniform();
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < d.probs.size(); ++i) {
              acc += d.probs[i];
              if (u < acc) return static_cast<double>(i);
            }
            return static_cast<double>(d.probs.size() - 1);
          },
      },
      spec);
}

std::int64_t sample_count(const DistSpec& spec, RandomStream& stream) {
  if (!is_discrete(spec)) discrete_only();
  return static_cast<std::int64_t>(sample(spec, stream));
}

std::int64_t sample_compound(double p, double a, RandomStream& stream) {
  require_probability(p, "p");
  require_probability(a, "alpha");
  if (a > 1.0 - p) throw std::domain_error("compound representation unavailable");
  const double summand = std::min(1.0, a / (1.0 - p));
  // V ~ GeomZero(1-p): P(V = k) = (1-p) p^k.
  const std::int64_t v = sample_geom_plus(1.0 - p, stream) - 1;
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < v; ++i) total += sample_geom_plus(summand, stream);
  return total;
}

nlohmann::json to_json(const DistSpec& spec) {
  using nlohmann::json;
  return std::visit(
      overloaded{
          [](const Bernoulli& d) { return json{{"kind", "bernoulli"}, {"p", d.p}}; },
          [](const GeomPlus& d) { return json{{"kind", "geom_plus"}, {"alpha", d.alpha}}; },
          [](const GeomZero& d) { return json{{"kind", "geom_zero"}, {"alpha", d.alpha}}; },
          [](const BerGeom& d) {
            return json{{"kind", "ber_geom"}, {"p", d.p}, {"alpha", d.alpha}};
          },
          [](const Exponential& d) { return json{{"kind", "exp"}, {"rate", d.rate}}; },
          [](const BerExp& d) { return json{{"kind", "ber_exp"}, {"p", d.p}, {"rate", d.rate}}; },
          [](const Deterministic& d) { return json{{"kind", "deterministic"}, {"value", d.value}}; },
          [](const Categorical& d) { return json{{"kind", "categorical"}, {"probs", d.probs}}; },
      },
      spec);
}

DistSpec dist_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw std::invalid_argument("distribution JSON needs a \"kind\" field");
  }
  auto num = [&j](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw std::invalid_argument(std::string("distribution JSON missing numeric \"") + key +
                                  "\"");
    }
    return j.at(key).get<double>();
  };
  const auto kind = j.at("kind").get<std::string>();
  DistSpec spec;
  if (kind == "bernoulli") {
    spec = Bernoulli{num("p")};
  } else if (kind == "geom_plus") {
    spec = GeomPlus{num("alpha")};
  } else if (kind == "geom_zero") {
    spec = GeomZero{num("alpha")};
  } else if (kind == "ber_geom") {
    spec = BerGeom{num("p"), num("alpha")};
  } else if (kind == "exp") {
    spec = Exponential{num("rate")};
  } else if (kind == "ber_exp") {
    spec = BerExp{num("p"), num("rate")};
  } else if (kind == "deterministic") {
    spec = Deterministic{num("value")};
  } else if (kind == "categorical") {
    if (!j.contains("probs") || !j.at("probs").is_array()) {
      throw std::invalid_argument("categorical JSON needs a \"probs\" array");
    }
    spec = Categorical{j.at("probs").get<std::vector<double>>()};
  } else {
    throw std::invalid_argument("unknown distribution kind: " + kind);
  }
  validate(spec);
  return spec;
}

}  // namespace bgq
