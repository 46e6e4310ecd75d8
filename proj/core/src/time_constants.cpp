#include "bgq/time_constants.hpp"

#include <cmath>
#include <stdexcept>

#include "bgq/format.hpp"
#include "bgq/optimize.hpp"
#include "bgq/queue.hpp"

namespace bgq {
namespace {

void require_probability(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0,1)");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

TimeConstant clamp_sup(const std::function<double(double)>& objective, double lo, double hi) {
  const auto m = maximize_unimodal(objective, lo, hi);
  if (m.value <= 0.0) return {0.0, lo};
  return {m.value, m.argmax};
}

double square(double v) { return v * v; }

}  // namespace

double h_of_lambda(double q, double beta, double lambda) {
  const auto [p, alpha] = solve_arrival(q, beta, lambda);
  const double h1 = beta / (alpha - beta) * (1.0 - alpha) / alpha;
  const double h2 = p / (1.0 - p) * (1.0 - q) / q * (p * (1.0 - q) / (beta * (q - p)) + 1.0);
  if (std::abs(h1 - h2) > 1e-10 * std::max(1.0, std::abs(h1))) {
    throw std::logic_error("h(lambda) closed forms disagree");
  }
  // h2 is built from p = lambda alpha and keeps full relative accuracy as
  // lambda -> 0, where h1 loses digits through 1 - alpha.
  return h2;
}

TimeConstant f_bergeom(double q, double beta, double x) {
  require_probability(q, "q");
  require_probability(beta, "beta");
  require_positive(x, "x");
  const double scale = 1.0 / (beta * q);
  return clamp_sup(
      [=](double p) {
        return scale * p * (p * (1.0 - q) + (q - p) * beta) / (1.0 - p) *
               (x - (1.0 - q) / (q - p));
      },
      0.0, q);
}

TimeConstant f_bergeom_alpha(double q, double beta, double x) {
  require_probability(q, "q");
  require_probability(beta, "beta");
  require_positive(x, "x");
  return clamp_sup(
      [=](double alpha) {
        return beta * (1.0 - alpha) / alpha *
               (q * x / (alpha * (1.0 - beta - q) + beta * q) - 1.0 / (alpha - beta));
      },
      beta, 1.0);
}

TimeConstant f_legendre(double q, double beta, double x) {
  require_probability(q, "q");
  require_probability(beta, "beta");
  require_positive(x, "x");
  return clamp_sup([=](double lambda) { return lambda * x - h_of_lambda(q, beta, lambda); }, 0.0,
                   q / beta);
}

double f_bernoulli(double q, double x) {
  require_probability(q, "q");
  require_positive(x, "x");
  if (x <= (1.0 - q) / q) return 0.0;
  return square(std::sqrt(q * x) - std::sqrt(1.0 - q));
}

double f_geometric(double beta, double x) {
  require_probability(beta, "beta");
  require_positive(x, "x");
  if (x <= beta / (1.0 - beta)) return 0.0;
  return square(std::sqrt(1.0 - beta) * std::sqrt(1.0 + x) - 1.0) / beta;
}

double f_exponential(double x) {
  require_positive(x, "x");
  return square(std::sqrt(1.0 + x) - 1.0);
}

TimeConstant f_berexp(double q, double x) {
  require_probability(q, "q");
  require_positive(x, "x");
  return clamp_sup(
      [=](double r) { return r * r * (q * x / (1.0 - q + r * q) - 1.0 / (1.0 - r)); }, 0.0, 1.0);
}

TimeConstant ftilde_geom(double beta, double y) {
  require_probability(beta, "beta");
  require_positive(y, "y");
  return clamp_sup(
      [=](double alpha) {
        return beta * (1.0 - alpha) / alpha *
               (y / (alpha * (1.0 - beta)) - 1.0 / (alpha - beta));
      },
      beta, 1.0);
}

TimeConstant ftilde_exp(double y) {
  require_positive(y, "y");
  return clamp_sup([=](double r) { return r * r * (y - 1.0 / (1.0 - r)); }, 0.0, 1.0);
}

double ftilde_exp_closed(double y) {
  require_positive(y, "y");
  if (y <= 1.0) return 0.0;
  // Stationary point r = 1 - s with 2 y s^2 - s - 1 = 0.
  const double s = (1.0 + std::sqrt(8.0 * y + 1.0)) / (4.0 * y);
  return square(1.0 - s) * (y - 1.0 / s);
}

double ftilde_poisson(double y) {
  require_positive(y, "y");
  const double root = std::sqrt(y) - 1.0;
  return root > 0.0 ? root * root : 0.0;
}

Variant parse_variant(const std::string& name) {
  if (name == "ber") return Variant::ber;
  if (name == "geom") return Variant::geom;
  if (name == "exp") return Variant::exp;
  if (name == "ber_geom") return Variant::ber_geom;
  if (name == "ber_exp") return Variant::ber_exp;
  if (name == "cont_geom") return Variant::cont_geom;
  if (name == "cont_exp") return Variant::cont_exp;
  if (name == "cont_poisson") return Variant::cont_poisson;
  if (name == "legendre") return Variant::legendre;
  throw std::invalid_argument("unknown time-constant variant: " + name);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::ber: return "ber";
    case Variant::geom: return "geom";
    case Variant::exp: return "exp";
    case Variant::ber_geom: return "ber_geom";
    case Variant::ber_exp: return "ber_exp";
    case Variant::cont_geom: return "cont_geom";
    case Variant::cont_exp: return "cont_exp";
    case Variant::cont_poisson: return "cont_poisson";
    case Variant::legendre: return "legendre";
  }
  return "unknown";
}

namespace {

bool uses_q(Variant v) {
  return v == Variant::ber || v == Variant::ber_geom || v == Variant::ber_exp ||
         v == Variant::legendre;
}

bool uses_beta(Variant v) {
  return v == Variant::geom || v == Variant::ber_geom || v == Variant::cont_geom ||
         v == Variant::legendre;
}

}  // namespace

void validate(const TimeConstantQuery& query) {
  if (uses_q(query.variant)) require_probability(query.q, "q");
  if (uses_beta(query.variant)) require_probability(query.beta, "beta");
  require_positive(query.abscissa, "abscissa");
}

CurvePoint evaluate(const TimeConstantQuery& query) {
  validate(query);
  const double x = query.abscissa;
  auto from = [x](TimeConstant tc) { return CurvePoint{x, tc.value, tc.maximizer}; };
  switch (query.variant) {
    case Variant::ber: return {x, f_bernoulli(query.q, x), std::nullopt};
    case Variant::geom: return {x, f_geometric(query.beta, x), std::nullopt};
    case Variant::exp: return {x, f_exponential(x), std::nullopt};
    case Variant::ber_geom: return from(f_bergeom(query.q, query.beta, x));
    case Variant::ber_exp: return from(f_berexp(query.q, x));
    case Variant::cont_geom: return from(ftilde_geom(query.beta, x));
    case Variant::cont_exp: return from(ftilde_exp(x));
    case Variant::cont_poisson: return {x, ftilde_poisson(x), std::nullopt};
    case Variant::legendre: return from(f_legendre(query.q, query.beta, x));
  }
  throw std::invalid_argument("unknown variant");
}

std::string CurveResult::params() const {
  std::string out;
  if (uses_q(variant)) out += "q=" + format_double(q);
  if (uses_beta(variant)) out += (out.empty() ? "" : ";") + std::string("beta=") + format_double(beta);
  return out;
}

CurveResult curve(Variant variant, double q, double beta, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty abscissa grid");
  CurveResult out{variant, q, beta, {}};
  out.points.reserve(grid.size());
  for (double x : grid) out.points.push_back(evaluate({variant, q, beta, x}));
  return out;
}

void write_curve_csv(std::ostream& out, const CurveResult& c) {
  const ClassicLocaleScope classic(out);
  out << "variant,params,x,f,maximizer\n";
  const auto name = variant_name(c.variant);
  const auto params = c.params();
  for (const auto& pt : c.points) {
    out << name << ',' << params << ',' << format_double(pt.abscissa) << ','
        << format_double(pt.value) << ',';
    if (pt.maximizer) out << format_double(*pt.maximizer);
    out << '\n';
  }
}

nlohmann::json to_json(const CurveResult& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& pt : c.points) {
    nlohmann::json j{{"x", pt.abscissa}, {"f", pt.value}};
    j["maximizer"] = pt.maximizer ? nlohmann::json(*pt.maximizer) : nlohmann::json(nullptr);
    pts.push_back(j);
  }
  return {{"variant", variant_name(c.variant)}, {"params", c.params()}, {"points", pts}};
}

}  // namespace bgq
