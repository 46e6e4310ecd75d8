#pragma once

// Time constants f(x) = lim F((0,0),(xN,N))/N of directed first-passage
// percolation with i.i.d. site weights, and their continuous-time analogues
// f~(y). Variational forms are maximized numerically and clamped at 0, which
// is also how the flat region (f = 0) is produced.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bgq {

struct TimeConstant {
  double value = 0.0;
  double maximizer = 0.0;  // argument of the supremum (boundary when clamped)
};

// Mean stationary queue length at arrival intensity lambda for Ber(q)Geom(beta)
// service, on the condition curve. Both closed forms are evaluated and must
// agree to 1e-10 (relative); the one written in p is returned, being the
// accurate one as lambda -> 0. Throws std::domain_error outside (0, q/beta).
double h_of_lambda(double q, double beta, double lambda);

// Ber(q)Geom(beta) weights, sup over p in (0, q).
TimeConstant f_bergeom(double q, double beta, double x);
// Same constant, sup over alpha in (beta, 1).
TimeConstant f_bergeom_alpha(double q, double beta, double x);
// Same constant as sup over lambda in (0, q/beta) of lambda x - h(lambda).
TimeConstant f_legendre(double q, double beta, double x);

double f_bernoulli(double q, double x);
double f_geometric(double beta, double x);  // GeomZero(beta) weights
double f_exponential(double x);             // Exp(1) weights

// Ber(q)Exp(1) weights, sup over r in (0, 1).
TimeConstant f_berexp(double q, double x);

// Continuous time, rate-1 events with GeomPlus(beta) weights.
TimeConstant ftilde_geom(double beta, double y);
// Continuous time, Exp(1) weights: variational form and the root of 2ys^2 - s - 1 = 0.
TimeConstant ftilde_exp(double y);
double ftilde_exp_closed(double y);
// Continuous time, unit weights.
double ftilde_poisson(double y);

enum class Variant { ber, geom, exp, ber_geom, ber_exp, cont_geom, cont_exp, cont_poisson, legendre };

Variant parse_variant(const std::string& name);  // throws std::invalid_argument
std::string variant_name(Variant v);

struct TimeConstantQuery {
  Variant variant = Variant::exp;
  double q = 0.5;
  double beta = 0.5;
  double abscissa = 1.0;
};

// Checks parameter ranges for the variant (q, beta in (0,1) where used, abscissa > 0).
void validate(const TimeConstantQuery& query);

struct CurvePoint {
  double abscissa = 0.0;
  double value = 0.0;
  std::optional<double> maximizer;
};

CurvePoint evaluate(const TimeConstantQuery& query);

struct CurveResult {
  Variant variant = Variant::exp;
  double q = 0.5;
  double beta = 0.5;
  std::vector<CurvePoint> points;

  std::string params() const;  // e.g. "q=0.5;beta=0.5"
};

// Throws std::invalid_argument on an empty grid.
CurveResult curve(Variant variant, double q, double beta, const std::vector<double>& grid);

// Header variant,params,x,f,maximizer; the maximizer cell is empty for closed forms.
void write_curve_csv(std::ostream& out, const CurveResult& curve);
nlohmann::json to_json(const CurveResult& curve);

}  // namespace bgq
