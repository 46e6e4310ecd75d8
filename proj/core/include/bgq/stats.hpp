#pragma once

// Goodness-of-fit, independence and autocorrelation tests used by the
// verification suites. p-values come from the regularized incomplete gamma
// function implemented here; no statistics library is required.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace bgq {

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  double level = 0.01;
  bool passed = true;
};

nlohmann::json to_json(const TestResult& r);

// Counts of the values 0..cutoff-1 plus one pooled cell for values >= cutoff.
class EmpiricalPmf {
 public:
  explicit EmpiricalPmf(std::int64_t cutoff);

  template <class Range>
  EmpiricalPmf(std::int64_t cutoff, const Range& values) : EmpiricalPmf(cutoff) {
    for (auto v : values) add(static_cast<std::int64_t>(v));
  }

  void add(std::int64_t value);

  std::int64_t cutoff() const { return cutoff_; }
  std::int64_t total() const { return total_; }
  // Size cutoff + 1; the last entry is the pooled tail.
  const std::vector<std::int64_t>& counts() const { return counts_; }
  double frequency(std::int64_t k) const;

 private:
  std::int64_t cutoff_;
  std::int64_t total_ = 0;
  std::vector<std::int64_t> counts_;
};

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
// Series for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

// Kolmogorov limiting survival function Q_KS(lambda).
double kolmogorov_sf(double lambda);

// Merges adjacent cells, walking from the last cell towards the first, until
// each merged cell has expected count >= min_expected. A leftover head group
// is folded into the nearest emitted cell. Output cells are in original order.
struct PooledCells {
  std::vector<double> observed;
  std::vector<double> expected;
};
PooledCells pool_from_tail(std::span<const double> observed, std::span<const double> expected,
                           double min_expected = 5.0);

// Pearson chi-square of observed counts against cell probabilities.
// dof = pooled cells - 1 - fitted_parameters. Throws std::invalid_argument
// ("insufficient counts") when fewer than two cells survive pooling.
TestResult chi_square_cells(std::string name, std::span<const double> observed,
                            std::span<const double> probabilities, double level = 0.01,
                            int fitted_parameters = 0);

TestResult chi_square_gof(const EmpiricalPmf& emp, const std::function<double(std::int64_t)>& pmf,
                          double level = 0.01, std::string name = "chi_square_gof");

// Goodness of fit of observed pairs against the product law pmf_x (x) pmf_y,
// each coordinate tail-pooled at its cutoff.
TestResult chi_square_joint_gof(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                                const std::function<double(std::int64_t)>& pmf_x,
                                const std::function<double(std::int64_t)>& pmf_y,
                                std::int64_t cutoff_x, std::int64_t cutoff_y,
                                double level = 0.01, std::string name = "chi_square_joint_gof");

// Contingency-table independence test. Values at or above a cutoff share one
// cell; sparse rows/columns are then merged with a neighbour until every
// expected count is >= 5. Intended for >= 1e5 pairs. Throws
// std::invalid_argument("degenerate marginals") if a margin collapses to one cell.
TestResult independence_chi2(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                             std::int64_t cutoff_x, std::int64_t cutoff_y, double level = 0.01,
                             std::string name = "independence_chi2");

struct Autocorrelation {
  double rho = 0.0;
  double standard_error = 0.0;  // 1/sqrt(n)
};

// Sample autocorrelation at `lag`. Throws std::domain_error for a constant sequence.
Autocorrelation lag_autocorr(std::span<const double> seq, std::size_t lag);
Autocorrelation lag_autocorr(std::span<const std::int64_t> seq, std::size_t lag);

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

// Two-sample homogeneity test over category labels. Categories are ordered by
// pooled frequency and the sparse tail is merged until every expected count is >= 5.
TestResult homogeneity_chi2(std::span<const std::int64_t> first,
                            std::span<const std::int64_t> second, double level = 0.01,
                            std::string name = "homogeneity_chi2");

// Standard error of the mean of a correlated series from `batches` batch means.
double batch_means_stderr(std::span<const double> series, std::size_t batches = 100);

// Subsampling stride for a serially dependent series: the first lag in
// 1, 2, 4, ... at which |autocorrelation| < threshold (capped at n/100).
// Pearson tests assume independent draws, so dependent series are thinned
// to every stride-th value before testing.
std::size_t decorrelation_stride(std::span<const double> series, double threshold = 0.01);

// Sample mean with a normal-approximation 95% interval.
MeanCi mean_confidence(std::span<const double> values);

// One-sample Kolmogorov-Smirnov test against a continuous cdf.
TestResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf,
                   double level = 0.01, std::string name = "ks_test");

inline double bonferroni(double level, std::size_t tests) {
  return tests == 0 ? level : level / static_cast<double>(tests);
}

}  // namespace bgq
