#include "bgq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace bgq {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

double gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

TestResult finish(std::string name, double stat, double dof, double level) {
  TestResult r;
  r.name = std::move(name);
  r.statistic = stat;
  r.dof = dof;
  r.p_value = std::clamp(chi_square_sf(stat, dof), 0.0, 1.0);
  r.level = level;
  r.passed = r.p_value >= level;
  return r;
}

template <class T>
Autocorrelation autocorr_impl(std::span<const T> seq, std::size_t lag) {
  const std::size_t n = seq.size();
  if (n <= lag + 1) throw std::invalid_argument("sequence too short for lag");
  double m = 0.0;
  for (auto v : seq) m += static_cast<double>(v);
  m /= static_cast<double>(n);
  double denom = 0.0;
  for (auto v : seq) {
    const double d = static_cast<double>(v) - m;
    denom += d * d;
  }
  if (denom == 0.0) throw std::domain_error("autocorrelation undefined for a constant sequence");
  double num = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) {
    num += (static_cast<double>(seq[i]) - m) * (static_cast<double>(seq[i + lag]) - m);
  }
  return {num / denom, 1.0 / std::sqrt(static_cast<double>(n))};
}

}  // namespace

nlohmann::json to_json(const TestResult& r) {
  return {{"name", r.name},     {"statistic", r.statistic}, {"dof", r.dof},
          {"p_value", r.p_value}, {"level", r.level},       {"passed", r.passed}};
}

EmpiricalPmf::EmpiricalPmf(std::int64_t cutoff)
    : cutoff_(cutoff), counts_(static_cast<std::size_t>(cutoff) + 1, 0) {
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
}

void EmpiricalPmf::add(std::int64_t value) {
  if (value < 0) throw std::invalid_argument("empirical pmf takes nonnegative values");
  ++counts_[static_cast<std::size_t>(std::min(value, cutoff_))];
  ++total_;
}

double EmpiricalPmf::frequency(std::int64_t k) const {
  if (total_ == 0 || k < 0) return 0.0;
  return static_cast<double>(counts_[static_cast<std::size_t>(std::min(k, cutoff_))]) /
         static_cast<double>(total_);
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_series(a, x) : 1.0 - gamma_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_series(a, x) : gamma_continued_fraction(a, x);
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi-square needs dof > 0");
  if (statistic <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

PooledCells pool_from_tail(std::span<const double> observed, std::span<const double> expected,
                           double min_expected) {
  if (observed.size() != expected.size()) {
    throw std::invalid_argument("observed/expected size mismatch");
  }
  PooledCells out;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t i = observed.size(); i-- > 0;) {
    acc_o += observed[i];
    acc_e += expected[i];
    if (acc_e >= min_expected) {
      out.observed.push_back(acc_o);
      out.expected.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_o > 0.0 || acc_e > 0.0) {
    if (out.observed.empty()) {
      out.observed.push_back(acc_o);
      out.expected.push_back(acc_e);
    } else {
      out.observed.back() += acc_o;
      out.expected.back() += acc_e;
    }
  }
  std::reverse(out.observed.begin(), out.observed.end());
  std::reverse(out.expected.begin(), out.expected.end());
  return out;
}

TestResult chi_square_cells(std::string name, std::span<const double> observed,
                            std::span<const double> probabilities, double level,
                            int fitted_parameters) {
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::vector<double> expected(probabilities.size());
  std::transform(probabilities.begin(), probabilities.end(), expected.begin(),
                 [n](double pr) { return pr * n; });
  const auto pooled = pool_from_tail(observed, expected);
  if (pooled.observed.size() < 2 || pooled.expected.front() < 5.0) {
    throw std::invalid_argument("insufficient counts for chi-square test");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < pooled.observed.size(); ++i) {
    const double d = pooled.observed[i] - pooled.expected[i];
    stat += d * d / pooled.expected[i];
  }
  const double dof = static_cast<double>(pooled.observed.size()) - 1.0 - fitted_parameters;
  if (dof < 1.0) throw std::invalid_argument("insufficient counts for chi-square test");
  return finish(std::move(name), stat, dof, level);
}

TestResult chi_square_gof(const EmpiricalPmf& emp, const std::function<double(std::int64_t)>& pmf,
                          double level, std::string name) {
  const auto& counts = emp.counts();
  std::vector<double> observed(counts.begin(), counts.end());
  std::vector<double> probs(counts.size());
  double head = 0.0;
  for (std::int64_t k = 0; k < emp.cutoff(); ++k) {
    probs[static_cast<std::size_t>(k)] = pmf(k);
    head += probs[static_cast<std::size_t>(k)];
  }
  probs.back() = std::max(0.0, 1.0 - head);
  return chi_square_cells(std::move(name), observed, probs, level);
}

TestResult chi_square_joint_gof(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                                const std::function<double(std::int64_t)>& pmf_x,
                                const std::function<double(std::int64_t)>& pmf_y,
                                std::int64_t cutoff_x, std::int64_t cutoff_y, double level,
                                std::string name) {
  const auto nx = static_cast<std::size_t>(cutoff_x) + 1;
  const auto ny = static_cast<std::size_t>(cutoff_y) + 1;
  auto marginal = [](const std::function<double(std::int64_t)>& f, std::size_t cells) {
    std::vector<double> m(cells);
    double head = 0.0;
    for (std::size_t k = 0; k + 1 < cells; ++k) {
      m[k] = f(static_cast<std::int64_t>(k));
      head += m[k];
    }
    m.back() = std::max(0.0, 1.0 - head);
    return m;
  };
  const auto mx = marginal(pmf_x, nx);
  const auto my = marginal(pmf_y, ny);
  std::vector<double> observed(nx * ny, 0.0), probs(nx * ny, 0.0);
  for (const auto& [x, y] : pairs) {
    const auto i = static_cast<std::size_t>(std::min(x, cutoff_x));
    const auto j = static_cast<std::size_t>(std::min(y, cutoff_y));
    observed[i * ny + j] += 1.0;
  }
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) probs[i * ny + j] = mx[i] * my[j];
  }
  // Order cells by decreasing probability so tail pooling merges the sparse ones.
  std::vector<std::size_t> order(nx * ny);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&probs](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<double> o2, p2;
  for (auto idx : order) {
    o2.push_back(observed[idx]);
    p2.push_back(probs[idx]);
  }
  return chi_square_cells(std::move(name), o2, p2, level);
}

TestResult independence_chi2(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                             std::int64_t cutoff_x, std::int64_t cutoff_y, double level,
                             std::string name) {
  if (pairs.empty()) throw std::invalid_argument("degenerate marginals: no pairs");
  // table[i][j], rows = x cells, columns = y cells
  std::vector<std::vector<double>> table(static_cast<std::size_t>(cutoff_x) + 1,
                                         std::vector<double>(static_cast<std::size_t>(cutoff_y) + 1, 0.0));
  for (const auto& [x, y] : pairs) {
    if (x < 0 || y < 0) throw std::invalid_argument("independence_chi2 takes nonnegative values");
    table[static_cast<std::size_t>(std::min(x, cutoff_x))]
         [static_cast<std::size_t>(std::min(y, cutoff_y))] += 1.0;
  }
  const double n = static_cast<double>(pairs.size());

  auto row_totals = [&] {
    std::vector<double> r(table.size(), 0.0);
    for (std::size_t i = 0; i < table.size(); ++i)
      r[i] = std::accumulate(table[i].begin(), table[i].end(), 0.0);
    return r;
  };
  auto col_totals = [&] {
    std::vector<double> c(table.front().size(), 0.0);
    for (const auto& row : table)
      for (std::size_t j = 0; j < row.size(); ++j) c[j] += row[j];
    return c;
  };
  auto merge_rows = [&](std::size_t a, std::size_t b) {  // b = a + 1
    for (std::size_t j = 0; j < table[a].size(); ++j) table[a][j] += table[b][j];
    table.erase(table.begin() + static_cast<std::ptrdiff_t>(b));
  };
  auto merge_cols = [&](std::size_t a, std::size_t b) {
    for (auto& row : table) {
      row[a] += row[b];
      row.erase(row.begin() + static_cast<std::ptrdiff_t>(b));
    }
  };
  // Neighbour of the sparsest cell: the smaller adjacent one (previous at the tail).
  auto neighbour = [](const std::vector<double>& totals, std::size_t i) {
    if (i == 0) return std::size_t{1};
    if (i + 1 == totals.size()) return i - 1;
    return totals[i - 1] <= totals[i + 1] ? i - 1 : i + 1;
  };

  // Drop empty margins first, then merge until every expected count >= 5.
  for (;;) {
    auto r = row_totals();
    auto c = col_totals();
    if (r.size() < 2 || c.size() < 2) throw std::invalid_argument("degenerate marginals");
    const auto ri = static_cast<std::size_t>(std::min_element(r.begin(), r.end()) - r.begin());
    const auto ci = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    if (r[ri] * c[ci] / n >= 5.0) break;
    // Merge along whichever margin is sparser relative to its size.
    if (r[ri] / n <= c[ci] / n) {
      const auto nb = neighbour(r, ri);
      merge_rows(std::min(ri, nb), std::max(ri, nb));
    } else {
      const auto nb = neighbour(c, ci);
      merge_cols(std::min(ci, nb), std::max(ci, nb));
    }
  }

  const auto r = row_totals();
  const auto c = col_totals();
  double stat = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double e = r[i] * c[j] / n;
      const double d = table[i][j] - e;
      stat += d * d / e;
    }
  }
  const double dof = static_cast<double>((r.size() - 1) * (c.size() - 1));
  return finish(std::move(name), stat, dof, level);
}

TestResult homogeneity_chi2(std::span<const std::int64_t> first,
                            std::span<const std::int64_t> second, double level, std::string name) {
  if (first.empty() || second.empty()) throw std::invalid_argument("homogeneity test needs two samples");
  std::map<std::int64_t, std::pair<double, double>> cells;
  for (auto v : first) cells[v].first += 1.0;
  for (auto v : second) cells[v].second += 1.0;
  std::vector<std::pair<double, double>> ordered;
  ordered.reserve(cells.size());
  for (const auto& [label, c] : cells) ordered.push_back(c);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.first + a.second > b.first + b.second;
  });
  const double n1 = static_cast<double>(first.size());
  const double n2 = static_cast<double>(second.size());
  const double share = std::min(n1, n2) / (n1 + n2);
  // Merge from the sparse end until the smaller sample expects >= 5 per cell.
  std::vector<std::pair<double, double>> pooled;
  std::pair<double, double> acc{0.0, 0.0};
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
    acc.first += it->first;
    acc.second += it->second;
    if ((acc.first + acc.second) * share >= 5.0) {
      pooled.push_back(acc);
      acc = {0.0, 0.0};
    }
  }
  if (acc.first + acc.second > 0.0) {
    if (pooled.empty()) {
      pooled.push_back(acc);
    } else {
      pooled.back().first += acc.first;
      pooled.back().second += acc.second;
    }
  }
  if (pooled.size() < 2) throw std::invalid_argument("insufficient counts for homogeneity test");
  const double n = n1 + n2;
  double stat = 0.0;
  for (const auto& [a, b] : pooled) {
    const double total = a + b;
    const double e1 = total * n1 / n;
    const double e2 = total * n2 / n;
    stat += (a - e1) * (a - e1) / e1 + (b - e2) * (b - e2) / e2;
  }
  return finish(std::move(name), stat, static_cast<double>(pooled.size() - 1), level);
}

double batch_means_stderr(std::span<const double> series, std::size_t batches) {
  if (batches < 2 || series.size() < 2 * batches) {
    throw std::invalid_argument("series too short for batch means");
  }
  const std::size_t len = series.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    means[b] = std::accumulate(series.begin() + static_cast<std::ptrdiff_t>(b * len),
                               series.begin() + static_cast<std::ptrdiff_t>((b + 1) * len), 0.0) /
               static_cast<double>(len);
  }
  return mean_confidence(means).stddev / std::sqrt(static_cast<double>(batches));
}

std::size_t decorrelation_stride(std::span<const double> series, double threshold) {
  const std::size_t cap = std::max<std::size_t>(1, series.size() / 100);
  std::size_t lag = 1;
  while (lag < cap) {
    try {
      if (std::abs(autocorr_impl(series, lag).rho) < threshold) break;
    } catch (const std::domain_error&) {
      break;  // constant series: nothing to decorrelate
    }
    lag *= 2;
  }
  return std::min(lag, cap);
}

Autocorrelation lag_autocorr(std::span<const double> seq, std::size_t lag) {
  return autocorr_impl(seq, lag);
}

Autocorrelation lag_autocorr(std::span<const std::int64_t> seq, std::size_t lag) {
  return autocorr_impl(seq, lag);
}

MeanCi mean_confidence(std::span<const double> values) {
  MeanCi out;
  out.n = values.size();
  if (values.empty()) throw std::invalid_argument("mean_confidence needs at least one value");
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(out.n - 1));
  }
  const double half = 1.959963984540054 * out.stddev / std::sqrt(static_cast<double>(out.n));
  out.lo = out.mean - half;
  out.hi = out.mean + half;
  return out;
}

TestResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf,
                   double level, std::string name) {
  if (sample.empty()) throw std::invalid_argument("ks_test needs a sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  TestResult r;
  r.name = std::move(name);
  r.statistic = d;
  r.dof = n;
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  r.level = level;
  r.passed = r.p_value >= level;
  return r;
}

}  // namespace bgq
