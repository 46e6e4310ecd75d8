#include "bgq/percolation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <numeric>
#include <string>
#include <thread>

#include "bgq/format.hpp"
#include "bgq/tandem.hpp"

namespace bgq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kMaxEnumeratedPaths = 1'000'000;

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    // C(n, i+1) = C(n, i) (n-i) / (i+1); cancel the gcd first so the division is exact.
    const std::uint64_t g = std::gcd(result, i + 1);
    const std::uint64_t factor = (n - i) / ((i + 1) / g);
    result /= g;
    if (result > kMax / factor) return kMax;
    result *= factor;
  }
  return result;
}

void check_query(const WeightField& field, const PathQuery& q) {
  if (q.start_column > q.end_column || q.start_row > q.end_row) {
    throw std::invalid_argument("path query needs start <= end in both coordinates");
  }
  if (q.end_column >= field.columns() || q.end_row >= field.rows()) {
    throw std::invalid_argument("path query outside the field");
  }
}

// Pinned DP over columns given by `column_at`, rows [0, rows).
template <class ColumnFn>
double sweep(std::size_t columns, std::size_t rows, bool pinned, ColumnFn column_at) {
  std::vector<double> best(rows);
  {
    const auto w = column_at(0);
    for (std::size_t r = 0; r < rows; ++r) best[r] = (pinned && r != 0) ? kInf : w[r];
  }
  for (std::size_t c = 1; c < columns; ++c) {
    const auto w = column_at(c);
    double running = kInf;
    for (std::size_t r = 0; r < rows; ++r) {
      running = std::min(running, best[r]);
      best[r] = running + w[r];
    }
  }
  return pinned ? best.back() : *std::min_element(best.begin(), best.end());
}

template <class Fn>
void run_replicas(std::size_t replicas, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replicas)));
  if (threads == 1) {
    for (std::size_t r = 0; r < replicas; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t r = t; r < replicas; r += threads) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

WeightField::WeightField(std::size_t columns, std::size_t rows, double fill)
    : columns_(columns), rows_(rows), weights_(columns * rows, fill) {
  if (columns == 0 || rows == 0) throw std::invalid_argument("field dimensions must be positive");
  if (!(fill >= 0.0)) throw std::invalid_argument("weights must be >= 0");
}

WeightField::WeightField(const std::vector<std::vector<double>>& weights)
    : WeightField(weights.size(), weights.empty() ? 0 : weights.front().size()) {
  for (std::size_t c = 0; c < columns_; ++c) {
    if (weights[c].size() != rows_) throw std::invalid_argument("ragged weight matrix");
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!(weights[c][r] >= 0.0)) throw std::invalid_argument("weights must be >= 0");
      at(c, r) = weights[c][r];
    }
  }
}

double& WeightField::at(std::size_t column, std::size_t row) {
  return weights_[column * rows_ + row];
}

void draw_column(const DistSpec& spec, const RandomStream& stream, std::size_t column,
                 std::span<double> out) {
  auto col = stream.substream(column);
  for (auto& w : out) w = sample(spec, col);
}

WeightField WeightField::random(const DistSpec& spec, std::size_t columns, std::size_t rows,
                                const RandomStream& stream) {
  WeightField field(columns, rows);
  for (std::size_t c = 0; c < columns; ++c) {
    draw_column(spec, stream, c, {field.weights_.data() + c * rows, rows});
  }
  return field;
}

std::uint64_t path_count(const PathQuery& q) {
  const std::uint64_t cols = q.end_column - q.start_column + 1;
  const std::uint64_t height = q.end_row - q.start_row;
  if (!q.pinned) return binomial_saturating(cols + height, height);
  if (cols == 1) return height == 0 ? 1 : 0;
  return binomial_saturating(cols - 2 + height, height);
}

double enumerate_first_passage(const WeightField& field, const PathQuery& q) {
  check_query(field, q);
  if (path_count(q) > kMaxEnumeratedPaths) {
    throw std::invalid_argument("too many paths to enumerate");
  }
  double best = kInf;
  const std::size_t last = q.end_column;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t col,
                                                                   std::size_t row,
                                                                   double acc) {
    acc += field(col, row);
    if (col == last) {
      if (!q.pinned || row == q.end_row) best = std::min(best, acc);
      return;
    }
    for (std::size_t next = row; next <= q.end_row; ++next) walk(col + 1, next, acc);
  };
  if (q.pinned) {
    walk(q.start_column, q.start_row, 0.0);
  } else {
    for (std::size_t r = q.start_row; r <= q.end_row; ++r) walk(q.start_column, r, 0.0);
  }
  return best;
}

double first_passage(const WeightField& field, const PathQuery& q) {
  check_query(field, q);
  const std::size_t rows = q.end_row - q.start_row + 1;
  return sweep(q.end_column - q.start_column + 1, rows, q.pinned, [&](std::size_t c) {
    return field.column(q.start_column + c).subspan(q.start_row, rows);
  });
}

TimeConstantEstimate estimate_time_constant(const DistSpec& weights, double x, std::size_t size,
                                            std::size_t replicas, std::uint64_t seed,
                                            unsigned threads) {
  validate(weights);
  if (!(x > 0.0)) throw std::invalid_argument("aspect ratio must be > 0");
  if (size < 10) throw std::invalid_argument("N must be >= 10");
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  const auto columns = static_cast<std::size_t>(std::floor(x * static_cast<double>(size))) + 1;
  const std::size_t rows = size + 1;
  const RandomStream root(seed);

  TimeConstantEstimate out;
  out.x = x;
  out.size = size;
  out.replicas = replicas;
  out.seed = seed;
  out.samples.assign(replicas, 0.0);
  run_replicas(replicas, threads, [&](std::size_t r) {
    const RandomStream stream = root.substream(r);
    std::vector<double> buf(rows);
    const double f = sweep(columns, rows, true, [&](std::size_t c) {
      draw_column(weights, stream, c, buf);
      return std::span<const double>(buf);
    });
    out.samples[r] = f / static_cast<double>(size);
  });
  out.estimate = mean_confidence(out.samples);
  return out;
}

JumpField JumpField::poisson(std::size_t rows, double horizon, const DistSpec& weights,
                             const RandomStream& stream) {
  validate(weights);
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  JumpField field;
  field.horizon = horizon;
  field.rows.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto rs = stream.substream(r);
    double t = 0.0;
    for (;;) {
      t += -std::log(rs.uniform());
      if (t > horizon) break;
      field.rows[r].push_back({t, sample(weights, rs)});
    }
  }
  validate(field);
  return field;
}

void validate(const JumpField& field) {
  for (const auto& row : field.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!(row[i].weight > 0.0)) throw std::invalid_argument("jump weights must be > 0");
      if (i > 0 && !(row[i].time > row[i - 1].time)) {
        throw std::invalid_argument("jump times must increase strictly within a row");
      }
    }
  }
}

double continuous_first_passage(const JumpField& field, double s, double t, std::size_t first_row,
                                std::size_t last_row) {
  if (!(s < t) || s < 0.0) throw std::invalid_argument("need 0 <= s < t");
  if (first_row > last_row || last_row >= field.rows.size()) {
    throw std::invalid_argument("row range outside the field");
  }
  // Distinct event times in (s, t] over the rows used; gap g lies between
  // times[g-1] and times[g] (times[-1] = s, times[M] = t).
  std::vector<double> times;
  for (std::size_t r = first_row; r <= last_row; ++r) {
    for (const auto& e : field.rows[r]) {
      if (e.time > s && e.time <= t) times.push_back(e.time);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::size_t M = times.size();
  // A switch may sit in gap M only when that gap is a nonempty interval.
  auto allowed = [&](std::size_t g) { return g < M || M == 0 || times.back() < t; };

  // prefix[g] = row weight at times <= times[g-1], g = 0..M
  auto prefix = [&](std::size_t r) {
    std::vector<double> p(M + 1, 0.0);
    for (const auto& e : field.rows[r]) {
      if (e.time > s && e.time <= t) {
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(times.begin(), times.end(), e.time) - times.begin());
        p[idx + 1] += e.weight;
      }
    }
    for (std::size_t g = 1; g <= M; ++g) p[g] += p[g - 1];
    return p;
  };

  std::vector<double> value = prefix(first_row);
  for (std::size_t r = first_row + 1; r <= last_row; ++r) {
    const auto p = prefix(r);
    double best = kInf;
    for (std::size_t g = 0; g <= M; ++g) {
      if (allowed(g)) best = std::min(best, value[g] - p[g]);
      value[g] = best + p[g];
    }
  }
  return value[M];
}

TimeConstantEstimate estimate_continuous_time_constant(const DistSpec& weights, double y,
                                                       std::size_t size, std::size_t replicas,
                                                       std::uint64_t seed) {
  if (!(y > 0.0)) throw std::invalid_argument("y must be > 0");
  if (replicas < 1 || size < 1) throw std::invalid_argument("need size, replicas >= 1");
  const double horizon = std::floor(y * static_cast<double>(size));
  const RandomStream root(seed);
  TimeConstantEstimate out;
  out.x = y;
  out.size = size;
  out.replicas = replicas;
  out.seed = seed;
  for (std::size_t r = 0; r < replicas; ++r) {
    const auto field = JumpField::poisson(size + 1, horizon, weights, root.substream(r));
    out.samples.push_back(continuous_first_passage(field, 0.0, horizon, 0, size) /
                          static_cast<double>(size));
  }
  out.estimate = mean_confidence(out.samples);
  return out;
}

IdentityInstance tandem_identity_instance(std::span<const Count> arrivals,
                                          const std::vector<std::vector<Count>>& services) {
  const std::size_t L = arrivals.size();
  const std::size_t R = services.size();
  if (R == 0) throw std::invalid_argument("identity needs at least one stage");
  for (const auto& s : services) {
    if (s.size() != L) throw std::invalid_argument("service sequences must match the window");
  }
  IdentityInstance out;
  const auto tandem = tandem_from_inputs(arrivals, services);
  for (const auto& stage : tandem.stages) out.queue_total += stage.final_queue();

  if (L == 0) return out;
  WeightField field(L, R);
  for (std::size_t n = 0; n < L; ++n) {
    for (std::size_t r = 0; r < R; ++r) field.at(n, r) = static_cast<double>(services[r][n]);
  }
  Count best = 0;  // t = L: empty window
  Count arrived = 0;
  for (std::size_t t = L; t-- > 0;) {
    arrived += arrivals[t];
    const double f = first_passage(field, PathQuery{t, 0, L - 1, R - 1, false});
    best = std::max(best, arrived - static_cast<Count>(std::llround(f)));
  }
  out.variational = best;
  return out;
}

IdentityReport tandem_identity_check(const DistSpec& arrival, const std::vector<DistSpec>& services,
                                     std::size_t window, std::size_t instances,
                                     RandomStream& stream) {
  validate(arrival);
  for (const auto& s : services) validate(s);
  IdentityReport report;
  report.stages = services.size();
  report.window = window;
  std::vector<Count> a(window);
  std::vector<std::vector<Count>> s(services.size(), std::vector<Count>(window));
  for (std::size_t i = 0; i < instances; ++i) {
    for (std::size_t n = 0; n < window; ++n) {
      a[n] = sample_count(arrival, stream);
      for (std::size_t r = 0; r < services.size(); ++r) s[r][n] = sample_count(services[r], stream);
    }
    ++report.instances;
    if (!tandem_identity_instance(a, s).equal()) ++report.failures;
  }
  return report;
}

nlohmann::json to_json(const IdentityReport& report) {
  return {{"instances", report.instances}, {"failures", report.failures},
          {"stages", report.stages},       {"window", report.window},
          {"passed", report.passed()}};
}

nlohmann::json to_json(const TimeConstantEstimate& e) {
  return {{"x", e.x},
          {"N", e.size},
          {"mean", e.estimate.mean},
          {"ci_lo", e.estimate.lo},
          {"ci_hi", e.estimate.hi},
          {"replicas", e.replicas},
          {"seed", e.seed}};
}

void write_field_csv(std::ostream& out, const WeightField& field) {
  const ClassicLocaleScope classic(out);
  for (std::size_t c = 0; c < field.columns(); ++c) {
    for (std::size_t r = 0; r < field.rows(); ++r) {
      if (r > 0) out << ',';
      out << format_double(field(c, r));
    }
    out << '\n';
  }
}

WeightField read_field_csv(std::istream& in) {
  std::vector<std::vector<double>> cols;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const auto res = std::from_chars(line.data() + pos, line.data() + comma, v);
      if (res.ec != std::errc{} || res.ptr != line.data() + comma) {
        throw std::invalid_argument("malformed field CSV value: " + line.substr(pos, comma - pos));
      }
      row.push_back(v);
      pos = comma + 1;
    }
    cols.push_back(std::move(row));
  }
  if (cols.empty()) throw std::invalid_argument("empty field CSV");
  for (const auto& c : cols) {
    for (double v : c) {
      if (!(v >= 0.0)) throw std::invalid_argument("weights must be >= 0");
    }
  }
  return WeightField(cols);
}

void write_estimate_csv_header(std::ostream& out) { out << "x,N,mean,ci_lo,ci_hi,replicas,seed\n"; }

void write_estimate_csv_row(std::ostream& out, const TimeConstantEstimate& e) {
  const ClassicLocaleScope classic(out);
  out << format_double(e.x) << ',' << e.size << ',' << format_double(e.estimate.mean) << ','
      << format_double(e.estimate.lo) << ',' << format_double(e.estimate.hi) << ',' << e.replicas
      << ',' << e.seed << '\n';
}

}  // namespace bgq
