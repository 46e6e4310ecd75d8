#pragma once

// Directed first-passage percolation on the lattice and its continuous-time
// variant.
//
// A directed path from (i, j) to (k, l) visits one site in each column
// i..k with weakly increasing rows. With pinned endpoints its first site is
// (i, j) and its last (k, l); with free endpoints every row lies in [j, l].

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgq/distributions.hpp"
#include "bgq/queue.hpp"
#include "bgq/random.hpp"
#include "bgq/stats.hpp"

namespace bgq {

class WeightField {
 public:
  WeightField(std::size_t columns, std::size_t rows, double fill = 0.0);
  // weights[column][row]
  explicit WeightField(const std::vector<std::vector<double>>& weights);

  // Column c is drawn from stream.substream(c), rows in increasing order.
  static WeightField random(const DistSpec& spec, std::size_t columns, std::size_t rows,
                            const RandomStream& stream);

  std::size_t columns() const { return columns_; }
  std::size_t rows() const { return rows_; }

  double operator()(std::size_t column, std::size_t row) const {
    return weights_[column * rows_ + row];
  }
  double& at(std::size_t column, std::size_t row);

  std::span<const double> column(std::size_t c) const {
    return {weights_.data() + c * rows_, rows_};
  }

 private:
  std::size_t columns_;
  std::size_t rows_;
  std::vector<double> weights_;
};

// Fills `out` (size rows) with column `column` of a field keyed to `stream`.
void draw_column(const DistSpec& spec, const RandomStream& stream, std::size_t column,
                 std::span<double> out);

struct PathQuery {
  std::size_t start_column = 0;
  std::size_t start_row = 0;
  std::size_t end_column = 0;
  std::size_t end_row = 0;
  bool pinned = true;
};

// Number of directed paths for the query (saturates at UINT64_MAX).
std::uint64_t path_count(const PathQuery& query);

// Brute force over every path. Throws std::invalid_argument when there are
// more than 1e6 paths.
double enumerate_first_passage(const WeightField& field, const PathQuery& query);

// Column sweep with running prefix minima over rows, O(columns * rows).
// Returns +inf when no path exists (pinned, one column, start_row != end_row).
double first_passage(const WeightField& field, const PathQuery& query);

struct TimeConstantEstimate {
  double x = 0.0;
  std::size_t size = 0;  // N
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  MeanCi estimate;       // of F((0,0),(floor(xN), N)) / N
  std::vector<double> samples;
};

// Replica r uses RandomStream(seed).substream(r); fields are streamed one
// column at a time. Results are merged by replica index, so the output does
// not depend on `threads`.
TimeConstantEstimate estimate_time_constant(const DistSpec& weights, double x, std::size_t size,
                                            std::size_t replicas, std::uint64_t seed,
                                            unsigned threads = 1);

struct JumpEvent {
  double time = 0.0;
  double weight = 0.0;
};

// Per-row jump processes on [0, horizon].
struct JumpField {
  std::vector<std::vector<JumpEvent>> rows;
  double horizon = 0.0;

  // Rate-1 Poisson event times with i.i.d. weights; row r uses stream.substream(r).
  static JumpField poisson(std::size_t rows, double horizon, const DistSpec& weights,
                           const RandomStream& stream);
};

// Throws std::invalid_argument unless each row's times increase strictly and weights are > 0.
void validate(const JumpField& field);

// inf over s = u_j < ... < u_{l+1} = t of sum_r [S^r(u_{r+1}) - S^r(u_r)],
// where S^r(u) is the total weight of row-r events at times <= u. Switch
// points only matter through the gap between events they fall in, so this is
// a DP over the merged event list.
double continuous_first_passage(const JumpField& field, double s, double t, std::size_t first_row,
                                std::size_t last_row);

TimeConstantEstimate estimate_continuous_time_constant(const DistSpec& weights, double y,
                                                       std::size_t size, std::size_t replicas,
                                                       std::uint64_t seed);

// Queue-length identity for R tandem queues started empty at the beginning
// of a window of L slots:
//   sum_r X(r) at the window end
//     = max over 0 <= t <= L of ( sum_{n=t}^{L-1} A_n - F_t ),
// F_t = first-passage weight over columns t..L-1 with services as weights
// (service of stage r in slot n at site (n, r)) and rows free within 1..R;
// F_L = 0.
struct IdentityInstance {
  Count queue_total = 0;  // left side, from the tandem
  Count variational = 0;  // right side, from percolation
  bool equal() const { return queue_total == variational; }
};

IdentityInstance tandem_identity_instance(std::span<const Count> arrivals,
                                          const std::vector<std::vector<Count>>& services);

struct IdentityReport {
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::size_t stages = 0;
  std::size_t window = 0;
  bool passed() const { return failures == 0; }
};

IdentityReport tandem_identity_check(const DistSpec& arrival, const std::vector<DistSpec>& services,
                                     std::size_t window, std::size_t instances,
                                     RandomStream& stream);

nlohmann::json to_json(const IdentityReport& report);
nlohmann::json to_json(const TimeConstantEstimate& estimate);

// Field CSV: one line per column, comma-separated row weights.
void write_field_csv(std::ostream& out, const WeightField& field);
WeightField read_field_csv(std::istream& in);

// Header x,N,mean,ci_lo,ci_hi,replicas,seed.
void write_estimate_csv_header(std::ostream& out);
void write_estimate_csv_row(std::ostream& out, const TimeConstantEstimate& estimate);

}  // namespace bgq
