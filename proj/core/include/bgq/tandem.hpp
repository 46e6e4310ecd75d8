#pragma once

// R batch queues in series. Departures of stage r-1 in slot n are the
// arrivals of stage r in the same slot n.

#include <ostream>
#include <vector>

#include "bgq/queue.hpp"
#include "bgq/stats.hpp"

namespace bgq {

struct TandemConfig {
  DistSpec arrival;
  std::vector<DistSpec> services;  // one per stage

  std::size_t stages() const { return services.size(); }

  // Homogeneous Ber-Geom tandem.
  static TandemConfig ber_geom(double p, double alpha, double q, double beta, std::size_t stages);
};

// Throws std::invalid_argument for an empty tandem, an invalid law, or, when
// every law is Ber-Geom, a stage off the condition curve of the arrivals or
// an unstable stage.
void validate(const TandemConfig& config);

struct TandemTrace {
  std::vector<Trace> stages;

  std::size_t size() const { return stages.empty() ? 0 : stages.front().size(); }
};

// Stage order within a slot: stage 1 arrival, stage 1 service, its departures
// join stage 2 in the same slot, and so on. All queues start empty.
TandemTrace simulate_tandem(const TandemConfig& config, std::size_t n_slots, RandomStream& stream);

// Deterministic variant driven by given inputs (services[r] for stage r).
TandemTrace tandem_from_inputs(std::span<const Count> arrivals,
                               const std::vector<std::vector<Count>>& services);

// True iff A(r)_n = D(r-1)_n at every slot and stage.
bool feed_forward_holds(const TandemTrace& trace);

struct ProductFormReport {
  std::vector<TestResult> marginals;     // X(r) against the stationary law
  std::vector<TestResult> cross_stage;   // X(r)_n vs X(r+1)_n
  std::vector<TestResult> staggered_y;   // Y(r)_n vs Y(r+1)_{n-1}
  std::size_t stride = 1;                // subsampling stride used by every test
  bool passed() const;
};

// Product-form checks on the stationary part of a trace (`burn_in` slots are
// skipped). Queue lengths are serially dependent, so every test uses the
// slots burn_in, burn_in + stride, ... with stride = the largest
// decorrelation_stride of the stage queue-length series. Each test runs at
// level / (number of tests). Queue-length cells are pooled at 8. Requires >= 1e5 slots after burn-in, otherwise throws
// std::invalid_argument("trace too short").
ProductFormReport verify_product_form(const TandemTrace& trace, const StationaryLaw& law,
                                      std::size_t burn_in, double level = 0.01);

nlohmann::json to_json(const ProductFormReport& report);

// Columns n, X1..XR, D1..DR.
void write_tandem_csv(std::ostream& out, const TandemTrace& trace);

}  // namespace bgq
