#include "bgq/tandem.hpp"

#include <algorithm>
#include <stdexcept>

#include "bgq/format.hpp"

namespace bgq {
namespace {

constexpr Count kQueueCells = 8;
constexpr std::size_t kMinStationarySlots = 100'000;

}  // namespace

TandemConfig TandemConfig::ber_geom(double p, double alpha, double q, double beta,
                                    std::size_t stages) {
  return {BerGeom{p, alpha}, std::vector<DistSpec>(stages, BerGeom{q, beta})};
}

void validate(const TandemConfig& config) {
  if (config.services.empty()) throw std::invalid_argument("tandem needs at least one stage");
  validate(config.arrival);
  for (const auto& s : config.services) validate(s);
  const auto* arr = std::get_if<BerGeom>(&config.arrival);
  if (arr == nullptr) return;
  for (const auto& s : config.services) {
    const auto* srv = std::get_if<BerGeom>(&s);
    if (srv == nullptr) continue;
    const QueueParams params{arr->p, arr->alpha, srv->p, srv->alpha};
    if (!is_stable(params)) throw std::invalid_argument("tandem stage is unstable");
    if (!condition_holds(params)) {
      throw std::invalid_argument("tandem stage is off the condition curve of the arrivals");
    }
  }
}

TandemTrace tandem_from_inputs(std::span<const Count> arrivals,
                               const std::vector<std::vector<Count>>& services) {
  TandemTrace out;
  out.stages.reserve(services.size());
  std::vector<Count> feed(arrivals.begin(), arrivals.end());
  for (const auto& s : services) {
    out.stages.push_back(trace_from_inputs<Count>(feed, s));
    const auto& slots = out.stages.back().slots;
    for (std::size_t n = 0; n < slots.size(); ++n) feed[n] = slots[n].departures;
  }
  return out;
}

TandemTrace simulate_tandem(const TandemConfig& config, std::size_t n_slots,
                            RandomStream& stream) {
  validate(config);
  if (n_slots < 1) throw std::invalid_argument("n_slots must be >= 1");
  const std::size_t R = config.stages();
  // Draw slot by slot: A_n, then S(1)_n .. S(R)_n.
  std::vector<Count> arrivals(n_slots);
  std::vector<std::vector<Count>> services(R, std::vector<Count>(n_slots));
  for (std::size_t n = 0; n < n_slots; ++n) {
    arrivals[n] = sample_count(config.arrival, stream);
    for (std::size_t r = 0; r < R; ++r) services[r][n] = sample_count(config.services[r], stream);
  }
  auto out = tandem_from_inputs(arrivals, services);
  for (std::size_t r = 0; r < R; ++r) {
    out.stages[r].seed = stream.seed();
    out.stages[r].service = config.services[r];
  }
  out.stages.front().arrival = config.arrival;
  return out;
}

bool feed_forward_holds(const TandemTrace& trace) {
  for (std::size_t r = 1; r < trace.stages.size(); ++r) {
    const auto& up = trace.stages[r - 1].slots;
    const auto& down = trace.stages[r].slots;
    if (up.size() != down.size()) return false;
    for (std::size_t n = 0; n < up.size(); ++n) {
      if (down[n].arrivals != up[n].departures) return false;
    }
  }
  return true;
}

bool ProductFormReport::passed() const {
  auto ok = [](const std::vector<TestResult>& v) {
    return std::all_of(v.begin(), v.end(), [](const TestResult& t) { return t.passed; });
  };
  return ok(marginals) && ok(cross_stage) && ok(staggered_y);
}

ProductFormReport verify_product_form(const TandemTrace& trace, const StationaryLaw& law,
                                      std::size_t burn_in, double level) {
  const std::size_t R = trace.stages.size();
  if (R == 0) throw std::invalid_argument("empty tandem trace");
  const std::size_t n = trace.size();
  if (n <= burn_in || n - burn_in < kMinStationarySlots) {
    throw std::invalid_argument("trace too short: need >= 1e5 slots after burn-in");
  }
  const std::size_t tests = R + 2 * (R - 1);
  const double each = bonferroni(level, tests);

  ProductFormReport report;
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> x;
    x.reserve(n - burn_in);
    for (std::size_t k = burn_in; k < n; ++k) {
      x.push_back(static_cast<double>(trace.stages[r].slots[k].queue_before));
    }
    report.stride = std::max(report.stride, decorrelation_stride(x));
  }
  const std::size_t stride = report.stride;
  const std::size_t first = std::max<std::size_t>(burn_in, 1);

  for (std::size_t r = 0; r < R; ++r) {
    EmpiricalPmf emp(kQueueCells);
    for (std::size_t k = first; k < n; k += stride) emp.add(trace.stages[r].slots[k].queue_before);
    report.marginals.push_back(chi_square_gof(
        emp, [&law](Count k) { return law.pmf_x(k); }, each,
        "stage" + std::to_string(r + 1) + "_queue_marginal"));
  }
  for (std::size_t r = 0; r + 1 < R; ++r) {
    std::vector<std::pair<Count, Count>> same_slot, staggered;
    for (std::size_t k = first; k < n; k += stride) {
      same_slot.emplace_back(trace.stages[r].slots[k].queue_before,
                             trace.stages[r + 1].slots[k].queue_before);
      staggered.emplace_back(trace.stages[r].slots[k].queue_after,
                             trace.stages[r + 1].slots[k - 1].queue_after);
    }
    const auto tag = std::to_string(r + 1) + "_" + std::to_string(r + 2);
    report.cross_stage.push_back(
        independence_chi2(same_slot, kQueueCells, kQueueCells, each, "queue_independence_" + tag));
    report.staggered_y.push_back(independence_chi2(staggered, kQueueCells, kQueueCells, each,
                                                   "staggered_after_arrival_" + tag));
  }
  return report;
}

nlohmann::json to_json(const ProductFormReport& report) {
  auto list = [](const std::vector<TestResult>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : v) arr.push_back(to_json(t));
    return arr;
  };
  return {{"marginals", list(report.marginals)},
          {"cross_stage", list(report.cross_stage)},
          {"staggered_y", list(report.staggered_y)},
          {"stride", report.stride},
          {"passed", report.passed()}};
}

void write_tandem_csv(std::ostream& out, const TandemTrace& trace) {
  const ClassicLocaleScope classic(out);
  const std::size_t R = trace.stages.size();
  out << 'n';
  for (std::size_t r = 1; r <= R; ++r) out << ",X" << r;
  for (std::size_t r = 1; r <= R; ++r) out << ",D" << r;
  out << '\n';
  for (std::size_t n = 0; n < trace.size(); ++n) {
    out << n;
    for (std::size_t r = 0; r < R; ++r) out << ',' << trace.stages[r].slots[n].queue_before;
    for (std::size_t r = 0; r < R; ++r) out << ',' << trace.stages[r].slots[n].departures;
    out << '\n';
  }
}

}  // namespace bgq
