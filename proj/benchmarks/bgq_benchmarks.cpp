#include <benchmark/benchmark.h>

#include "bgq/percolation.hpp"
#include "bgq/queue.hpp"
#include "bgq/tandem.hpp"
#include "bgq/time_constants.hpp"

namespace {

using namespace bgq;

const QueueParams kRef{1.0 / 3.0, 2.0 / 3.0, 0.5, 0.5};

void BM_SimulateQueue(benchmark::State& state) {
  const auto slots = static_cast<std::size_t>(state.range(0));
  RandomStream stream(1);
  for (auto _ : state) {
    auto t = simulate(kRef.arrival(), kRef.service(), slots, 0, stream);
    benchmark::DoNotOptimize(t.slots.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateQueue)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_SimulateTandem(benchmark::State& state) {
  const auto cfg = TandemConfig::ber_geom(kRef.p, kRef.alpha, kRef.q, kRef.beta, 4);
  RandomStream stream(2);
  for (auto _ : state) {
    auto t = simulate_tandem(cfg, 100000, stream);
    benchmark::DoNotOptimize(t.stages.data());
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SimulateTandem)->Unit(benchmark::kMillisecond);

void BM_MarkovOracle(benchmark::State& state) {
  for (auto _ : state) {
    auto r = markov_oracle(kRef.arrival(), kRef.service(), static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(r.pi.data());
  }
}
BENCHMARK(BM_MarkovOracle)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FirstPassage(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto field = WeightField::random(Exponential{1.0}, 3 * n, n, RandomStream(3));
  const PathQuery query{0, 0, 3 * n - 1, n - 1};
  for (auto _ : state) benchmark::DoNotOptimize(first_passage(field, query));
  state.SetItemsProcessed(state.iterations() * 3 * state.range(0) * state.range(0));
}
BENCHMARK(BM_FirstPassage)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_EstimateTimeConstant(benchmark::State& state) {
  for (auto _ : state) {
    auto e = estimate_time_constant(Exponential{1.0}, 3.0, 400, 10, 4, 1);
    benchmark::DoNotOptimize(e.estimate.mean);
  }
}
BENCHMARK(BM_EstimateTimeConstant)->Unit(benchmark::kMillisecond);

void BM_FBerGeom(benchmark::State& state) {
  double x = 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f_bergeom(0.5, 0.3, x));
    x = x < 6.0 ? x + 0.01 : 1.5;
  }
}
BENCHMARK(BM_FBerGeom);

void BM_FLegendre(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(f_legendre(0.5, 0.3, 3.0));
}
BENCHMARK(BM_FLegendre);

}  // namespace
BENCHMARK_MAIN();
