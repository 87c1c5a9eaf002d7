#include <benchmark/benchmark.h>

#include "normip/harness.hpp"
#include "normip/kernels.hpp"

using namespace normip;

namespace {

struct Cell {
  ProtocolSpec spec;
  DualPair pair;
};

Cell make_cell(std::size_t n) {
  Rng rng(1);
  return {lp_protocol(Exponent(2), 0.1), random_dual_pair(NormSpec::lp(2.0), n, rng)};
}

void BM_ProtocolTrials(benchmark::State& state, bool parallel) {
  const Cell c = make_cell(static_cast<std::size_t>(state.range(0)));
  const auto trials = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto r = protocol_trials(c.spec, c.pair.v, c.pair.w, trials, 7, 0, parallel);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
  state.counters["threads"] = parallel ? thread_limit() : 1;
}

void BM_SparsifierEstimates(benchmark::State& state, bool parallel) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const NormSpec l15 = NormSpec::lp(1.5);
  const Vector v = random_unit_vector(l15, n, rng);
  std::vector<Vector> ws;
  for (int j = 0; j < 20; ++j) ws.push_back(random_dual_unit_vector(l15, n, rng));
  const auto spec = SparsifierSpec::lp_sampling(Exponent(1.5), 0.1);
  for (auto _ : state) {
    auto r = sparsifier_estimates(spec, v, ws, 500, 7, 0, parallel);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * 500);
}

}  // namespace

BENCHMARK_CAPTURE(BM_ProtocolTrials, serial, false)->Args({1000, 500})->Args({10000, 500})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ProtocolTrials, openmp, true)->Args({1000, 500})->Args({10000, 500})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SparsifierEstimates, serial, false)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SparsifierEstimates, openmp, true)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
