// Serial vs OpenMP block kernels on gains of growing size.
//
//   ./bench_kernels --benchmark_counters_tabular=true
//
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "bsmx/kernels.hpp"

namespace {

using bsmx::BlockDesign;
using bsmx::Index;
using bsmx::Matrix;

struct Problem {
  BlockDesign G;
  Matrix R;
};

Problem make(Index S) {
  constexpr Index N = 60;
  constexpr Index O = 3;
  constexpr Index T = 20;
  std::mt19937_64 eng(7);
  std::normal_distribution<double> nd;
  Matrix g(N, S * O);
  for (Index j = 0; j < g.cols(); ++j) {
    for (Index i = 0; i < N; ++i) g(i, j) = nd(eng);
  }
  Matrix r(N, T);
  for (Index j = 0; j < T; ++j) {
    for (Index i = 0; i < N; ++i) r(i, j) = nd(eng);
  }
  return {BlockDesign(std::move(g), O), std::move(r)};
}

template <auto Kernel>
void correlation(benchmark::State& state) {
  const Problem p = make(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p.G, p.R));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = bsmx::kernels::max_threads();
}

template <auto Kernel>
void lipschitz(benchmark::State& state) {
  const Problem p = make(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p.G));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = bsmx::kernels::max_threads();
}

void sizes(benchmark::internal::Benchmark* b) {
  for (Index S : {500, 2000, 8000, 20000}) b->Arg(S);
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(correlation<bsmx::kernels::serial::block_correlation_norms>)
    ->Name("correlation/serial")
    ->Apply(sizes);
BENCHMARK(correlation<bsmx::kernels::parallel::block_correlation_norms>)
    ->Name("correlation/omp")
    ->Apply(sizes);
BENCHMARK(lipschitz<bsmx::kernels::serial::block_lipschitz_all>)->Name("lipschitz/serial")->Apply(sizes);
BENCHMARK(lipschitz<bsmx::kernels::parallel::block_lipschitz_all>)->Name("lipschitz/omp")->Apply(sizes);

BENCHMARK_MAIN();
