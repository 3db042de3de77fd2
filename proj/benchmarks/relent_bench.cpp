#include <benchmark/benchmark.h>

#include "relent/entropy.hpp"
#include "relent/lowner.hpp"
#include "relent/monotonicity.hpp"
#include "relent/phi.hpp"
#include "relent/projection_limits.hpp"
#include "relent/random.hpp"

using namespace relent;

static void BM_RelativeEntropy(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(1);
  const PhiSpec phi = builtin("vn");
  const HermitianOperator a = random_density(n, 0.05, 0.95, rng);
  const HermitianOperator b = random_density(n, 0.05, 0.95, rng);
  for (auto _ : state) {
    // Fresh copies so cached spectra are not reused.
    HermitianOperator ac = HermitianOperator(a.matrix()), bc = HermitianOperator(b.matrix());
    benchmark::DoNotOptimize(relative_entropy(ac, bc, phi));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_RelativeEntropy)->RangeMultiplier(2)->Range(2, 128)->Complexity();

static void BM_LownerReconstruct(benchmark::State& state) {
  const LownerRepresentation rep = builtin_lowner("car");
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lowner_reconstruct(rep, x));
    x = x > 0.98 ? 0.01 : x + 0.01;
  }
}
BENCHMARK(BM_LownerReconstruct);

static void BM_SearchCounterexample(benchmark::State& state) {
  const Index n = state.range(0);
  const PhiSpec phi = builtin("vn");
  for (auto _ : state) {
    benchmark::DoNotOptimize(search_counterexample(phi, n, 100, 7));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SearchCounterexample)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_FiniteRank(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(3);
  const PhiSpec phi = builtin("vn");
  const HermitianOperator a = random_density(n, 0.01, 0.99, rng);
  const HermitianOperator b = random_density(n, 0.01, 0.99, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(finite_rank_approximation(a, b, phi, 1e-3));
  }
}
BENCHMARK(BM_FiniteRank)->Arg(8)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
