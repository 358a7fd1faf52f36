#include "ergoflow/diffusion.hpp"
#include "ergoflow/norms.hpp"
#include "ergoflow/rng.hpp"
#include "ergoflow/special.hpp"
#include "ergoflow/spectral.hpp"
#include "ergoflow/transport.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

namespace {

using namespace ergoflow;

CircularMeasure random_measure(RandomStream& rng, std::size_t n) {
  std::vector<double> pos(n), w(n);
  for (auto& p : pos) p = rng.next_uniform();
  for (auto& x : w) x = 0.1 + rng.next_uniform();
  return make_circular_measure(std::move(pos), std::move(w));
}

void BM_CircleTransport(benchmark::State& state) {
  RandomStream rng(7, 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  const CircularMeasure a = random_measure(rng, n);
  const CircularMeasure b = random_measure(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(w2sq_circle(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CircleTransport)->Arg(64)->Arg(1024)->Arg(16384)->Complexity();

void BM_SinkhornDivergence(benchmark::State& state) {
  const int bins = static_cast<int>(state.range(0));
  const GridMeasure a = grid_measure_from_density(2, bins, [](const Point&) { return 1.0; });
  const GridMeasure b = grid_measure_from_density(2, bins, [](const Point& x) {
    return 1.0 + 0.5 * std::cos(2.0 * 3.14159265358979323846 * x[0]);
  });
  SinkhornOptions opts;
  opts.epsilon = 1e-3;
  opts.tolerance = 1e-6;
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_divergence(a, b, opts));
}
BENCHMARK(BM_SinkhornDivergence)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_WeightedPath(benchmark::State& state) {
  const auto model = make_flat_torus(1, 800.0);
  PathConfig cfg;
  cfg.weight_exponent = 1.0;
  cfg.horizon = 100.0;
  cfg.samples = static_cast<std::size_t>(state.range(0));
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RandomStream rng(11, stream++);
    benchmark::DoNotOptimize(simulate_weighted_modes(*model, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WeightedPath)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_DampedSpectralSum(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flat_damped_inverse_square_sum(dim, 1e-4));
}
BENCHMARK(BM_DampedSpectralSum)->Arg(3)->Arg(4);

// Cutoff must be high enough for the oracle to certify its spectral tail
// at this damping, hence the shared helper instead of a hand-picked value.
void BM_StationaryOracle(benchmark::State& state) {
  const auto model = make_flat_torus(1, lambda_cutoff_for(1e-3, 2.0));
  for (auto _ : state)
    benchmark::DoNotOptimize(stationary_l2_expectation(*model, 0.75, 200.0, 1e-3));
}
BENCHMARK(BM_StationaryOracle);

}  // namespace

BENCHMARK_MAIN();
