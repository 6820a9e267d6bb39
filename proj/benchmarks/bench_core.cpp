#include <benchmark/benchmark.h>

#include <cmath>

#include "nls/nonlinearity.hpp"
#include "nls/radial.hpp"
#include "nls/rearrange.hpp"
#include "nls/variational.hpp"

namespace {

nls::StateVector gaussian_state(const nls::GridPtr& grid, int k) {
  nls::StateVector u(grid, k);
  for (int i = 0; i < k; ++i) {
    const double width = 1.0 + 0.5 * i;
    for (std::size_t node = 0; node + 1 < grid->size(); ++node) {
      const double r = grid->nodes[node];
      u.components[i].values[node] = std::exp(-r * r / (2.0 * width * width));
    }
  }
  return u;
}

nls::NonlinearitySpec quartic_spec(int k) {
  std::vector<nls::NonlinearityTerm> terms;
  for (int i = 0; i < k; ++i) terms.push_back(nls::SeparablePower{i, 1.0, 4.0});
  return nls::NonlinearitySpec(3, k, std::move(terms));
}

void BM_GradNormSq(benchmark::State& state) {
  auto grid = nls::make_grid(3, 20.0, state.range(0));
  auto u = gaussian_state(grid, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nls::grad_norm_sq(u));
  }
}
BENCHMARK(BM_GradNormSq)->Arg(4000)->Arg(40000);

void BM_EnergyJ(benchmark::State& state) {
  auto grid = nls::make_grid(3, 20.0, state.range(0));
  auto u = gaussian_state(grid, 2);
  auto spec = quartic_spec(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nls::energy_J(u, spec));
  }
}
BENCHMARK(BM_EnergyJ)->Arg(4000)->Arg(40000);

void BM_ProjectToManifold(benchmark::State& state) {
  auto grid = nls::make_grid(3, 20.0, state.range(0));
  auto u = gaussian_state(grid, 1);
  auto spec = quartic_spec(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nls::project_to_M(u, spec));
  }
}
BENCHMARK(BM_ProjectToManifold)->Arg(4000)->Arg(16000);

void BM_Dilate(benchmark::State& state) {
  auto grid = nls::make_grid(3, 20.0, state.range(0));
  auto u = gaussian_state(grid, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nls::dilate(u, 1.3));
  }
}
BENCHMARK(BM_Dilate)->Arg(4000)->Arg(40000);

void BM_Schwarz(benchmark::State& state) {
  auto grid = nls::make_grid(3, 20.0, state.range(0));
  auto u = gaussian_state(grid, 1);
  // scramble so the sort has work to do
  for (std::size_t node = 0; node + 1 < grid->size(); node += 2) {
    u.components[0].values[node] *= -0.7;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(nls::schwarz(u.components[0]));
  }
}
BENCHMARK(BM_Schwarz)->Arg(4000)->Arg(40000);

}  // namespace

BENCHMARK_MAIN();
