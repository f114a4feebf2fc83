#include <benchmark/benchmark.h>

#include <random>

#include "tgrowth/config.hpp"
#include "tgrowth/diagnostics.hpp"
#include "tgrowth/dynamics.hpp"
#include "tgrowth/spectral.hpp"

using namespace tgrowth;

namespace {

SpatialGrid grid_for(benchmark::State& state) {
  return SpatialGrid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 10.0);
}

Field noise(const SpatialGrid& g) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Field f(g);
  for (double& v : f.values()) v = u(rng);
  return f;
}

void BM_solve_w(benchmark::State& state) {
  const auto g = grid_for(state);
  const SpectralPlan plan(g);
  const Field p = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(solve_w(p, 1e-2, plan));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.cell_count()));
}
BENCHMARK(BM_solve_w)->Args({1, 256})->Args({1, 4096})->Args({2, 128})->Args({2, 512});

void BM_step(benchmark::State& state) {
  RunConfig c;
  c.dim = static_cast<int>(state.range(0));
  c.points = static_cast<int>(state.range(1));
  c.params.cfl = 0.2;
  const auto g = c.grid();
  const SpectralPlan plan(g);
  const MultiState s = c.initial_state();
  const Field w = solve_w(pressure(mean_density(s), c.params.stiffness), c.params.viscosity, plan);
  for (auto _ : state) benchmark::DoNotOptimize(advect_reaction_step(s, w, plan, c.law, c.params, 1e-4));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.cell_count()) * c.phenotypes);
}
BENCHMARK(BM_step)->Args({1, 256})->Args({1, 1024})->Args({2, 128});

void BM_build_record(benchmark::State& state) {
  RunConfig c;
  c.points = static_cast<int>(state.range(0));
  c.params.horizon = 0.2;
  const Trajectory traj = simulate(c);
  for (auto _ : state) benchmark::DoNotOptimize(build_record(traj, "bench"));
}
BENCHMARK(BM_build_record)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
