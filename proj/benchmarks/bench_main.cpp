#include <benchmark/benchmark.h>

#include <numbers>

#include "bwave/closed_forms.hpp"
#include "bwave/diagnostics.hpp"
#include "bwave/grid_solver.hpp"
#include "bwave/reaction.hpp"
#include "bwave/wave_finder.hpp"

using namespace bwave;

namespace {

const ClosedFormParams unit_params(1.0, 1.0);

void BM_ExplicitWave(benchmark::State& state) {
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(explicit_wave({x, 0.25}, unit_params));
    x = x > 3.0 ? -3.0 : x + 1e-3;
  }
}
BENCHMARK(BM_ExplicitWave);

void BM_ProfileInverse(benchmark::State& state) {
  double v = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wave_profile_inverse(v, 1.0));
    v = v > 0.99 ? 0.01 : v + 1e-3;
  }
}
BENCHMARK(BM_ProfileInverse);

void BM_GNonlinearity(benchmark::State& state) {
  const ReactionTerm g = make_regularized(unit_params);
  double v = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g(v));
    v = v > 0.99 ? 0.01 : v + 1e-3;
  }
}
BENCHMARK(BM_GNonlinearity);

void BM_BesselK0(benchmark::State& state) {
  double s = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_k0(s));
    s = s > 30.0 ? 0.1 : s + 0.01;
  }
}
BENCHMARK(BM_BesselK0);

// manufactured solve, nx x nx/4 nodes
void BM_ManufacturedSolve(benchmark::State& state) {
  const GridSpec grid = GridSpec::square_cells(4.0, static_cast<int>(state.range(0)), 2.0);
  const ReactionTerm g = make_regularized(unit_params);
  const BoundaryValues data =
      sample_boundary(grid, [](double x, double y) { return explicit_wave({x, y}, unit_params); });
  TruncatedSolver solver(grid);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(1.0, g, data, StartMode::sub).field.values().data());
}
BENCHMARK(BM_ManufacturedSolve)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BumpSolve(benchmark::State& state) {
  const GridSpec grid = GridSpec::square_cells(8.0, static_cast<int>(state.range(0)));
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  const BoundaryValues data = dirichlet_data(0.9, grid);
  TruncatedSolver solver(grid);
  for (auto _ : state)
    benchmark::DoNotOptimize(solver.solve(0.9, f, data, StartMode::sub, default_search_solver()).field.values().data());
}
BENCHMARK(BM_BumpSolve)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_FindSpeedCoarse(benchmark::State& state) {
  const GridSpec grid = GridSpec::square_cells(8.0, 256);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  SpeedSearchOptions o;
  o.width_tol = 1e-5;
  o.compute_diagnostics = false;
  for (auto _ : state) benchmark::DoNotOptimize(find_speed(grid, f, 0.25, o).c_R);
}
BENCHMARK(BM_FindSpeedCoarse)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Diagnostics(benchmark::State& state) {
  const ClosedFormParams p(0.5, 1.0);
  const GridSpec grid = GridSpec::square_cells(16.0, 1024);
  const Field v = Field::sample(grid, [&](double x, double y) { return explicit_wave({x, y}, p); });
  const ReactionTerm g = make_regularized(p);
  for (auto _ : state) benchmark::DoNotOptimize(compute_diagnostics(v, 1.0, g).identity_gap);
}
BENCHMARK(BM_Diagnostics)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
