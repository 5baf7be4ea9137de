#include <benchmark/benchmark.h>

#include "segrex/boundary.hpp"
#include "segrex/classify.hpp"
#include "segrex/harmonic.hpp"
#include "segrex/pde.hpp"

using namespace segrex;

static void BM_PoissonEval(benchmark::State& state) {
  const auto d = make_quadrant_datum({7, 15, 7, 15}, static_cast<std::size_t>(state.range(0)));
  const auto phi = alternating_trace(d);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_eval(phi, {0.3, -0.2}));
}
BENCHMARK(BM_PoissonEval)->Arg(512)->Arg(2048)->Arg(8192);

static void BM_CriticalPoints(benchmark::State& state) {
  const auto phi = alternating_trace(make_quadrant_datum({7, 15, 7, 15}));
  for (auto _ : state) benchmark::DoNotOptimize(critical_points(phi));
}
BENCHMARK(BM_CriticalPoints)->Unit(benchmark::kMillisecond);

static void BM_Solve(benchmark::State& state) {
  const auto d = make_quadrant_datum({15, 15, 15, 15});
  SolverConfig c;
  c.rings = static_cast<int>(state.range(0));
  c.sectors = 4 * c.rings;
  for (auto _ : state) benchmark::DoNotOptimize(solve_system(d, c));
}
BENCHMARK(BM_Solve)->Arg(15)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_Classify(benchmark::State& state) {
  const auto d = make_quadrant_datum({7, 15, 7, 15});
  SolverConfig c;
  c.rings = 30;
  c.sectors = 128;
  const auto s = solve_system(d, c);
  for (auto _ : state) benchmark::DoNotOptimize(classify(s, d));
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
