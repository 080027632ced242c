#include <benchmark/benchmark.h>

#include "casray/assembly.hpp"
#include "casray/even_engine.hpp"
#include "casray/lattice.hpp"
#include "casray/odd_engine.hpp"
#include "casray/piston.hpp"

using namespace casray;

static void BM_EvenEnergy(benchmark::State& state) {
  const Geometry g(1.0, 1.0, 0.25);
  even_engine::SumOptions opts;
  opts.tolerance = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto r = even_engine::evenEnergy(g, opts);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_EvenEnergy)->Arg(1'000)->Arg(100'000)->Arg(10'000'000);

static void BM_EpsteinZ2(benchmark::State& state) {
  const double tol = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto r = piston::epsteinZ2({1.0, 1.0, 3}, tol);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_EpsteinZ2)->Arg(1'000'000)->Arg(1'000'000'000);

static void BM_IsAllowed(benchmark::State& state) {
  const Geometry g(1.0, 1.0, 0.2);
  ImagePoint fam;
  fam.index = LatticeIndex::reduce(3, 2);
  fam.hParity = Parity::Even;
  fam.vParity = Parity::Odd;
  fam.reflectionOrder = 9;
  double x = 0.1, y = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(isAllowed(g, {x, y}, fam));
    x += 0.0137;
    if (x > g.a) x -= g.a;
    y += 0.0731;
    if (y > g.period()) y -= g.period();
  }
}
BENCHMARK(BM_IsAllowed);

static void BM_OddOrder3(benchmark::State& state) {
  const Geometry g(1.0, 1.0, 0.25);
  odd_engine::OddSettings st;
  st.cubature.relTolerance = 1.0 / static_cast<double>(state.range(0));
  st.cubature.absTolerance = 1e-14;
  for (auto _ : state) {
    auto r = odd_engine::oddOrderSum(g, 3, st);
    benchmark::DoNotOptimize(r.energy);
  }
}
BENCHMARK(BM_OddOrder3)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

static void BM_OddOrder3WithForce(benchmark::State& state) {
  const Geometry g(1.0, 1.0, 0.25);
  odd_engine::OddSettings st;
  st.cubature.relTolerance = 1e-4;
  st.cubature.absTolerance = 1e-14;
  st.withForce = true;
  for (auto _ : state) {
    auto r = odd_engine::oddOrderSum(g, 3, st);
    benchmark::DoNotOptimize(r.forceTerm);
  }
}
BENCHMARK(BM_OddOrder3WithForce)->Unit(benchmark::kMillisecond);

static void BM_ForceBreakdown(benchmark::State& state) {
  const Geometry g(1.0, 1.0, 0.25);
  assembly::EngineSettings s;
  s.tolerance = 1e-3;
  s.oddOrderCap = 21;
  s.odd.cubature.relTolerance = 1e-3;
  s.threads = 1;
  for (auto _ : state) {
    auto r = assembly::forceBreakdown(g, s);
    benchmark::DoNotOptimize(r.force.force.total);
  }
}
BENCHMARK(BM_ForceBreakdown)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
