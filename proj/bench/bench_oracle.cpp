#include <benchmark/benchmark.h>

#include <random>

#include "nilconj/oracle.hpp"

using namespace nilconj;

namespace {

GeodesicSpec heis5w() { return GeodesicSpec(fixture("heis5w"), Vec::Ones(1), (Vec(4) << 0.5, 0.0, 0.5, 0.0).finished()); }

GeodesicSpec large() {
  std::mt19937_64 rng(11);
  const auto alg = random_algebra(3, 12, rng, 1, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec z0(3), x0(12);
  for (auto& x : z0) x = u(rng);
  for (auto& x : x0) x = u(rng);
  return GeodesicSpec(alg, z0, x0);
}

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

void BM_PropagatorHeis5w(benchmark::State& state) {
  const auto geo = heis5w();
  for (auto _ : state) benchmark::DoNotOptimize(integrate_propagator(geo, 13.0, default_steps(13.0), mode(state)));
}

void BM_PropagatorLarge(benchmark::State& state) {
  const auto geo = large();
  for (auto _ : state) benchmark::DoNotOptimize(integrate_propagator(geo, 10.0, default_steps(10.0), mode(state)));
}

void BM_SigmaScanLarge(benchmark::State& state) {
  const auto geo = large();
  const Propagator prop = integrate_propagator(geo, 10.0, default_steps(10.0));
  for (auto _ : state) benchmark::DoNotOptimize(sigma_scan(prop, mode(state)));
}

void BM_DetectHeis5w(benchmark::State& state) {
  const auto geo = heis5w();
  for (auto _ : state)
    benchmark::DoNotOptimize(detect_conjugate(geo, 13.0, default_steps(13.0), kOracleRankTol, mode(state)));
}

}  // namespace

// Argument 0 runs the serial reference path, 1 the OpenMP path.
BENCHMARK(BM_PropagatorHeis5w)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagatorLarge)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SigmaScanLarge)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectHeis5w)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
