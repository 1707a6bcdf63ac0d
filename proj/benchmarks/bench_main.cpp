#include <benchmark/benchmark.h>

#include "cising/collective_operators.hpp"
#include "cising/liouville.hpp"
#include "cising/meanfield.hpp"

using namespace cising;

namespace {

ModelParams params(double g, double p, int N) {
  ModelParams m;
  m.V = -5.0;
  m.g = g;
  m.p = p;
  m.N = N;
  return m;
}

void BM_BuildLiouvillian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto basis = build_basis(n);
  const auto prm = params(1.0, 0.5, n);
  for (auto _ : state) benchmark::DoNotOptimize(build_liouvillian(prm, basis));
}
BENCHMARK(BM_BuildLiouvillian)->Arg(10)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void gap_with(benchmark::State& state, SpectralMethod method) {
  const int n = static_cast<int>(state.range(0));
  const auto L = build_liouvillian(params(1.0, 0.0, n), build_basis(n));
  SpectralOptions opt;
  opt.method = method;
  for (auto _ : state) benchmark::DoNotOptimize(liouvillian_gap(L, opt).gap);
}

void BM_GapDense(benchmark::State& state) { gap_with(state, SpectralMethod::kDense); }
void BM_GapIterative(benchmark::State& state) { gap_with(state, SpectralMethod::kIterative); }
BENCHMARK(BM_GapDense)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GapIterative)->Arg(10)->Arg(20)->Arg(30)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_FindFixedPoints(benchmark::State& state) {
  const auto prm = params(-0.64, static_cast<double>(state.range(0)) / 100.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(mf::find_fixed_points(prm));
}
BENCHMARK(BM_FindFixedPoints)->Arg(0)->Arg(68)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
