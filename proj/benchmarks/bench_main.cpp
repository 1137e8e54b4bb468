#include "sktap/amp_iter.hpp"
#include "sktap/free_prob.hpp"
#include "sktap/rs_core.hpp"
#include "sktap/spectra.hpp"
#include "sktap/tap_functional.hpp"

#include <benchmark/benchmark.h>

using namespace sktap;

static void BM_SolveQ(benchmark::State& state) {
  const double beta = state.range(0) / 10.0;
  const ModelParams p = ModelParams::make(beta, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_q(p).q);
}
BENCHMARK(BM_SolveQ)->Arg(5)->Arg(10)->Arg(40);

static void BM_AmpStep(benchmark::State& state) {
  const Index n = state.range(0);
  const ModelParams p = ModelParams::make(1.0, 0.5);
  const RsSolution rs = solve_q(p);
  const AmpState start = amp_advance(amp_init(p, rs, sample_disorder(n, 3)), 3);
  for (auto _ : state) {
    AmpState s = amp_step(start);
    benchmark::DoNotOptimize(s.m_k.data());
  }
}
BENCHMARK(BM_AmpStep)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_HessianSpectrum(benchmark::State& state) {
  const Index n = state.range(0);
  const ModelParams p = ModelParams::make(1.0, 0.5);
  const RsSolution rs = solve_q(p);
  const AmpState st = amp_advance(amp_init(p, rs, sample_disorder(n, 5)), 4);
  const SymmetrizedDisorder gbar = symmetrize(sample_disorder(n, 5));
  const HessianMatrix hess = hessian(gbar, state_magnetization(st), p);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eigen(hess.entries).eigenvalues.data());
}
BENCHMARK(BM_HessianSpectrum)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_TopEigpair(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix g = symmetrize(sample_disorder(n, 8)).entries / std::sqrt(static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(top_eigpair(g, 1e-8).lambda1);
}
BENCHMARK(BM_TopEigpair)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_FreeConvolutionCdf(benchmark::State& state) {
  const ModelParams p = ModelParams::make(1.0, 0.5);
  const NuMeasure nu = NuMeasure::from_rs(p, solve_q(p).q);
  for (auto _ : state) {
    FreeConvolutionCdf cdf(nu, nu.hessian_shift(), static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(cdf.edge());
  }
}
BENCHMARK(BM_FreeConvolutionCdf)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
