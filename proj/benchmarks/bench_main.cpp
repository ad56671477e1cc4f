#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "momeq/monte_carlo.hpp"
#include "momeq/recursion.hpp"
#include "momeq/sparse_grid.hpp"

namespace {

using namespace momeq;

const CovarianceKernel kKernel{KernelKind::Exponential, 0.3, 0.5, 0.4};

void BM_FactorAndSolve(benchmark::State& state) {
  const auto space = make_space(static_cast<std::size_t>(state.range(0)), 1);
  const auto load = assemble_source_load(*space, [](double) { return 1.0; });
  for (auto _ : state) {
    const auto op = assemble_laplacian(space);
    benchmark::DoNotOptimize(op.solve(load));
  }
}
BENCHMARK(BM_FactorAndSolve)->Arg(128)->Arg(512)->Arg(2048);

void BM_Solve(benchmark::State& state) {
  const auto space = make_space(static_cast<std::size_t>(state.range(0)), 1);
  const auto op = assemble_laplacian(space);
  const auto load = assemble_source_load(*space, [](double) { return 1.0; });
  for (auto _ : state) benchmark::DoNotOptimize(op.solve(load));
}
BENCHMARK(BM_Solve)->Arg(128)->Arg(512)->Arg(2048);

void BM_SmolyakEval(benchmark::State& state) {
  const unsigned k = static_cast<unsigned>(state.range(0));
  const unsigned level = static_cast<unsigned>(state.range(1));
  const auto s = smolyak_build(LevelFamily(), level, k, [](std::span<const double> y) {
    double v = 0.0;
    for (double t : y) v += t * t;
    return std::exp(-v);
  });
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(k);
  for (auto _ : state) {
    for (auto& t : y) t = u(rng);
    benchmark::DoNotOptimize(s.evaluate_scalar(y));
  }
}
BENCHMARK(BM_SmolyakEval)->Args({2, 5})->Args({3, 5})->Args({4, 4});

void BM_RecursionSecondOrder(benchmark::State& state) {
  RecursionConfig rc;
  rc.elements = 128;
  rc.level = static_cast<unsigned>(state.range(0));
  const MomentEvaluator moments(kKernel);
  for (auto _ : state) benchmark::DoNotOptimize(run_recursion(rc, moments));
}
BENCHMARK(BM_RecursionSecondOrder)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_RecursionFourthOrder(benchmark::State& state) {
  RecursionConfig rc;
  rc.elements = 32;
  rc.level = static_cast<unsigned>(state.range(0));
  rc.order = 4;
  const MomentEvaluator moments(kKernel);
  for (auto _ : state) benchmark::DoNotOptimize(run_recursion(rc, moments));
}
BENCHMARK(BM_RecursionFourthOrder)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_McSample(benchmark::State& state) {
  const auto space = make_space(static_cast<std::size_t>(state.range(0)), 1);
  const auto load = assemble_source_load(*space, [](double) { return 1.0; });
  GaussianSampler sampler(kKernel, std::vector<double>(space->dof_coordinates().begin(), space->dof_coordinates().end()),
                          1e-10, 7);
  for (auto _ : state) {
    const auto y = sampler.sample();
    benchmark::DoNotOptimize(solve_sample(space, y, load));
  }
}
BENCHMARK(BM_McSample)->Arg(128)->Arg(512);

void BM_PerSampleCorrections(benchmark::State& state) {
  const auto space = make_space(128, 1);
  const auto op = assemble_laplacian(space);
  const auto u0 = op.solve(assemble_source_load(*space, [](double) { return 1.0; }));
  GaussianSampler sampler(kKernel, std::vector<double>(space->dof_coordinates().begin(), space->dof_coordinates().end()),
                          1e-10, 7);
  const auto order = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    const auto y = sampler.sample();
    benchmark::DoNotOptimize(per_sample_corrections(y, order, op, u0));
  }
}
BENCHMARK(BM_PerSampleCorrections)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
