#include "acyl/analysis.hpp"
#include "acyl/problem_file.hpp"
#include "acyl/simulation.hpp"
#include "acyl/synthesis.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

namespace {

acyl::SynthesisProblem load(const char* name) {
  return acyl::load_problem(std::filesystem::path(ACYL_DATA_DIR) / name).synthesis_problem();
}

// Stable chain of n states, disturbance on the first, output the last n-1.
acyl::DisturbedSystem chain(acyl::Index n) {
  acyl::Mat a = -acyl::Mat::Identity(n, n);
  for (acyl::Index i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  acyl::Mat b = acyl::Mat::Zero(n, 1);
  b(0, 0) = 1.0;
  return {a, b, acyl::SymMat::identity(1)};
}

void BM_SolveCertificate(benchmark::State& state) {
  const auto n = static_cast<acyl::Index>(state.range(0));
  const acyl::DisturbedSystem sys = chain(n);
  const acyl::Mat c = acyl::Mat::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(acyl::solve_certificate(sys, c, 1.0));
}
BENCHMARK(BM_SolveCertificate)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);

void BM_FindAttractingCylinder(benchmark::State& state) {
  const acyl::DisturbedSystem sys = chain(4);
  const acyl::Mat c = acyl::Mat::Identity(4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(acyl::find_attracting_cylinder(sys, c));
}
BENCHMARK(BM_FindAttractingCylinder)->Unit(benchmark::kMillisecond);

void BM_CclTracking(benchmark::State& state) {
  const acyl::SynthesisProblem p = load("tracking.acyl");
  const acyl::HMatrices h = acyl::build_H(acyl::assemble(p));
  for (auto _ : state) benchmark::DoNotOptimize(acyl::cone_complementarity(h, p.G, 0.5));
}
BENCHMARK(BM_CclTracking)->Unit(benchmark::kMillisecond);

void BM_SynthesizeObserver(benchmark::State& state) {
  const acyl::SynthesisProblem p = load("observer.acyl");
  acyl::SynthesisOptions o;
  o.alpha_grid = {0.1, 0.3, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(acyl::synthesize(p, o));
}
BENCHMARK(BM_SynthesizeObserver)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const acyl::DisturbedSystem sys = chain(6);
  const acyl::Disturbance f = {acyl::SignalSpec::sine(1.0, 0.4)};
  const acyl::Vec s0 = acyl::Vec::Ones(6);
  for (auto _ : state) benchmark::DoNotOptimize(acyl::simulate(sys.A, sys.B, f, s0, 0.01, 20.0));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
