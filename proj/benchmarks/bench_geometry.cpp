#include "acyl/cylinder.hpp"
#include "acyl/linalg.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

acyl::Mat random_matrix(acyl::Index rows, acyl::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  acyl::Mat m(rows, cols);
  for (acyl::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_Pinv(benchmark::State& state) {
  const auto n = static_cast<acyl::Index>(state.range(0));
  // rank-deficient on purpose
  const acyl::Mat m = random_matrix(n, n / 2, 1) * random_matrix(n / 2, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(acyl::pinv(m));
}
BENCHMARK(BM_Pinv)->RangeMultiplier(2)->Range(4, 64);

void BM_Image(benchmark::State& state) {
  const auto n = static_cast<acyl::Index>(state.range(0));
  const acyl::Mat f = random_matrix(n, n, 3);
  const acyl::Cylinder c(acyl::SymMat(f.transpose() * f));
  const acyl::Mat map = random_matrix(n / 2, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(acyl::image(c, map));
}
BENCHMARK(BM_Image)->RangeMultiplier(2)->Range(4, 64);

void BM_Contains(benchmark::State& state) {
  const acyl::Mat f = random_matrix(6, 6, 5);
  const acyl::Cylinder c(acyl::SymMat(f.transpose() * f));
  const acyl::Vec x = random_matrix(6, 1, 6);
  for (auto _ : state) benchmark::DoNotOptimize(acyl::contains(c, x));
}
BENCHMARK(BM_Contains);

}  // namespace

BENCHMARK_MAIN();
