#include <benchmark/benchmark.h>

#include <random>

#include "crashkit/tensor.hpp"

using namespace crashkit::tensor;

namespace {

Tensor3 random_tensor(std::size_t zones) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor3 t(zones, 7, 24);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

void BM_ModeProduct(benchmark::State& state) {
  const auto x = random_tensor(static_cast<std::size_t>(state.range(0)));
  const Matrix a = Matrix::Random(13, static_cast<Eigen::Index>(x.dim(0))).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(n_mode_product(x, a, 0));
}
BENCHMARK(BM_ModeProduct)->Arg(500)->Arg(4800);

void BM_NtdFit(benchmark::State& state) {
  const auto x = random_tensor(static_cast<std::size_t>(state.range(0)));
  NtdOptions opts;
  opts.max_iter = 50;
  opts.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(fit_ntd_once(x, {13, 5, 3}, opts, 0));
}
BENCHMARK(BM_NtdFit)->Arg(500)->Arg(4800)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
