#include <benchmark/benchmark.h>

#include <random>

#include "crashkit/autocorr.hpp"
#include "crashkit/geodetector.hpp"

using namespace crashkit;

namespace {

autocorr::SpatialWeights rook_grid(std::size_t side) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      if (c + 1 < side) pairs.emplace_back(r * side + c, r * side + c + 1);
      if (r + 1 < side) pairs.emplace_back(r * side + c, (r + 1) * side + c);
    }
  }
  return autocorr::SpatialWeights(side * side, pairs);
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

void BM_MoranPermutation(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto w = rook_grid(side);
  const auto x = noise(side * side, 1);
  for (auto _ : state) benchmark::DoNotOptimize(autocorr::permutation_test_global(x, w, 999, 7));
}
BENCHMARK(BM_MoranPermutation)->Arg(20)->Arg(70)->Unit(benchmark::kMillisecond);

void BM_Jenks(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(geodetector::jenks_breaks(x, 5));
}
BENCHMARK(BM_Jenks)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_DetectorSuite(benchmark::State& state) {
  const std::size_t n = 4800;
  const auto y = noise(n, 3);
  std::vector<std::pair<std::string, std::vector<double>>> factors;
  for (int f = 0; f < 9; ++f) factors.emplace_back("F" + std::to_string(f), noise(n, 10 + f));
  geodetector::SuiteOptions opts;
  opts.n_perm = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(geodetector::run_detector_suite(y, factors, opts));
}
BENCHMARK(BM_DetectorSuite)->Arg(99)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
