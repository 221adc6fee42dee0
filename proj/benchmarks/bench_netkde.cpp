#include <benchmark/benchmark.h>

#include <random>

#include "crashkit/netkde.hpp"

using namespace crashkit;
using namespace crashkit::netkde;

namespace {

// side x side street grid, 100 m blocks
RoadNetwork grid(int side) {
  std::vector<NetworkNode> nodes;
  std::vector<EdgeSpec> edges;
  auto id = [](int i, int j) { return "n" + std::to_string(i) + "_" + std::to_string(j); };
  for (int j = 0; j <= side; ++j) {
    for (int i = 0; i <= side; ++i) {
      nodes.push_back({id(i, j), {i * 100.0, j * 100.0}});
      if (i > 0) edges.push_back({"h" + id(i, j), id(i - 1, j), id(i, j), {}});
      if (j > 0) edges.push_back({"v" + id(i, j), id(i, j - 1), id(i, j), {}});
    }
  }
  return RoadNetwork(nodes, edges);
}

std::vector<WeightedEvent> events(const RoadNetwork& net, std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> edge(0, net.edges().size() - 1);
  std::uniform_real_distribution<double> offset(0, 100);
  std::vector<WeightedEvent> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{edge(rng), offset(rng)}, 1.0});
  return out;
}

void BM_NetKde(benchmark::State& state) {
  const auto net = grid(static_cast<int>(state.range(0)));
  KdeConfig cfg;
  cfg.lixel_unit = 25;
  const auto lixels = lixelize(net, cfg.lixel_unit);
  const auto ev = events(net, static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(net_kde(ev, lixels, cfg, net));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_NetKde)->Args({20, 100})->Args({20, 1000})->Args({50, 1000})->Unit(benchmark::kMillisecond);

void BM_Snap(benchmark::State& state) {
  const auto net = grid(50);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coord(0, 5000);
  std::vector<Point> pts(1000);
  for (auto& p : pts) p = {coord(rng), coord(rng)};
  for (auto _ : state) {
    for (const auto& p : pts) benchmark::DoNotOptimize(snap_to_network(p, net, 10.0));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Snap);

}  // namespace

BENCHMARK_MAIN();
