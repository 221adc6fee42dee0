#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crashkit/geometry.hpp"
#include "crashkit/netkde.hpp"
#include "networks.hpp"
#include "oracles.hpp"

using namespace crashkit;
using namespace crashkit::netkde;
using testing_support::path_network;
using testing_support::random_graph;

namespace {

std::vector<oracle::Edge> oracle_edges(const RoadNetwork& net) {
  std::vector<oracle::Edge> out;
  for (const auto& e : net.edges()) out.push_back({e.from, e.to, e.length});
  return out;
}

}  // namespace

TEST(Network, RejectsBadInput) {
  std::vector<NetworkNode> nodes = {{"a", {0, 0}}, {"b", {10, 0}}};
  EXPECT_THROW(RoadNetwork(nodes, {{"e", "a", "zz", {}}}), ValidationError);
  EXPECT_THROW(RoadNetwork(nodes, {{"e", "a", "a", {}}}), ValidationError);
  EXPECT_THROW(RoadNetwork(nodes, {{"e", "a", "b", {}}, {"e", "b", "a", {}}}), ValidationError);
  EXPECT_THROW(RoadNetwork(nodes, {{"e", "a", "b", {{0, 0}, {5, 5}, {9, 0}}}}), ValidationError);
  RoadNetwork ok(nodes, {{"e", "a", "b", {{10, 0}, {5, 5}, {0, 0}}}});  // reversed geometry
  EXPECT_NEAR(ok.edges()[0].length, 2 * std::sqrt(50.0), 1e-12);
  EXPECT_EQ(ok.edges()[0].geometry.front(), (Point{0, 0}));
}

TEST(Snap, OnEdgeOffNetworkAndTies) {
  std::vector<NetworkNode> nodes = {{"a", {0, 0}}, {"b", {100, 0}}, {"c", {0, 10}}, {"d", {100, 10}}};
  RoadNetwork net(nodes, {{"e2", "c", "d", {}}, {"e1", "a", "b", {}}});
  auto on = snap_to_network({30, 0}, net, 10);
  ASSERT_TRUE(on);
  EXPECT_EQ(net.edges()[on->position.edge].id, "e1");
  EXPECT_DOUBLE_EQ(on->position.offset, 30);
  EXPECT_EQ(on->distance, 0);

  EXPECT_FALSE(snap_to_network({50, 25}, net, 10));  // 15 m from both

  auto tie = snap_to_network({40, 5}, net, 10);
  ASSERT_TRUE(tie);
  EXPECT_DOUBLE_EQ(geometry::distance_to_segment({40, 5}, {0, 0}, {100, 0}),
                   geometry::distance_to_segment({40, 5}, {0, 10}, {100, 10}));
  EXPECT_EQ(net.edges()[tie->position.edge].id, "e1");
}

TEST(Snap, PolylineOffsetIsArcLength) {
  RoadNetwork net({{"a", {0, 0}}, {"b", {100, 100}}}, {{"e", "a", "b", {{0, 0}, {100, 0}, {100, 100}}}});
  auto s = snap_to_network({103, 40}, net, 10);
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->position.offset, 140);
  EXPECT_DOUBLE_EQ(s->distance, 3);
}

TEST(Lixelize, RemainderPolicy) {
  auto l600 = lixelize(path_network(600), 200);
  ASSERT_EQ(l600.size(), 3u);
  for (const auto& l : l600) EXPECT_DOUBLE_EQ(l.length(), 200);

  auto l500 = lixelize(path_network(500), 200);
  ASSERT_EQ(l500.size(), 3u);
  EXPECT_DOUBLE_EQ(l500[2].length(), 100);
  EXPECT_DOUBLE_EQ(l500[2].end, 500);
}

TEST(Lixelize, LengthsTileEveryEdge) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    auto g = random_graph(rng);
    RoadNetwork net(g.nodes, g.edges);
    const auto lix = lixelize(net, 7.5);
    double sum = 0;
    for (std::size_t i = 0; i < lix.size(); ++i) {
      EXPECT_EQ(lix[i].id, i);
      EXPECT_GT(lix[i].length(), 0);
      EXPECT_LE(lix[i].length(), 7.5 + 1e-12);
      if (i > 0 && lix[i].edge == lix[i - 1].edge) EXPECT_EQ(lix[i].start, lix[i - 1].end);
      sum += lix[i].length();
    }
    EXPECT_NEAR(sum, net.total_length(), 1e-9);
  }
}

TEST(Distance, HandExamples) {
  auto line = path_network(300);
  EXPECT_DOUBLE_EQ(network_distance({0, 50}, {0, 120}, line, 1e9), 70);

  RoadNetwork two({{"a", {0, 0}}, {"j", {100, 0}}, {"b", {100, 100}}},
                  {{"e1", "a", "j", {}}, {"e2", "j", "b", {}}});
  EXPECT_DOUBLE_EQ(network_distance({0, 70}, {1, 40}, two, 1e9), 70);
  EXPECT_EQ(network_distance({0, 70}, {1, 40}, two, 60), oracle::kInf);
}

TEST(Distance, TriangleTakesTheShorterRoute) {
  RoadNetwork tri({{"a", {0, 0}}, {"b", {100, 0}}, {"c", {50, 10}}},
                  {{"ab", "a", "b", {{0, 0}, {0, 200}, {100, 200}, {100, 0}}},
                   {"ac", "a", "c", {}},
                   {"cb", "c", "b", {}}});
  const double around = 2 * std::hypot(50.0, 10.0);
  EXPECT_NEAR(network_distance({0, 0}, {0, 500}, tri, 1e9), around, 1e-12);
  EXPECT_NEAR(network_distance({0, 10}, {0, 390}, tri, 1e9), 10 + around + 110, 1e-12);
}

TEST(Distance, MatchesExhaustivePathsOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    auto g = random_graph(rng);
    RoadNetwork net(g.nodes, g.edges);
    const auto edges = oracle_edges(net);
    std::uniform_int_distribution<std::size_t> pick_edge(0, edges.size() - 1);
    for (int q = 0; q < 10; ++q) {
      const auto ea = pick_edge(rng), eb = pick_edge(rng);
      const double oa = std::floor(std::uniform_real_distribution<double>(0, edges[ea].length)(rng));
      const double ob = std::floor(std::uniform_real_distribution<double>(0, edges[eb].length)(rng));
      const double expected = oracle::exhaustive_position_distance(net.nodes().size(), edges, ea, oa, eb, ob);
      EXPECT_EQ(network_distance({ea, oa}, {eb, ob}, net, oracle::kInf), expected) << "trial " << t;
    }
  }
}

TEST(Kde, CenterOfSingleEvent) {
  auto line = path_network(2000);
  KdeConfig cfg;
  const auto lix = lixelize(line, cfg.lixel_unit);
  std::vector<WeightedEvent> ev = {{lix[4].center(), 1.0}};
  const auto d = net_kde(ev, lix, cfg, line);
  EXPECT_NEAR(d[4], 1.0 / (200 * std::sqrt(2 * M_PI)), 1e-15);
  EXPECT_DOUBLE_EQ(d[3], d[5]);
  EXPECT_EQ(d[0], 0.0);  // 800 m away, beyond 3r
}

TEST(Kde, ZeroEventsAndLinearity) {
  auto line = path_network(1000, 3);
  KdeConfig cfg;
  cfg.lixel_unit = 50;
  const auto lix = lixelize(line, cfg.lixel_unit);
  const auto none = net_kde({}, lix, cfg, line);
  EXPECT_TRUE(std::all_of(none.begin(), none.end(), [](double v) { return v == 0.0; }));

  std::vector<WeightedEvent> ev = {{{0, 120}, 1.0}, {{1, 10}, 3.0}, {{2, 300}, 5.0}};
  auto doubled = ev;
  for (auto& e : doubled) e.weight *= 2;
  const auto a = net_kde(ev, lix, cfg, line);
  const auto b = net_kde(doubled, lix, cfg, line);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2 * a[i], 1e-15);
}

TEST(Kde, MatchesDirectSumOnRandomGraphs) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 40; ++t) {
    auto g = random_graph(rng);
    RoadNetwork net(g.nodes, g.edges);
    const auto edges = oracle_edges(net);
    KdeConfig cfg;
    cfg.bandwidth = 30;
    cfg.truncation_radius = 90;
    cfg.lixel_unit = 10;
    const auto lix = lixelize(net, cfg.lixel_unit);
    std::uniform_int_distribution<std::size_t> pick_edge(0, edges.size() - 1);
    std::vector<WeightedEvent> ev;
    for (int k = 0; k < 4; ++k) {
      const auto e = pick_edge(rng);
      ev.push_back({{e, std::uniform_real_distribution<double>(0, edges[e].length)(rng)}, 1.0 + k});
    }
    const auto d = net_kde(ev, lix, cfg, net);
    for (std::size_t i = 0; i < lix.size(); ++i) {
      double expected = 0;
      for (const auto& e : ev) {
        const double dist = oracle::exhaustive_position_distance(net.nodes().size(), edges, e.position.edge,
                                                                 e.position.offset, lix[i].edge,
                                                                 lix[i].center().offset);
        if (dist <= cfg.truncation_radius) expected += e.weight * oracle::gaussian(dist / cfg.bandwidth);
      }
      EXPECT_NEAR(d[i], expected / cfg.bandwidth, 1e-12) << "trial " << t << " lixel " << i;
    }
  }
}

TEST(Kde, EventOrderDoesNotChangeBits) {
  auto line = path_network(3000, 7);
  KdeConfig cfg;
  cfg.lixel_unit = 25;
  const auto lix = lixelize(line, cfg.lixel_unit);
  std::mt19937_64 rng(1);
  std::vector<WeightedEvent> ev;
  for (int i = 0; i < 60; ++i) {
    const auto e = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
    ev.push_back({{e, std::uniform_real_distribution<double>(0, line.edges()[e].length)(rng)}, 1.0});
  }
  const auto a = net_kde(ev, lix, cfg, line);
  std::shuffle(ev.begin(), ev.end(), rng);
  EXPECT_EQ(net_kde(ev, lix, cfg, line), a);
}

TEST(Kde, TranslationInvariance) {
  std::mt19937_64 rng(5);
  auto g = random_graph(rng);
  auto moved = g;
  for (auto& n : moved.nodes) n.position = {n.position.x + 5.0e5, n.position.y - 2.5e5};
  for (auto& e : moved.edges) {
    for (auto& p : e.geometry) p = {p.x + 5.0e5, p.y - 2.5e5};
  }
  RoadNetwork a(g.nodes, g.edges), b(moved.nodes, moved.edges);
  KdeConfig cfg;
  cfg.bandwidth = 20;
  cfg.truncation_radius = 60;
  cfg.lixel_unit = 5;
  const Point p = a.point_at(0, a.edges()[0].length / 3);
  auto sa = snap_to_network({p.x + 1, p.y + 1}, a, 10);
  auto sb = snap_to_network({p.x + 1 + 5.0e5, p.y + 1 - 2.5e5}, b, 10);
  ASSERT_TRUE(sa && sb);
  EXPECT_EQ(sa->position.edge, sb->position.edge);
  EXPECT_NEAR(sa->position.offset, sb->position.offset, 1e-6);
  std::vector<WeightedEvent> ev = {{sa->position, 1.0}};
  const auto da = net_kde(ev, lixelize(a, 5), cfg, a);
  const auto db = net_kde(ev, lixelize(b, 5), cfg, b);
  ASSERT_EQ(da.size(), db.size());
  for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], db[i], 1e-12);
}

TEST(Rank, ExamplesAndSortOracle) {
  std::vector<Lixel> lix = {{0, 0, 0, 1}, {1, 0, 1, 2}, {2, 0, 2, 3}};
  std::vector<double> d = {3, 1, 2};
  auto top = rank_segments(d, lix, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].lixel_id, 0u);
  EXPECT_EQ(top[1].lixel_id, 2u);
  std::vector<double> tie = {2, 2, 0};
  EXPECT_EQ(rank_segments(tie, lix, 1)[0].lixel_id, 0u);
  EXPECT_EQ(rank_segments(d, lix, 10).size(), 3u);

  std::mt19937_64 rng(6);
  std::vector<Lixel> many;
  std::vector<double> dens;
  for (std::size_t i = 0; i < 200; ++i) {
    many.push_back({i, 0, static_cast<double>(i), i + 1.0});
    dens.push_back(std::floor(std::uniform_real_distribution<double>(0, 20)(rng)));
  }
  std::vector<std::size_t> order(200);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dens[a] > dens[b]; });
  const auto ranked = rank_segments(dens, many, 50);
  for (std::size_t r = 0; r < 50; ++r) EXPECT_EQ(ranked[r].lixel_id, order[r]);
}
