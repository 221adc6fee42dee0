// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crashkit/autocorr.hpp"
#include "crashkit/geodetector.hpp"
#include "crashkit/ingest.hpp"
#include "crashkit/manifest.hpp"
#include "crashkit/netkde.hpp"
#include "crashkit/pipeline.hpp"
#include "crashkit/random.hpp"
#include "crashkit/tensor.hpp"
#include "networks.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace crashkit;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ------------------------------------------------------------------- 1

Outcome swi_index() {
  Outcome out;
  const ingest::SeverityCounts example{5, 376, 2108};
  const auto swi = ingest::compute_swi(example);
  out.ok = swi == 3261;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> count(0, 100000);
  int broken = 0;
  for (int t = 0; t < 10000; ++t) {
    const ingest::SeverityCounts a{count(rng), count(rng), count(rng)};
    const ingest::SeverityCounts b{count(rng), count(rng), count(rng)};
    if (ingest::compute_swi(a + b) != ingest::compute_swi(a) + ingest::compute_swi(b)) ++broken;
  }
  out.ok = out.ok && broken == 0;
  out.detail = "example " + std::to_string(swi) + ", additivity violations " + std::to_string(broken) + "/10000";
  return out;
}

// ------------------------------------------------------------------- 2

Outcome kde_mass() {
  Outcome out;
  netkde::KdeConfig cfg;
  cfg.bandwidth = 200;
  cfg.lixel_unit = 50;
  cfg.truncation_radius = 600;
  double worst = 0.0;
  for (std::size_t pieces : {1, 10}) {
    const auto net = testing_support::path_network(5000, pieces);
    const auto lixels = netkde::lixelize(net, cfg.lixel_unit);
    for (double at : {2500.0, 2512.5, 2537.0}) {
      const auto snap = netkde::snap_to_network({at, 0.0}, net, 1.0);
      if (!snap) return {false, "event failed to snap"};
      const std::vector<netkde::WeightedEvent> ev = {{snap->position, 1.0}};
      const auto d = netkde::net_kde(ev, lixels, cfg, net);
      double mass = 0.0;
      for (std::size_t i = 0; i < lixels.size(); ++i) mass += d[i] * (lixels[i].end - lixels[i].start);
      worst = std::max(worst, std::abs(mass - 1.0));
    }
  }
  out.ok = worst <= 0.05;
  out.detail = "max |mass - 1| = " + fmt("%.4g", worst) + " (tolerance 0.05)";
  return out;
}

// ------------------------------------------------------------------- 3

Outcome network_distance() {
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0, axiom_failures = 0, queries = 0;
  for (int t = 0; t < 200; ++t) {
    const auto g = testing_support::random_graph(rng);
    const netkde::RoadNetwork net(g.nodes, g.edges);
    std::vector<oracle::Edge> edges;
    for (const auto& e : net.edges()) edges.push_back({e.from, e.to, e.length});
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    auto position = [&] {
      const auto e = pick(rng);
      return netkde::NetworkPosition{e, std::floor(std::uniform_real_distribution<double>(0, edges[e].length)(rng))};
    };
    for (int q = 0; q < 10; ++q) {
      const auto a = position(), b = position(), c = position();
      const auto d = [&](netkde::NetworkPosition x, netkde::NetworkPosition y) {
        return netkde::network_distance(x, y, net, oracle::kInf);
      };
      const double ab = d(a, b);
      ++queries;
      if (ab != oracle::exhaustive_position_distance(net.nodes().size(), edges, a.edge, a.offset, b.edge, b.offset)) {
        ++mismatches;
      }
      const bool axioms = d(a, a) == 0.0 && ab >= 0.0 && ab == d(b, a) && d(a, c) <= ab + d(b, c);
      if (!axioms) ++axiom_failures;
    }
  }
  return {mismatches == 0 && axiom_failures == 0,
          std::to_string(queries) + " queries on 200 graphs: " + std::to_string(mismatches) + " oracle mismatches, " +
              std::to_string(axiom_failures) + " metric axiom failures"};
}

// ------------------------------------------------------------------- 4

Outcome morans_i() {
  std::mt19937_64 rng(4);
  const std::size_t n = 20;
  double worst_oracle = 0.0, worst_affine = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    auto link = [&](std::size_t a, std::size_t b) {
      if (a == b || dense[a][b] != 0.0) return;
      pairs.emplace_back(a, b);
      dense[a][b] = dense[b][a] = 1.0;
    };
    for (std::size_t i = 0; i < n; ++i) link(i, (i + 1) % n);  // ring, no isolates
    for (int k = 0; k < 25; ++k) link(rng() % n, rng() % n);
    const autocorr::SpatialWeights w(n, pairs);
    std::vector<double> x(n);
    for (auto& v : x) v = std::uniform_real_distribution<double>(0, 50)(rng);
    const double got = autocorr::global_morans_i(x, w);
    worst_oracle = std::max(worst_oracle, std::abs(got - oracle::morans_i(x, dense)));
    auto y = x;
    for (auto& v : y) v = 3.7 * v - 12.0;
    worst_affine = std::max(worst_affine, std::abs(autocorr::global_morans_i(y, w) - got));
  }
  const std::vector<std::pair<std::size_t, std::size_t>> one = {{0, 1}};
  const double two_zone = autocorr::global_morans_i(std::vector<double>{1.0, 5.0}, autocorr::SpatialWeights(2, one));
  const bool ok = worst_oracle <= 1e-12 && worst_affine <= 1e-12 && std::abs(two_zone + 1.0) <= 1e-12;
  return {ok, "max oracle diff " + fmt("%.3g", worst_oracle) + ", affine diff " + fmt("%.3g", worst_affine) +
                  ", two-zone I = " + fmt("%.15g", two_zone)};
}

// ------------------------------------------------------------------- 5

Outcome permutation_calibration() {
  const std::size_t side = 6, n = side * side;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      for (int dr = 0; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc <= 0) continue;
          const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
          if (rr < static_cast<long>(side) && cc >= 0 && cc < static_cast<long>(side)) {
            pairs.emplace_back(r * side + c, static_cast<std::size_t>(rr) * side + static_cast<std::size_t>(cc));
          }
        }
      }
    }
  }
  const autocorr::SpatialWeights w(n, pairs);
  double sum_global = 0.0, sum_pd = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    auto rng = make_stream(555, static_cast<std::uint64_t>(t));
    std::normal_distribution<double> z;
    std::vector<double> field(n), factor(n);
    for (auto& v : field) v = z(rng);
    for (auto& v : factor) v = z(rng);
    sum_global += autocorr::permutation_test_global(field, w, 199, 1000 + static_cast<std::uint64_t>(t));
    const auto strata = geodetector::stratify("F", factor, 4);
    sum_pd += geodetector::pd_significance(field, strata, 199, 2000 + static_cast<std::uint64_t>(t));
  }
  const double mg = sum_global / trials, mp = sum_pd / trials;
  const bool ok = std::abs(mg - 0.5) <= 0.05 && std::abs(mp - 0.5) <= 0.05;
  return {ok, "mean p: global Moran " + fmt("%.4f", mg) + ", PD " + fmt("%.4f", mp) + " (target 0.5 +- 0.05)"};
}

// ------------------------------------------------------------------- 6

Outcome geodetector_properties() {
  const std::vector<double> y = {1, 2, 3, 4};
  const std::vector<std::size_t> halves = {0, 0, 1, 1};
  const double pd = geodetector::power_determinant(y, halves, 2);
  std::mt19937_64 rng(6);
  int violations = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 30;
    std::vector<double> v(n), fa(n), fb(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = std::uniform_real_distribution<double>(0, 10)(rng);
      fa[i] = std::floor(std::uniform_real_distribution<double>(0, 9)(rng));
      fb[i] = std::floor(std::uniform_real_distribution<double>(0, 9)(rng));
    }
    const auto a = geodetector::stratify("A", fa, 3);
    const auto b = geodetector::stratify("B", fb, 4);
    const auto r = geodetector::interaction_detector(v, a, b);
    if (r.pd_ab < std::max(r.pd_a, r.pd_b) - 1e-12) ++violations;
  }
  const auto cls = geodetector::classify_interaction(0.432, 0.366, 0.562);
  const bool ok = pd == 0.8 && violations == 0 && cls == geodetector::Interaction::enhance_bivariate;
  return {ok, "hand example PD = " + fmt("%.17g", pd) + ", refinement violations " + std::to_string(violations) +
                  "/500, (0.432, 0.366, 0.562) -> " + std::string(geodetector::to_string(cls))};
}

// ------------------------------------------------------------------- 7

Outcome jenks_optimality() {
  std::mt19937_64 rng(7);
  int mismatches = 0, cases = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::vector<double> v(n);
    const bool with_ties = t % 4 == 0;
    for (auto& x : v) {
      x = with_ties ? std::floor(std::uniform_real_distribution<double>(0, 5)(rng))
                    : std::uniform_real_distribution<double>(-100, 100)(rng);
    }
    auto distinct = v;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t k = 1; k <= std::min<std::size_t>(4, distinct.size()); ++k) {
      ++cases;
      const auto want = oracle::exhaustive_jenks(v, k);
      const auto got = geodetector::jenks_breaks(v, k);
      const bool same_ss =
          std::abs(geodetector::within_class_ss(v, got) - want.ss) <= 1e-9 * std::max(1.0, want.ss);
      const bool same_breaks = with_ties || got == want.breaks;
      if (!same_ss || !same_breaks) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(cases) + " (instance, k) cases, " + std::to_string(mismatches) +
                               " differ from the exhaustive optimum"};
}

// ------------------------------------------------------------------- 8

double relative_error(const tensor::Tensor3& fit, const tensor::Tensor3& x) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (fit.data()[i] - x.data()[i]) * (fit.data()[i] - x.data()[i]);
    den += x.data()[i] * x.data()[i];
  }
  return std::sqrt(num / den);
}

tensor::Tensor3 generative(std::size_t i, std::size_t j, std::size_t k, tensor::CoreSize r, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  std::uniform_real_distribution<double> u(0, 1);
  tensor::Tensor3 g(r.spatial, r.age, r.time);
  for (auto& v : g.data()) v = u(rng);
  tensor::Matrix a(i, r.spatial), b(j, r.age), c(k, r.time);
  for (auto* m : {&a, &b, &c})
    for (Eigen::Index e = 0; e < m->size(); ++e) m->data()[e] = u(rng);
  return tensor::n_mode_product(tensor::n_mode_product(tensor::n_mode_product(g, a, 0), b, 1), c, 2);
}

Outcome ntd_recovery() {
  bool monotone = true;

  // full-size core: exact reconstruction is feasible
  auto rng = make_stream(5, 0);
  std::uniform_real_distribution<double> u(0, 1);
  tensor::Tensor3 small(6, 7, 8);
  for (auto& v : small.data()) v = u(rng);
  tensor::NtdOptions full_opts;
  full_opts.seed = 3;
  full_opts.restarts = 1;
  full_opts.max_iter = 5000;
  full_opts.tol = 0.0;
  const auto full = tensor::ntd(small, {6, 7, 8}, full_opts);
  monotone = monotone && full.monotone;
  const double full_err = relative_error(full.reconstruct(), small);

  const auto x = generative(20, 7, 24, {2, 2, 2}, 1);
  tensor::NtdOptions opts;
  opts.seed = 3;
  opts.restarts = 5;
  const auto fit = tensor::ntd(x, {2, 2, 2}, opts);
  monotone = monotone && fit.monotone;
  const double err = relative_error(fit.reconstruct(), x);

  const bool ok = monotone && full_err <= 1e-6 && err <= 1e-2;
  return {ok, std::string("monotone ") + (monotone ? "yes" : "NO") + ", full core 6x7x8 rel. error " +
                  fmt("%.3g", full_err) + " (<= 1e-6), rank-(2,2,2) 20x7x24 rel. error " + fmt("%.3g", err) +
                  " (<= 1e-2)"};
}

// ------------------------------------------------------------------- 9

// Spatial rank 4 with distinct, sparse patterns on every mode.
tensor::Tensor3 sweep_tensor(std::uint64_t seed) {
  const std::size_t zones = 40, rank = 4;
  auto rng = make_stream(seed, 99);
  std::uniform_real_distribution<double> u(0, 1);
  tensor::Matrix a(zones, rank), b(7, 3), c(24, 3);
  for (std::size_t i = 0; i < zones; ++i)
    for (std::size_t s = 0; s < rank; ++s) a(i, s) = i % rank == s ? 1.0 : 0.1 * u(rng);
  for (int j = 0; j < 7; ++j)
    for (int k = 0; k < 3; ++k) b(j, k) = j == 2 * k + 1 ? 1.0 : 0.1 * u(rng);
  const double peaks[3] = {8, 17, 21};
  for (int h = 0; h < 24; ++h)
    for (int k = 0; k < 3; ++k) c(h, k) = 0.05 + std::exp(-0.5 * std::pow((h - peaks[k]) / 1.5, 2));
  tensor::Tensor3 g(rank, 3, 3);
  for (auto& v : g.data()) v = 0.05 * u(rng);
  for (std::size_t r = 0; r < rank; ++r) g(r, r % 3, (r / 3 + r) % 3) = 1.0;
  auto x = tensor::n_mode_product(tensor::n_mode_product(tensor::n_mode_product(g, a, 0), b, 1), c, 2);
  const double mx = *std::max_element(x.data().begin(), x.data().end());
  for (auto& v : x.data()) v /= mx;
  return x;
}

Outcome core_size_sweep() {
  const std::vector<std::size_t> candidates = {1, 2, 3, 4, 5, 6, 7, 8};
  const double elbow_tol = 0.01;
  double total = 0.0;
  bool shape = true;
  std::ostringstream picks;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    tensor::NtdOptions opts;
    opts.seed = seed;
    const auto result = tensor::select_core_size(sweep_tensor(seed), candidates, 3, 3, elbow_tol, opts);
    total += static_cast<double>(result.selected.spatial);
    picks << (seed > 1 ? "," : "") << result.selected.spatial;
    // strictly decreasing up to the true rank, flat (within elbow_tol) after it
    const auto& rows = result.rows;
    for (std::size_t i = 1; i < 4; ++i) shape = shape && rows[i].kl < rows[i - 1].kl;
    for (std::size_t i = 4; i < rows.size(); ++i) shape = shape && std::abs(rows[i].kl - rows[3].kl) <= elbow_tol;
  }
  const double mean = total / 5.0;
  return {std::abs(mean - 4.0) <= 1.0 && shape, "selected " + picks.str() + " (mean " + fmt("%.1f", mean) +
                                                    ", target 4 +- 1), curve decrease-then-plateau " +
                                                    (shape ? "yes" : "NO")};
}

// ------------------------------------------------------------------ 10

Outcome determinism() {
  const std::filesystem::path manifest = std::filesystem::path(CRASHKIT_FIXTURE_DIR) / "minicity" / "manifest.ini";
  testing_support::ScratchDir scratch;
  std::vector<std::filesystem::path> dirs = {scratch.path() / "first", scratch.path() / "second"};
  std::size_t files = 0;
  for (const auto& dir : dirs) {
    const auto m = load_manifest(manifest);
    const auto inputs = pipeline::load_inputs(m);
    const auto outputs = pipeline::cmd_run(m, inputs);
    pipeline::write_outputs(outputs, dir);
    files = outputs.files.size();
  }
  std::size_t differing = 0, compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
    ++compared;
    const auto other = dirs[1] / entry.path().filename();
    if (!std::filesystem::exists(other) ||
        testing_support::slurp(entry.path()) != testing_support::slurp(other)) {
      ++differing;
    }
  }
  std::size_t second = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dirs[1])) ++second;
  const bool ok = differing == 0 && compared == second && files >= 10;
  return {ok, std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "severity-weighted index", 1, swi_index},
      {2, "network KDE mass conservation", 5, kde_mass},
      {3, "network distance vs exhaustive paths", 30, network_distance},
      {4, "global Moran's I", 10, morans_i},
      {5, "permutation p-value calibration", 120, permutation_calibration},
      {6, "geodetector PD, refinement, interaction class", 30, geodetector_properties},
      {7, "Jenks breaks optimality", 30, jenks_optimality},
      {8, "nonnegative Tucker decomposition", 120, ntd_recovery},
      {9, "core-size sweep elbow", 300, core_size_sweep},
      {10, "end-to-end determinism", 120, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = o.ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.2fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds,
                c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
