#include "crashkit/autocorr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "crashkit/geometry.hpp"
#include "crashkit/random.hpp"

namespace crashkit::autocorr {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

// Vertex matching and boundary-contact tolerance, meters.
constexpr double kContactTolerance = 1e-6;
// Permutation statistics here are scale-free; replicate values within this
// distance of the observed one count as ties (and therefore as extreme).
constexpr double kTieTolerance = 1e-12;

struct Deviations {
  std::vector<double> d;
  double sum_sq = 0.0;
};

Deviations deviations(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  double scale = 0.0;
  for (double v : values) {
    mean += v;
    scale = std::max(scale, std::abs(v));
  }
  mean /= n;
  Deviations out;
  out.d.reserve(values.size());
  for (double v : values) {
    out.d.push_back(v - mean);
    out.sum_sq += (v - mean) * (v - mean);
  }
  const double floor = 1e-12 * scale;
  if (values.empty() || out.sum_sq <= n * floor * floor) {
    throw std::domain_error("zero variance: field is constant");
  }
  return out;
}

double cross_product(std::span<const double> d, const SpatialWeights& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double lag = 0.0;
    for (std::size_t j : w.neighbors(i)) lag += d[j];
    acc += d[i] * lag;
  }
  return acc;
}

bool is_extreme(double replicate, double observed, Tail tail) {
  if (tail == Tail::folded) tail = observed >= 0.0 ? Tail::greater : Tail::less;
  return tail == Tail::greater ? replicate >= observed - kTieTolerance
                               : replicate <= observed + kTieTolerance;
}

std::pair<long long, long long> rounded_key(Point p) {
  return {std::llround(p.x / kContactTolerance), std::llround(p.y / kContactTolerance)};
}

bool touches(const ingest::Zone& a, const ingest::Zone& b,
             const std::set<std::pair<long long, long long>>& b_vertices) {
  for (const auto& ring : a.rings) {
    for (const auto& p : ring) {
      if (b_vertices.count(rounded_key(p))) return true;
    }
  }
  for (const auto& ring : a.rings) {
    for (const auto& p : ring) {
      if (geometry::on_boundary(p, b.rings, kContactTolerance)) return true;
    }
  }
  for (const auto& ring : b.rings) {
    for (const auto& p : ring) {
      if (geometry::on_boundary(p, a.rings, kContactTolerance)) return true;
    }
  }
  return false;
}

}  // namespace

SpatialWeights::SpatialWeights(std::size_t n,
                               std::span<const std::pair<std::size_t, std::size_t>> pairs)
    : neighbors_(n) {
  for (auto [a, b] : pairs) {
    if (a >= n || b >= n) throw std::out_of_range("SpatialWeights: zone index out of range");
    if (a == b) continue;
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
  }
  for (auto& list : neighbors_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

std::size_t SpatialWeights::isolate_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(neighbors_.begin(), neighbors_.end(),
                                                [](const auto& l) { return l.empty(); }));
}

std::size_t SpatialWeights::link_count() const noexcept {
  std::size_t total = 0;
  for (const auto& l : neighbors_) total += l.size();
  return total;
}

double SpatialWeights::weight(std::size_t i, std::size_t j, WeightConvention convention) const {
  const auto& list = neighbors_.at(i);
  if (!std::binary_search(list.begin(), list.end(), j)) return 0.0;
  return convention == WeightConvention::binary ? 1.0 : 1.0 / static_cast<double>(list.size());
}

SpatialWeights queen_weights(const ingest::ZoneSet& zones) {
  using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
  using BBox = bg::model::box<BPoint>;
  using Value = std::pair<BBox, std::size_t>;

  const auto& list = zones.zones();
  std::vector<Value> boxes;
  std::vector<std::set<std::pair<long long, long long>>> vertex_keys(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].rings.empty()) continue;
    const auto box = geometry::bounding_box(list[i].rings);
    boxes.emplace_back(BBox(BPoint(box.min.x - kContactTolerance, box.min.y - kContactTolerance),
                            BPoint(box.max.x + kContactTolerance, box.max.y + kContactTolerance)),
                       i);
    for (const auto& ring : list[i].rings) {
      for (const auto& p : ring) vertex_keys[i].insert(rounded_key(p));
    }
  }
  bgi::rtree<Value, bgi::quadratic<16>> tree(boxes.begin(), boxes.end());

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [box, i] : boxes) {
    std::vector<Value> hits;
    tree.query(bgi::intersects(box), std::back_inserter(hits));
    std::sort(hits.begin(), hits.end(), [](const Value& a, const Value& b) { return a.second < b.second; });
    for (const auto& [other_box, j] : hits) {
      if (j <= i) continue;
      if (touches(list[i], list[j], vertex_keys[j])) pairs.emplace_back(i, j);
    }
  }
  return SpatialWeights(list.size(), pairs);
}

SpatialWeights weights_from_adjacency(const std::vector<std::string>& zone_ids,
                                      std::span<const std::pair<std::string, std::string>> pairs,
                                      std::vector<std::string>* warnings) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < zone_ids.size(); ++i) index.emplace(zone_ids[i], i);

  std::set<std::pair<std::size_t, std::size_t>> directed;
  std::size_t unknown = 0;
  std::size_t self = 0;
  for (const auto& [a, b] : pairs) {
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      ++unknown;
      continue;
    }
    if (ia->second == ib->second) {
      ++self;
      continue;
    }
    directed.emplace(ia->second, ib->second);
  }
  std::size_t reciprocal = 0;
  std::size_t one_way = 0;
  for (auto [a, b] : directed) {
    (directed.count({b, a}) ? reciprocal : one_way)++;
  }
  if (warnings) {
    if (reciprocal > 0 && one_way > 0) {
      warnings->push_back("adjacency is asymmetric: " + std::to_string(one_way) +
                          " one-way pairs symmetrized");
    }
    if (unknown > 0) warnings->push_back(std::to_string(unknown) + " adjacency pairs name unknown zones");
    if (self > 0) warnings->push_back(std::to_string(self) + " self-adjacency pairs ignored");
  }
  std::vector<std::pair<std::size_t, std::size_t>> undirected(directed.begin(), directed.end());
  return SpatialWeights(zone_ids.size(), undirected);
}

double global_morans_i(std::span<const double> values, const SpatialWeights& w) {
  if (values.size() != w.size()) throw std::invalid_argument("global_morans_i: size mismatch");
  const auto links = w.link_count();
  if (links == 0) throw std::domain_error("no neighbor pairs: every zone is an isolate");
  const auto dev = deviations(values);
  const auto n = static_cast<double>(values.size());
  return n * cross_product(dev.d, w) / (static_cast<double>(links) * dev.sum_sq);
}

double permutation_test_global(std::span<const double> values, const SpatialWeights& w,
                               std::size_t n_perm, std::uint64_t seed, Tail tail) {
  if (n_perm < 1) throw std::invalid_argument("permutation_test_global: n_perm must be positive");
  const double observed = global_morans_i(values, w);
  const auto dev = deviations(values);
  const double scale = static_cast<double>(values.size()) /
                       (static_cast<double>(w.link_count()) * dev.sum_sq);
  std::size_t extreme = 0;
  std::vector<double> shuffled(dev.d.size());
  for (std::size_t b = 0; b < n_perm; ++b) {
    auto rng = make_stream(seed, b);
    shuffled = dev.d;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (is_extreme(scale * cross_product(shuffled, w), observed, tail)) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + n_perm);
}

std::string_view to_string(LisaClass c) {
  switch (c) {
    case LisaClass::HH: return "HH";
    case LisaClass::LL: return "LL";
    case LisaClass::HL: return "HL";
    case LisaClass::LH: return "LH";
    case LisaClass::not_significant: return "not_significant";
  }
  return "?";
}

std::vector<LisaResult> lisa(const ZoneField& field, const SpatialWeights& w, std::size_t n_perm,
                             std::uint64_t seed, double alpha) {
  const std::size_t n = field.size();
  if (n != w.size()) throw std::invalid_argument("lisa: field and weights differ in size");
  if (n_perm < 1) throw std::invalid_argument("lisa: n_perm must be positive");
  const auto dev = deviations(field.values);
  const double sigma = std::sqrt(dev.sum_sq / static_cast<double>(n));

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = dev.d[i] / sigma;

  std::vector<LisaResult> out(n);
  std::vector<std::size_t> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.zone_id = field.zone_ids[i];
    r.value = field.values[i];
    r.z = z[i];
    const auto& nb = w.neighbors(i);
    if (nb.empty()) continue;  // isolate: lag 0, p 1
    double lag = 0.0;
    for (std::size_t j : nb) lag += z[j];
    lag /= static_cast<double>(nb.size());
    r.lag = lag;
    r.local_i = z[i] * lag;
    if (std::abs(z[i]) <= kTieTolerance || std::abs(lag) <= kTieTolerance) continue;

    pool.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) pool.push_back(j);
    }
    auto rng = make_stream(seed, i);
    const std::size_t k = nb.size();
    std::size_t extreme = 0;
    for (std::size_t b = 0; b < n_perm; ++b) {
      double sum = 0.0;
      // partial Fisher-Yates: first k slots become a uniform k-subset
      for (std::size_t s = 0; s < k; ++s) {
        std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
        std::swap(pool[s], pool[pick(rng)]);
        sum += z[pool[s]];
      }
      const double replicate = z[i] * sum / static_cast<double>(k);
      if (is_extreme(replicate, r.local_i, Tail::folded)) ++extreme;
    }
    r.p = static_cast<double>(1 + extreme) / static_cast<double>(1 + n_perm);
    if (r.p <= alpha) {
      if (z[i] > 0) {
        r.cls = lag > 0 ? LisaClass::HH : LisaClass::HL;
      } else {
        r.cls = lag > 0 ? LisaClass::LH : LisaClass::LL;
      }
    }
  }
  return out;
}

std::string_view to_string(ClusterChange c) {
  switch (c) {
    case ClusterChange::unchanged: return "unchanged";
    case ClusterChange::gained: return "gained";
    case ClusterChange::lost: return "lost";
    case ClusterChange::switched: return "switched";
  }
  return "?";
}

std::vector<ClusterComparison> compare_clusters(std::span<const LisaResult> before,
                                                std::span<const LisaResult> after) {
  std::map<std::string, LisaClass> a;
  std::map<std::string, LisaClass> b;
  for (const auto& r : before) a[r.zone_id] = r.cls;
  for (const auto& r : after) b[r.zone_id] = r.cls;
  if (a.size() != before.size() || b.size() != after.size()) {
    throw std::invalid_argument("compare_clusters: duplicate zone ids");
  }
  if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin(),
                                          [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw std::invalid_argument("compare_clusters: zone sets differ");
  }
  std::vector<ClusterComparison> out;
  out.reserve(a.size());
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    ClusterComparison c{ia->first, ia->second, ib->second, ClusterChange::unchanged};
    const bool sig_before = c.before != LisaClass::not_significant;
    const bool sig_after = c.after != LisaClass::not_significant;
    if (c.before == c.after) {
      c.change = ClusterChange::unchanged;
    } else if (!sig_before) {
      c.change = ClusterChange::gained;
    } else if (!sig_after) {
      c.change = ClusterChange::lost;
    } else {
      c.change = ClusterChange::switched;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace crashkit::autocorr
