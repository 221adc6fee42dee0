#include "crashkit/netkde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>
#include <utility>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "crashkit/geometry.hpp"

namespace crashkit::netkde {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Geometry endpoints must sit on their nodes within this distance.
constexpr double kAnchorTolerance = 1e-3;

using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using SegmentRef = std::pair<std::size_t, std::size_t>;
using IndexValue = std::pair<BBox, SegmentRef>;

}  // namespace

struct RoadNetwork::SegmentIndex {
  bgi::rtree<IndexValue, bgi::quadratic<16>> tree;
};

RoadNetwork::RoadNetwork(std::vector<NetworkNode> nodes, std::vector<EdgeSpec> edges)
    : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const NetworkNode& a, const NetworkNode& b) { return a.id < b.id; });
  std::unordered_map<std::string, std::size_t> node_index;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
      throw ValidationError("node '" + n.id + "': non-finite coordinates");
    }
    if (!node_index.emplace(n.id, i).second) {
      throw ValidationError("duplicate node id '" + n.id + "'");
    }
  }

  std::sort(edges.begin(), edges.end(),
            [](const EdgeSpec& a, const EdgeSpec& b) { return a.id < b.id; });
  edges_.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& spec = edges[i];
    if (i > 0 && edges[i - 1].id == spec.id) {
      throw ValidationError("duplicate edge id '" + spec.id + "'");
    }
    auto from = node_index.find(spec.from);
    auto to = node_index.find(spec.to);
    if (from == node_index.end() || to == node_index.end()) {
      throw ValidationError("edge '" + spec.id + "' references unknown node '" +
                            (from == node_index.end() ? spec.from : spec.to) + "'");
    }
    NetworkEdge edge{spec.id, from->second, to->second, std::move(spec.geometry), 0.0};
    const Point a = nodes_[edge.from].position;
    const Point b = nodes_[edge.to].position;
    if (edge.geometry.empty()) {
      edge.geometry = {a, b};
    } else {
      if (edge.geometry.size() < 2) {
        throw ValidationError("edge '" + edge.id + "': geometry needs at least two vertices");
      }
      const bool forward = geometry::distance(edge.geometry.front(), a) <= kAnchorTolerance &&
                           geometry::distance(edge.geometry.back(), b) <= kAnchorTolerance;
      const bool backward = geometry::distance(edge.geometry.front(), b) <= kAnchorTolerance &&
                            geometry::distance(edge.geometry.back(), a) <= kAnchorTolerance;
      if (!forward && backward) std::reverse(edge.geometry.begin(), edge.geometry.end());
      if (!forward && !backward) {
        throw ValidationError("edge '" + edge.id + "': geometry endpoints do not match nodes '" +
                              spec.from + "' and '" + spec.to + "'");
      }
      edge.geometry.front() = a;
      edge.geometry.back() = b;
    }
    edge.length = geometry::polyline_length(edge.geometry);
    if (!(edge.length > 0.0) || !std::isfinite(edge.length)) {
      throw ValidationError("edge '" + edge.id + "': zero or non-finite length");
    }
    edges_.push_back(std::move(edge));
  }

  incident_.assign(nodes_.size(), {});
  cumulative_.reserve(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    incident_[edge.from].push_back(e);
    if (edge.to != edge.from) incident_[edge.to].push_back(e);
    std::vector<double> cum(edge.geometry.size(), 0.0);
    for (std::size_t v = 1; v < edge.geometry.size(); ++v) {
      cum[v] = cum[v - 1] + geometry::distance(edge.geometry[v - 1], edge.geometry[v]);
    }
    cumulative_.push_back(std::move(cum));
  }
  build_index();
}

RoadNetwork::RoadNetwork(const RoadNetwork& other)
    : nodes_(other.nodes_),
      edges_(other.edges_),
      incident_(other.incident_),
      cumulative_(other.cumulative_) {
  build_index();
}

RoadNetwork::RoadNetwork(RoadNetwork&&) noexcept = default;
RoadNetwork& RoadNetwork::operator=(RoadNetwork&&) noexcept = default;
RoadNetwork::~RoadNetwork() = default;

void RoadNetwork::build_index() {
  std::vector<IndexValue> values;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& g = edges_[e].geometry;
    for (std::size_t s = 0; s + 1 < g.size(); ++s) {
      BBox box(BPoint(std::min(g[s].x, g[s + 1].x), std::min(g[s].y, g[s + 1].y)),
               BPoint(std::max(g[s].x, g[s + 1].x), std::max(g[s].y, g[s + 1].y)));
      values.emplace_back(box, SegmentRef{e, s});
    }
  }
  index_ = std::make_unique<SegmentIndex>();
  index_->tree = bgi::rtree<IndexValue, bgi::quadratic<16>>(values.begin(), values.end());
}

std::optional<std::size_t> RoadNetwork::edge_index(const std::string& id) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                             [](const NetworkEdge& e, const std::string& key) { return e.id < key; });
  if (it == edges_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

double RoadNetwork::total_length() const noexcept {
  double total = 0.0;
  for (const auto& e : edges_) total += e.length;
  return total;
}

Point RoadNetwork::point_at(std::size_t edge, double offset) const {
  const auto& g = edges_[edge].geometry;
  const auto& cum = cumulative_[edge];
  offset = std::clamp(offset, 0.0, cum.back());
  auto it = std::upper_bound(cum.begin(), cum.end(), offset);
  if (it == cum.end()) return g.back();
  const std::size_t v = static_cast<std::size_t>(it - cum.begin());  // v >= 1
  const double seg = cum[v] - cum[v - 1];
  const double t = seg > 0.0 ? (offset - cum[v - 1]) / seg : 0.0;
  return {g[v - 1].x + t * (g[v].x - g[v - 1].x), g[v - 1].y + t * (g[v].y - g[v - 1].y)};
}

std::vector<Point> RoadNetwork::subline(std::size_t edge, double start, double end) const {
  const auto& g = edges_[edge].geometry;
  const auto& cum = cumulative_[edge];
  std::vector<Point> out{point_at(edge, start)};
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (cum[v] > start && cum[v] < end) out.push_back(g[v]);
  }
  out.push_back(point_at(edge, end));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> RoadNetwork::segments_near(Point p,
                                                                            double radius) const {
  BBox query(BPoint(p.x - radius, p.y - radius), BPoint(p.x + radius, p.y + radius));
  std::vector<IndexValue> hits;
  index_->tree.query(bgi::intersects(query), std::back_inserter(hits));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Snap> snap_to_network(Point point, const RoadNetwork& network, double tolerance) {
  constexpr double kTie = 1e-9;
  std::optional<Snap> best;
  for (auto [e, s] : network.segments_near(point, tolerance)) {
    const auto& g = network.edges()[e].geometry;
    const auto proj = geometry::project_onto_segment(point, g[s], g[s + 1]);
    if (proj.distance > tolerance) continue;
    double offset = 0.0;
    for (std::size_t v = 0; v < s; ++v) offset += geometry::distance(g[v], g[v + 1]);
    offset += proj.t * geometry::distance(g[s], g[s + 1]);
    offset = std::min(offset, network.edges()[e].length);
    // candidates arrive sorted by (edge, segment): only a strictly nearer
    // hit may displace an earlier one
    if (!best || proj.distance < best->distance - kTie) {
      best = Snap{{e, offset}, proj.distance};
    }
  }
  return best;
}

std::vector<Lixel> lixelize(const RoadNetwork& network, double unit) {
  if (!(unit > 0.0)) throw std::invalid_argument("lixelize: unit must be positive");
  std::vector<Lixel> lixels;
  std::size_t id = 0;
  for (std::size_t e = 0; e < network.edges().size(); ++e) {
    const double length = network.edges()[e].length;
    const double ratio = length / unit;
    auto count = static_cast<std::size_t>(std::ceil(ratio));
    // lengths that are an exact multiple up to rounding noise
    if (count > 1 && std::abs(ratio - std::round(ratio)) < 1e-9 * ratio) {
      count = static_cast<std::size_t>(std::round(ratio));
    }
    count = std::max<std::size_t>(count, 1);
    for (std::size_t k = 0; k < count; ++k) {
      const double start = static_cast<double>(k) * unit;
      const double end = k + 1 == count ? length : static_cast<double>(k + 1) * unit;
      lixels.push_back(Lixel{id++, e, start, end});
    }
  }
  return lixels;
}

DistanceField::DistanceField(const RoadNetwork& network, NetworkPosition source, double cutoff)
    : network_(&network), source_(source), cutoff_(cutoff), node_dist_(network.nodes().size(), kInf) {
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  const auto& edge = network.edges().at(source.edge);
  auto relax = [&](std::size_t node, double d) {
    if (d <= cutoff_ && d < node_dist_[node]) {
      node_dist_[node] = d;
      queue.emplace(d, node);
    }
  };
  relax(edge.from, source.offset);
  relax(edge.to, edge.length - source.offset);

  std::vector<bool> settled(node_dist_.size(), false);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (settled[u] || d > node_dist_[u]) continue;
    settled[u] = true;
    reached_.push_back(u);
    for (std::size_t e : network.incident(u)) {
      const auto& ed = network.edges()[e];
      const std::size_t v = ed.from == u ? ed.to : ed.from;
      relax(v, d + ed.length);
    }
  }
}

double DistanceField::to(NetworkPosition target) const {
  const auto& edge = network_->edges().at(target.edge);
  double best = kInf;
  if (target.edge == source_.edge) best = std::abs(target.offset - source_.offset);
  best = std::min(best, node_dist_[edge.from] + target.offset);
  best = std::min(best, node_dist_[edge.to] + (edge.length - target.offset));
  return best <= cutoff_ ? best : kInf;
}

double network_distance(NetworkPosition a, NetworkPosition b, const RoadNetwork& network,
                        double cutoff) {
  return DistanceField(network, a, cutoff).to(b);
}

void KdeConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(bandwidth)) throw std::invalid_argument("bandwidth must be positive");
  if (!positive(lixel_unit)) throw std::invalid_argument("lixel_unit must be positive");
  if (!positive(snap_tolerance)) throw std::invalid_argument("snap_tolerance must be positive");
  if (!positive(truncation_radius) || truncation_radius < bandwidth) {
    throw std::invalid_argument("truncation_radius must be at least the bandwidth");
  }
}

double gaussian_kernel(double u) noexcept {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<double> net_kde(std::span<const WeightedEvent> events, std::span<const Lixel> lixels,
                            const KdeConfig& config, const RoadNetwork& network) {
  config.validate();
  const std::size_t n_edges = network.edges().size();
  std::vector<std::vector<std::size_t>> by_edge(n_edges);
  for (std::size_t l = 0; l < lixels.size(); ++l) by_edge.at(lixels[l].edge).push_back(l);

  std::vector<WeightedEvent> sorted(events.begin(), events.end());
  for (const auto& ev : sorted) {
    if (!(ev.weight >= 0.0)) throw std::invalid_argument("net_kde: negative event weight");
  }
  std::sort(sorted.begin(), sorted.end(), [](const WeightedEvent& a, const WeightedEvent& b) {
    if (a.position.edge != b.position.edge) return a.position.edge < b.position.edge;
    if (a.position.offset != b.position.offset) return a.position.offset < b.position.offset;
    return a.weight < b.weight;
  });

  std::vector<double> density(lixels.size(), 0.0);
  std::vector<std::size_t> stamp(n_edges, 0);
  std::size_t round = 0;
  const double r = config.bandwidth;
  for (const auto& ev : sorted) {
    if (ev.weight == 0.0) continue;
    ++round;
    DistanceField field(network, ev.position, config.truncation_radius);
    auto visit = [&](std::size_t e) {
      if (stamp[e] == round) return;
      stamp[e] = round;
      for (std::size_t l : by_edge[e]) {
        const double d = field.to(lixels[l].center());
        if (std::isfinite(d)) density[l] += ev.weight * gaussian_kernel(d / r);
      }
    };
    visit(ev.position.edge);
    for (std::size_t node : field.reached()) {
      for (std::size_t e : network.incident(node)) visit(e);
    }
  }
  for (auto& d : density) d /= r;
  return density;
}

std::vector<RankedLixel> rank_segments(std::span<const double> densities,
                                       std::span<const Lixel> lixels, std::size_t k) {
  if (densities.size() != lixels.size()) {
    throw std::invalid_argument("rank_segments: densities and lixels differ in length");
  }
  std::vector<std::size_t> order(lixels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  k = std::min(k, order.size());
  auto cmp = [&](std::size_t a, std::size_t b) {
    if (densities[a] != densities[b]) return densities[a] > densities[b];
    return lixels[a].id < lixels[b].id;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), cmp);
  std::vector<RankedLixel> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& lx = lixels[order[i]];
    out.push_back(RankedLixel{lx.id, lx.edge, densities[order[i]]});
  }
  return out;
}

}  // namespace crashkit::netkde
