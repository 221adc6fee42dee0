#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crashkit/common.hpp"

namespace crashkit::netkde {

struct NetworkNode {
  std::string id;
  Point position;
};

struct NetworkEdge {
  std::string id;
  std::size_t from = 0;  // node indices
  std::size_t to = 0;
  std::vector<Point> geometry;  // starts at `from`, ends at `to`
  double length = 0.0;
};

struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  std::vector<Point> geometry;  // empty: straight segment between the nodes
};

/// Undirected road graph with polyline edge geometry. Nodes and edges are
/// stored sorted by id, so index order equals id order.
class RoadNetwork {
 public:
  /// Throws ValidationError on dangling node references, duplicate ids,
  /// zero-length edges or geometry not anchored at its end nodes.
  RoadNetwork(std::vector<NetworkNode> nodes, std::vector<EdgeSpec> edges);
  RoadNetwork(const RoadNetwork&);
  RoadNetwork(RoadNetwork&&) noexcept;
  RoadNetwork& operator=(RoadNetwork&&) noexcept;
  ~RoadNetwork();

  const std::vector<NetworkNode>& nodes() const noexcept { return nodes_; }
  const std::vector<NetworkEdge>& edges() const noexcept { return edges_; }
  /// Edge indices incident to a node (self loops appear once).
  const std::vector<std::size_t>& incident(std::size_t node) const { return incident_[node]; }
  std::optional<std::size_t> edge_index(const std::string& id) const;
  double total_length() const noexcept;

  Point point_at(std::size_t edge, double offset) const;
  /// Sub-polyline of an edge between two offsets.
  std::vector<Point> subline(std::size_t edge, double start, double end) const;

  /// Edge segments whose bounding box lies within `radius` of `p`, as
  /// (edge index, segment index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> segments_near(Point p, double radius) const;

 private:
  struct SegmentIndex;
  void build_index();

  std::vector<NetworkNode> nodes_;
  std::vector<NetworkEdge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::vector<double>> cumulative_;  // arc length at each vertex, per edge
  std::unique_ptr<SegmentIndex> index_;
};

/// Location along an edge, measured from the edge's `from` node.
struct NetworkPosition {
  std::size_t edge = 0;
  double offset = 0.0;
};

struct Snap {
  NetworkPosition position;
  double distance = 0.0;
};

/// Orthogonal projection onto the nearest edge; nullopt beyond `tolerance`.
/// Equally near edges resolve to the smallest edge id.
std::optional<Snap> snap_to_network(Point point, const RoadNetwork& network, double tolerance);

struct Lixel {
  std::size_t id = 0;
  std::size_t edge = 0;
  double start = 0.0;
  double end = 0.0;

  double length() const noexcept { return end - start; }
  NetworkPosition center() const noexcept { return {edge, 0.5 * (start + end)}; }
};

/// Splits every edge into ceil(length / unit) lixels; all but the last on an
/// edge are exactly `unit` long. Ids run consecutively in (edge, index) order.
std::vector<Lixel> lixelize(const RoadNetwork& network, double unit);

/// Single-source shortest network distances from a position, explored up to
/// `cutoff`. Distances beyond the cutoff read as infinity.
class DistanceField {
 public:
  DistanceField(const RoadNetwork& network, NetworkPosition source, double cutoff);

  double to(NetworkPosition target) const;
  double node_distance(std::size_t node) const { return node_dist_[node]; }
  /// Nodes settled within the cutoff.
  const std::vector<std::size_t>& reached() const noexcept { return reached_; }
  double cutoff() const noexcept { return cutoff_; }

 private:
  const RoadNetwork* network_;
  NetworkPosition source_;
  double cutoff_;
  std::vector<double> node_dist_;
  std::vector<std::size_t> reached_;
};

double network_distance(NetworkPosition a, NetworkPosition b, const RoadNetwork& network,
                        double cutoff);

enum class WeightMode { unit, swi };

struct KdeConfig {
  double bandwidth = 200.0;
  double lixel_unit = 200.0;
  double snap_tolerance = 10.0;
  double truncation_radius = 600.0;
  WeightMode weight_mode = WeightMode::unit;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct WeightedEvent {
  NetworkPosition position;
  double weight = 1.0;
};

/// Standard normal density.
double gaussian_kernel(double u) noexcept;

/// Network KDE evaluated at lixel centers:
///   density = (1/r) * sum_i w_i K(d_i / r),  d_i > truncation_radius dropped.
/// Accumulation order is fixed by sorting events, so the result does not
/// depend on input order.
std::vector<double> net_kde(std::span<const WeightedEvent> events, std::span<const Lixel> lixels,
                            const KdeConfig& config, const RoadNetwork& network);

struct RankedLixel {
  std::size_t lixel_id = 0;
  std::size_t edge = 0;
  double density = 0.0;
};

/// Top-k by density descending, ties by lixel id ascending.
std::vector<RankedLixel> rank_segments(std::span<const double> densities,
                                       std::span<const Lixel> lixels, std::size_t k);

}  // namespace crashkit::netkde
