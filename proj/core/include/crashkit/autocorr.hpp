#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crashkit/common.hpp"
#include "crashkit/ingest.hpp"

namespace crashkit::autocorr {

enum class WeightConvention { binary, row_standardized };

/// Symmetric contiguity relation over zones 0..n-1, no self-neighbors.
class SpatialWeights {
 public:
  SpatialWeights() = default;
  /// Builds from undirected index pairs; duplicates and order are ignored.
  SpatialWeights(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> pairs);

  std::size_t size() const noexcept { return neighbors_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  bool is_isolate(std::size_t i) const { return neighbors_[i].empty(); }
  std::size_t isolate_count() const noexcept;
  /// Number of ordered neighbor pairs, i.e. the binary weight sum S0.
  std::size_t link_count() const noexcept;
  double weight(std::size_t i, std::size_t j, WeightConvention convention) const;

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Queen contiguity: zones are neighbors when their boundaries share a vertex
/// (after rounding to 1e-6 m) or touch along a segment. Zone order follows the
/// ZoneSet (sorted by id).
SpatialWeights queen_weights(const ingest::ZoneSet& zones);

/// Explicit adjacency pairs by zone id. Duplicates are removed; pairs naming
/// unknown zones or a zone with itself are skipped. When the list is
/// directed (some pair appears both ways) but incomplete, it is symmetrized
/// and a warning is appended.
SpatialWeights weights_from_adjacency(const std::vector<std::string>& zone_ids,
                                      std::span<const std::pair<std::string, std::string>> pairs,
                                      std::vector<std::string>* warnings = nullptr);

/// Global Moran's I with binary weights. Throws std::domain_error on a
/// constant field or when no zone has a neighbor.
double global_morans_i(std::span<const double> values, const SpatialWeights& w);

/// Which tail of the permutation distribution counts as "at least as extreme".
///   greater: upper tail always (test for positive autocorrelation)
///   less:    lower tail always
///   folded:  upper tail for a nonnegative observed statistic, lower otherwise
enum class Tail { greater, less, folded };

/// (1 + #extreme) / (1 + n_perm) under random relabeling of zone values.
/// Deterministic in (seed, replicate index).
double permutation_test_global(std::span<const double> values, const SpatialWeights& w,
                               std::size_t n_perm, std::uint64_t seed, Tail tail = Tail::greater);

enum class LisaClass { HH, LL, HL, LH, not_significant };
std::string_view to_string(LisaClass c);

struct LisaResult {
  std::string zone_id;
  double value = 0.0;
  double z = 0.0;
  double lag = 0.0;      // row-standardized spatial lag of z
  double local_i = 0.0;  // z * lag
  double p = 1.0;
  LisaClass cls = LisaClass::not_significant;
};

/// Local Moran's I with conditional permutation inference (the zone's value
/// stays fixed; its neighbors are drawn from the remaining n-1 values).
/// Pseudo p-values use the folded tail in the direction of the observed
/// statistic. Isolates get lag 0, p = 1.
std::vector<LisaResult> lisa(const ZoneField& field, const SpatialWeights& w, std::size_t n_perm,
                             std::uint64_t seed, double alpha = 0.05);

enum class ClusterChange { unchanged, gained, lost, switched };
std::string_view to_string(ClusterChange c);

struct ClusterComparison {
  std::string zone_id;
  LisaClass before = LisaClass::not_significant;
  LisaClass after = LisaClass::not_significant;
  ClusterChange change = ClusterChange::unchanged;
};

/// Zone-wise comparison of two LISA runs over the same zone universe.
std::vector<ClusterComparison> compare_clusters(std::span<const LisaResult> before,
                                                std::span<const LisaResult> after);

}  // namespace crashkit::autocorr
