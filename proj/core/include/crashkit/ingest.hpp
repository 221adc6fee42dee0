#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crashkit/common.hpp"
#include "crashkit/geometry.hpp"
#include "crashkit/netkde.hpp"

namespace crashkit::ingest {

enum class Severity : std::uint8_t { fatal, serious, slight };

/// The seven casualty age bands; the tensor age axis follows this order.
enum class AgeGroup : std::uint8_t {
  age_0_18,
  age_19_25,
  age_26_35,
  age_36_45,
  age_46_55,
  age_56_65,
  over_65,
};
inline constexpr std::size_t kAgeGroupCount = 7;

enum class DayClass : std::uint8_t { weekday, weekend };

std::string_view to_string(Severity s);
std::string_view to_string(AgeGroup g);
std::string_view to_string(DayClass d);

/// Case-insensitive, whitespace-trimmed.
std::optional<Severity> parse_severity(std::string_view token);
/// Accepts "0-18", "0–18", "over-65", "Over 65", "65+" and similar spellings.
std::optional<AgeGroup> parse_age_group(std::string_view token);
std::optional<DayClass> parse_day_class(std::string_view token);

/// Calendar datetime at minute precision.
struct DateTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;

  /// 0 = Monday ... 6 = Sunday.
  int weekday() const;
  DayClass day_class() const { return weekday() >= 5 ? DayClass::weekend : DayClass::weekday; }
};

/// ISO 8601 "YYYY-MM-DDTHH:MM[:SS]" (a space may replace the 'T'; a trailing
/// 'Z' or numeric offset is ignored, times are taken as local).
std::optional<DateTime> parse_datetime(std::string_view text);

struct CrashRecord {
  std::string id;
  Point position;
  DateTime when;
  Severity severity = Severity::slight;
  AgeGroup age_group = AgeGroup::age_0_18;
  std::optional<std::string> zone_id;
};

struct SeverityCounts {
  std::uint64_t fatal = 0;
  std::uint64_t serious = 0;
  std::uint64_t slight = 0;

  SeverityCounts& operator+=(const SeverityCounts& o) {
    fatal += o.fatal;
    serious += o.serious;
    slight += o.slight;
    return *this;
  }
  friend SeverityCounts operator+(SeverityCounts a, const SeverityCounts& b) { return a += b; }
  friend bool operator==(const SeverityCounts&, const SeverityCounts&) = default;
};

/// Severity-weighted index: 5 per fatal, 3 per serious, 1 per slight crash.
constexpr std::uint64_t compute_swi(const SeverityCounts& c) noexcept {
  return 5 * c.fatal + 3 * c.serious + c.slight;
}

constexpr std::uint64_t severity_weight(Severity s) noexcept {
  switch (s) {
    case Severity::fatal: return 5;
    case Severity::serious: return 3;
    case Severity::slight: return 1;
  }
  return 0;
}

/// POI category registry. Starts with the nine standard classes; more can be
/// registered from configuration. Names are stored upper-case.
class PoiCategories {
 public:
  PoiCategories();

  void add(std::string_view name);
  std::optional<std::string> normalize(std::string_view token) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

struct PoiRecord {
  std::string id;
  std::string category;
  Point position;
  std::optional<std::string> zone_id;
};

struct Zone {
  std::string zone_id;
  std::vector<geometry::Ring> rings;  // empty when zones come from an adjacency file
  std::set<std::string> neighbors;
};

/// Validates ring closure, vertex count and nonzero area.
void validate_zone(const Zone& zone);

/// Linear-scan point location: even-odd test with boundary counted inside;
/// the smallest matching zone_id wins.
std::optional<std::string> assign_zone(Point point, std::span<const Zone> zones);

/// Ordered zone universe (sorted by zone_id) with a spatial index for
/// point location. Same semantics as assign_zone().
class ZoneSet {
 public:
  ZoneSet();
  explicit ZoneSet(std::vector<Zone> zones);
  ZoneSet(ZoneSet&&) noexcept;
  ZoneSet& operator=(ZoneSet&&) noexcept;
  ~ZoneSet();

  std::size_t size() const noexcept { return zones_.size(); }
  bool empty() const noexcept { return zones_.empty(); }
  bool has_geometry() const noexcept { return has_geometry_; }
  const std::vector<Zone>& zones() const noexcept { return zones_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::optional<std::size_t> index_of(std::string_view zone_id) const;
  std::optional<std::size_t> locate(Point p) const;

 private:
  struct Index;
  std::vector<Zone> zones_;
  std::vector<std::string> ids_;
  bool has_geometry_ = false;
  std::unique_ptr<Index> index_;
};

/// Zone index per crash: the explicit zone_id column when present, otherwise
/// point location. nullopt marks an unassigned crash.
std::vector<std::optional<std::size_t>> zone_indices(std::span<const CrashRecord> crashes,
                                                     const ZoneSet& zones);

/// Optional restriction on which crashes enter an aggregate.
struct CrashFilter {
  std::optional<AgeGroup> age_group;
  std::optional<DayClass> day_class;
  /// Half-open hour range [first, second); wraps past midnight if first > second.
  std::optional<std::pair<int, int>> hours;
  std::optional<int> year;

  bool matches(const CrashRecord& crash) const;
};

struct ZoneSwi {
  ZoneField field;
  std::uint64_t unassigned_swi = 0;
  std::size_t unassigned_count = 0;
};

ZoneSwi aggregate_zone_swi(std::span<const CrashRecord> crashes, const ZoneSet& zones,
                           const CrashFilter& filter = {});

/// Day-of-week (Monday first) by time-of-day SWI totals.
struct TemporalHeatmap {
  int bin_width_hours = 1;
  std::vector<double> cells;  // row-major, 7 rows

  int bins_per_day() const noexcept { return 24 / bin_width_hours; }
  double at(int day, int bin) const { return cells[static_cast<std::size_t>(day * bins_per_day() + bin)]; }
};

bool valid_bin_width(int hours) noexcept;
TemporalHeatmap temporal_heatmap(std::span<const CrashRecord> crashes, int bin_width_hours);

// ---------------------------------------------------------------------------
// File loading

struct DatasetPaths {
  std::string crashes;
  std::string pois;        // optional
  std::string zones;       // zones.json, optional
  std::string adjacency;   // adjacency.csv, optional
  std::string nodes;       // optional, pairs with edges
  std::string edges;
};

struct LoadOptions {
  std::vector<std::string> extra_poi_categories;
  /// Only "meters" is accepted; geographic degrees are rejected.
  std::string coordinate_units = "meters";
};

struct Dataset {
  std::vector<CrashRecord> crashes;
  std::vector<PoiRecord> pois;
  ZoneSet zones;
  std::vector<std::pair<std::string, std::string>> adjacency;
  std::optional<netkde::RoadNetwork> network;
  PoiCategories categories;
  std::size_t rejected_age_rows = 0;
  std::vector<std::string> warnings;
};

std::vector<CrashRecord> load_crashes(const std::string& path, std::size_t* rejected_age_rows = nullptr);
std::vector<PoiRecord> load_pois(const std::string& path, const PoiCategories& categories);
std::vector<Zone> load_zones_json(const std::string& path);
std::vector<std::pair<std::string, std::string>> load_adjacency_csv(const std::string& path);
netkde::RoadNetwork load_network(const std::string& nodes_path, const std::string& edges_path);

/// Loads and validates every referenced file. Row-level problems are
/// collected and reported together as one ValidationError.
Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options = {});

/// Per-zone POI counts per category, columns in category registry order.
std::vector<std::pair<std::string, std::vector<double>>> poi_counts_by_zone(
    std::span<const PoiRecord> pois, const ZoneSet& zones, const PoiCategories& categories,
    std::size_t* unassigned = nullptr);

}  // namespace crashkit::ingest
