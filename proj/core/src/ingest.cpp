#include "crashkit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <nlohmann/json.hpp>

#include "crashkit/csv.hpp"

namespace crashkit::ingest {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, kAgeGroupCount> kAgeNames = {
    "0-18", "19-25", "26-35", "36-45", "46-55", "56-65", "over-65"};

constexpr std::array<std::string_view, 9> kDefaultCategories = {
    "WORK", "ATTRACTION", "EDUCATION", "SHOP", "RESTAURANT",
    "STATION", "ENTERTAINMENT", "ACCOMMODATION", "PARKING"};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::optional<double> parse_double(std::string_view text) {
  std::string t = csv::trim(text);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

/// Accumulates row-level messages for one file and throws them together.
class ErrorLog {
 public:
  explicit ErrorLog(std::string source) : source_(std::move(source)) {}

  void add(std::size_t line, std::string_view column, std::string_view message) {
    std::ostringstream os;
    os << source_ << ":" << line;
    if (!column.empty()) os << ": column '" << column << "'";
    os << ": " << message;
    messages_.push_back(os.str());
  }

  void throw_if_any() const {
    if (messages_.empty()) return;
    constexpr std::size_t kShown = 25;
    std::ostringstream os;
    for (std::size_t i = 0; i < messages_.size() && i < kShown; ++i) {
      if (i) os << '\n';
      os << messages_[i];
    }
    if (messages_.size() > kShown) os << "\n... and " << messages_.size() - kShown << " more";
    throw ValidationError(os.str());
  }

 private:
  std::string source_;
  std::vector<std::string> messages_;
};

std::string field(const csv::Row& row, std::size_t index) {
  return index < row.fields.size() ? row.fields[index] : std::string{};
}

bool field_count_ok(const csv::Table& table, const csv::Row& row, ErrorLog& log) {
  if (row.fields.size() > table.header().size()) {
    log.add(row.line, "", "expected " + std::to_string(table.header().size()) + " fields, found " +
                               std::to_string(row.fields.size()));
    return false;
  }
  return true;
}

std::optional<Point> read_point(const csv::Row& row, std::size_t cx, std::size_t cy, ErrorLog& log) {
  auto x = parse_double(field(row, cx));
  auto y = parse_double(field(row, cy));
  if (!x || !std::isfinite(*x)) {
    log.add(row.line, "x", "not a finite number: '" + field(row, cx) + "'");
    return std::nullopt;
  }
  if (!y || !std::isfinite(*y)) {
    log.add(row.line, "y", "not a finite number: '" + field(row, cy) + "'");
    return std::nullopt;
  }
  return Point{*x, *y};
}

std::string json_id(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ValidationError("zone_id must be a string or integer");
}

geometry::Ring json_ring(const json& ring) {
  geometry::Ring out;
  for (const auto& vertex : ring) {
    if (!vertex.is_array() || vertex.size() < 2 || !vertex[0].is_number() || !vertex[1].is_number()) {
      throw ValidationError("ring vertex must be [x, y]");
    }
    out.push_back(Point{vertex[0].get<double>(), vertex[1].get<double>()});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Enumerations

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::fatal: return "fatal";
    case Severity::serious: return "serious";
    case Severity::slight: return "slight";
  }
  return "?";
}

std::string_view to_string(AgeGroup g) { return kAgeNames.at(static_cast<std::size_t>(g)); }

std::string_view to_string(DayClass d) { return d == DayClass::weekday ? "weekday" : "weekend"; }

std::optional<Severity> parse_severity(std::string_view token) {
  const std::string t = csv::to_lower(csv::trim(token));
  if (t == "fatal") return Severity::fatal;
  if (t == "serious") return Severity::serious;
  if (t == "slight") return Severity::slight;
  return std::nullopt;
}

std::optional<AgeGroup> parse_age_group(std::string_view token) {
  std::string t = csv::to_lower(csv::trim(token));
  replace_all(t, "\xE2\x80\x93", "-");  // en dash
  replace_all(t, "\xE2\x80\x94", "-");  // em dash
  replace_all(t, "_", "-");
  replace_all(t, " ", "");
  if (t.rfind("age-", 0) == 0) t.erase(0, 4);
  for (std::size_t i = 0; i < kAgeNames.size(); ++i) {
    if (t == kAgeNames[i]) return static_cast<AgeGroup>(i);
  }
  if (t == "over65" || t == "65+" || t == ">65" || t == "66+") return AgeGroup::over_65;
  return std::nullopt;
}

std::optional<DayClass> parse_day_class(std::string_view token) {
  const std::string t = csv::to_lower(csv::trim(token));
  if (t == "weekday") return DayClass::weekday;
  if (t == "weekend") return DayClass::weekend;
  return std::nullopt;
}

int DateTime::weekday() const {
  using namespace std::chrono;
  const sys_days days{year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                     std::chrono::day{static_cast<unsigned>(day)}}};
  // iso_encoding: Monday = 1 ... Sunday = 7
  return static_cast<int>(std::chrono::weekday{days}.iso_encoding()) - 1;
}

std::optional<DateTime> parse_datetime(std::string_view text) {
  const std::string t = csv::trim(text);
  // YYYY-MM-DD?HH:MM
  if (t.size() < 16 || t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') || t[13] != ':') {
    return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    return parse_int<int>(std::string_view(t).substr(pos, len));
  };
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2);
  if (!y || !mo || !d || !h || !mi) return std::nullopt;
  std::size_t rest = 16;
  if (rest < t.size() && t[rest] == ':') {
    auto s = num(rest + 1, 2);
    if (!s || *s > 60) return std::nullopt;
    rest += 3;
    if (rest < t.size() && t[rest] == '.') {
      ++rest;
      while (rest < t.size() && std::isdigit(static_cast<unsigned char>(t[rest]))) ++rest;
    }
  }
  if (rest < t.size()) {
    std::string_view zone = std::string_view(t).substr(rest);
    const bool utc = zone == "Z";
    const bool offset = (zone[0] == '+' || zone[0] == '-') && (zone.size() == 3 || zone.size() == 5 || zone.size() == 6);
    if (!utc && !offset) return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*mo)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h < 0 || *h > 23 || *mi < 0 || *mi > 59) return std::nullopt;
  return DateTime{*y, *mo, *d, *h, *mi};
}

// ---------------------------------------------------------------------------
// POI categories

PoiCategories::PoiCategories() : names_(kDefaultCategories.begin(), kDefaultCategories.end()) {}

void PoiCategories::add(std::string_view name) {
  std::string n = upper(csv::trim(name));
  if (n.empty()) throw ValidationError("empty POI category name");
  if (std::find(names_.begin(), names_.end(), n) == names_.end()) names_.push_back(std::move(n));
}

std::optional<std::string> PoiCategories::normalize(std::string_view token) const {
  std::string n = upper(csv::trim(token));
  if (std::find(names_.begin(), names_.end(), n) == names_.end()) return std::nullopt;
  return n;
}

// ---------------------------------------------------------------------------
// Zones

void validate_zone(const Zone& zone) {
  if (zone.zone_id.empty()) throw ValidationError("zone with empty zone_id");
  double area = 0.0;
  for (const auto& ring : zone.rings) {
    if (ring.size() < 4) {
      throw ValidationError("zone '" + zone.zone_id + "': ring has fewer than 4 vertices");
    }
    if (!(ring.front() == ring.back())) {
      throw ValidationError("zone '" + zone.zone_id + "': ring is not closed (first != last)");
    }
    for (const auto& p : ring) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ValidationError("zone '" + zone.zone_id + "': non-finite vertex");
      }
    }
    area += std::abs(geometry::signed_area(ring));
  }
  if (!zone.rings.empty() && !(area > 0.0)) {
    throw ValidationError("zone '" + zone.zone_id + "': degenerate polygon (zero area)");
  }
}

std::optional<std::string> assign_zone(Point point, std::span<const Zone> zones) {
  const std::string* best = nullptr;
  for (const auto& z : zones) {
    if (z.rings.empty()) continue;
    if (geometry::contains(z.rings, point) && (best == nullptr || z.zone_id < *best)) best = &z.zone_id;
  }
  if (!best) return std::nullopt;
  return *best;
}

struct ZoneSet::Index {
  using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
  using BBox = bg::model::box<BPoint>;
  using Value = std::pair<BBox, std::size_t>;
  bgi::rtree<Value, bgi::quadratic<16>> tree;
};

ZoneSet::ZoneSet() = default;
ZoneSet::ZoneSet(ZoneSet&&) noexcept = default;
ZoneSet& ZoneSet::operator=(ZoneSet&&) noexcept = default;
ZoneSet::~ZoneSet() = default;

ZoneSet::ZoneSet(std::vector<Zone> zones) : zones_(std::move(zones)) {
  std::sort(zones_.begin(), zones_.end(), [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
  std::vector<Index::Value> boxes;
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    validate_zone(zones_[i]);
    if (i > 0 && zones_[i - 1].zone_id == zones_[i].zone_id) {
      throw ValidationError("duplicate zone_id '" + zones_[i].zone_id + "'");
    }
    ids_.push_back(zones_[i].zone_id);
    if (!zones_[i].rings.empty()) {
      has_geometry_ = true;
      const auto box = geometry::bounding_box(zones_[i].rings);
      boxes.emplace_back(Index::BBox(Index::BPoint(box.min.x, box.min.y), Index::BPoint(box.max.x, box.max.y)), i);
    }
  }
  index_ = std::make_unique<Index>();
  index_->tree = decltype(index_->tree)(boxes.begin(), boxes.end());
}

std::optional<std::size_t> ZoneSet::index_of(std::string_view zone_id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), zone_id);
  if (it == ids_.end() || *it != zone_id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::optional<std::size_t> ZoneSet::locate(Point p) const {
  if (!index_) return std::nullopt;
  constexpr double kPad = 1e-9;
  Index::BBox query(Index::BPoint(p.x - kPad, p.y - kPad), Index::BPoint(p.x + kPad, p.y + kPad));
  std::vector<Index::Value> hits;
  index_->tree.query(bgi::intersects(query), std::back_inserter(hits));
  std::optional<std::size_t> best;
  for (const auto& [box, i] : hits) {
    // index order equals zone_id order
    if (best && i > *best) continue;
    if (geometry::contains(zones_[i].rings, p)) best = i;
  }
  return best;
}

std::vector<std::optional<std::size_t>> zone_indices(std::span<const CrashRecord> crashes,
                                                     const ZoneSet& zones) {
  std::vector<std::optional<std::size_t>> out;
  out.reserve(crashes.size());
  for (const auto& c : crashes) {
    if (c.zone_id) {
      out.push_back(zones.index_of(*c.zone_id));
    } else {
      out.push_back(zones.locate(c.position));
    }
  }
  return out;
}

bool CrashFilter::matches(const CrashRecord& crash) const {
  if (age_group && crash.age_group != *age_group) return false;
  if (day_class && crash.when.day_class() != *day_class) return false;
  if (year && crash.when.year != *year) return false;
  if (hours) {
    const auto [first, last] = *hours;
    const int h = crash.when.hour;
    const bool in = first <= last ? (h >= first && h < last) : (h >= first || h < last);
    if (!in) return false;
  }
  return true;
}

ZoneSwi aggregate_zone_swi(std::span<const CrashRecord> crashes, const ZoneSet& zones,
                           const CrashFilter& filter) {
  std::vector<double> totals(zones.size(), 0.0);
  ZoneSwi out;
  const auto where = zone_indices(crashes, zones);
  for (std::size_t i = 0; i < crashes.size(); ++i) {
    if (!filter.matches(crashes[i])) continue;
    const auto w = severity_weight(crashes[i].severity);
    if (where[i]) {
      totals[*where[i]] += static_cast<double>(w);
    } else {
      out.unassigned_swi += w;
      ++out.unassigned_count;
    }
  }
  out.field = ZoneField(zones.ids(), std::move(totals));
  return out;
}

bool valid_bin_width(int hours) noexcept {
  return hours >= 1 && hours <= 24 && 24 % hours == 0;
}

TemporalHeatmap temporal_heatmap(std::span<const CrashRecord> crashes, int bin_width_hours) {
  if (!valid_bin_width(bin_width_hours)) {
    throw std::invalid_argument("bin width must divide 24 hours, got " + std::to_string(bin_width_hours));
  }
  TemporalHeatmap map;
  map.bin_width_hours = bin_width_hours;
  map.cells.assign(static_cast<std::size_t>(7 * map.bins_per_day()), 0.0);
  for (const auto& c : crashes) {
    const int day = c.when.weekday();
    const int bin = c.when.hour / bin_width_hours;
    map.cells[static_cast<std::size_t>(day * map.bins_per_day() + bin)] +=
        static_cast<double>(severity_weight(c.severity));
  }
  return map;
}

// ---------------------------------------------------------------------------
// Loaders

std::vector<CrashRecord> load_crashes(const std::string& path, std::size_t* rejected_age_rows) {
  const auto table = csv::Table::read_file(path);
  const auto c_id = table.require_column("id");
  const auto c_x = table.require_column("x");
  const auto c_y = table.require_column("y");
  const auto c_dt = table.require_column("datetime");
  const auto c_sev = table.require_column("severity");
  const auto c_age = table.require_column("age_group");
  const auto c_zone = table.find_column("zone_id");

  ErrorLog log(path);
  std::vector<CrashRecord> out;
  std::unordered_set<std::string> seen;
  std::size_t rejected = 0;
  for (const auto& row : table.rows()) {
    if (!field_count_ok(table, row, log)) continue;
    CrashRecord rec;
    rec.id = field(row, c_id);
    if (rec.id.empty()) {
      log.add(row.line, "id", "empty id");
      continue;
    }
    if (!seen.insert(rec.id).second) {
      log.add(row.line, "id", "duplicate id '" + rec.id + "'");
      continue;
    }
    auto pos = read_point(row, c_x, c_y, log);
    if (!pos) continue;
    rec.position = *pos;
    auto when = parse_datetime(field(row, c_dt));
    if (!when) {
      log.add(row.line, "datetime", "not an ISO 8601 datetime: '" + field(row, c_dt) + "'");
      continue;
    }
    rec.when = *when;
    auto sev = parse_severity(field(row, c_sev));
    if (!sev) {
      log.add(row.line, "severity", "unknown severity '" + field(row, c_sev) + "'");
      continue;
    }
    rec.severity = *sev;
    auto age = parse_age_group(field(row, c_age));
    if (!age) {
      ++rejected;
      continue;
    }
    rec.age_group = *age;
    if (c_zone) {
      auto z = field(row, *c_zone);
      if (!z.empty()) rec.zone_id = std::move(z);
    }
    out.push_back(std::move(rec));
  }
  log.throw_if_any();
  if (rejected_age_rows) *rejected_age_rows = rejected;
  return out;
}

std::vector<PoiRecord> load_pois(const std::string& path, const PoiCategories& categories) {
  const auto table = csv::Table::read_file(path);
  const auto c_id = table.require_column("id");
  const auto c_cat = table.require_column("category");
  const auto c_x = table.require_column("x");
  const auto c_y = table.require_column("y");
  const auto c_zone = table.find_column("zone_id");
  ErrorLog log(path);
  std::vector<PoiRecord> out;
  for (const auto& row : table.rows()) {
    if (!field_count_ok(table, row, log)) continue;
    PoiRecord rec;
    rec.id = field(row, c_id);
    auto cat = categories.normalize(field(row, c_cat));
    if (!cat) {
      log.add(row.line, "category", "unknown POI category '" + field(row, c_cat) + "'");
      continue;
    }
    rec.category = *cat;
    auto pos = read_point(row, c_x, c_y, log);
    if (!pos) continue;
    rec.position = *pos;
    if (c_zone) {
      auto z = field(row, *c_zone);
      if (!z.empty()) rec.zone_id = std::move(z);
    }
    out.push_back(std::move(rec));
  }
  log.throw_if_any();
  return out;
}

std::vector<Zone> load_zones_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  std::vector<Zone> zones;
  try {
    if (doc.is_array()) {
      for (const auto& item : doc) {
        Zone z;
        z.zone_id = json_id(item.at("zone_id"));
        for (const auto& ring : item.at("rings")) z.rings.push_back(json_ring(ring));
        zones.push_back(std::move(z));
      }
    } else if (doc.is_object() && doc.value("type", "") == "FeatureCollection") {
      for (const auto& feature : doc.at("features")) {
        Zone z;
        z.zone_id = json_id(feature.at("properties").at("zone_id"));
        const auto& geom = feature.at("geometry");
        const std::string type = geom.at("type");
        if (type == "Polygon") {
          for (const auto& ring : geom.at("coordinates")) z.rings.push_back(json_ring(ring));
        } else if (type == "MultiPolygon") {
          for (const auto& poly : geom.at("coordinates")) {
            for (const auto& ring : poly) z.rings.push_back(json_ring(ring));
          }
        } else {
          throw ValidationError("zone '" + z.zone_id + "': unsupported geometry type " + type);
        }
        zones.push_back(std::move(z));
      }
    } else {
      throw ValidationError("expected an array of zones or a GeoJSON FeatureCollection");
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  for (const auto& z : zones) {
    try {
      validate_zone(z);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
  return zones;
}

std::vector<std::pair<std::string, std::string>> load_adjacency_csv(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_a = table.require_column("zone_a");
  const auto c_b = table.require_column("zone_b");
  ErrorLog log(path);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& row : table.rows()) {
    if (!field_count_ok(table, row, log)) continue;
    auto a = field(row, c_a);
    auto b = field(row, c_b);
    if (a.empty() || b.empty()) {
      log.add(row.line, a.empty() ? "zone_a" : "zone_b", "empty zone id");
      continue;
    }
    pairs.emplace_back(std::move(a), std::move(b));
  }
  log.throw_if_any();
  return pairs;
}

netkde::RoadNetwork load_network(const std::string& nodes_path, const std::string& edges_path) {
  const auto nodes_table = csv::Table::read_file(nodes_path);
  const auto c_nid = nodes_table.require_column("node_id");
  const auto c_x = nodes_table.require_column("x");
  const auto c_y = nodes_table.require_column("y");
  ErrorLog node_log(nodes_path);
  std::vector<netkde::NetworkNode> nodes;
  for (const auto& row : nodes_table.rows()) {
    if (!field_count_ok(nodes_table, row, node_log)) continue;
    auto pos = read_point(row, c_x, c_y, node_log);
    if (!pos) continue;
    nodes.push_back({field(row, c_nid), *pos});
  }
  node_log.throw_if_any();

  const auto edges_table = csv::Table::read_file(edges_path);
  const auto c_eid = edges_table.require_column("edge_id");
  const auto c_from = edges_table.require_column("from");
  const auto c_to = edges_table.require_column("to");
  const auto c_geom = edges_table.find_column("geometry");
  ErrorLog edge_log(edges_path);
  std::vector<netkde::EdgeSpec> edges;
  for (const auto& row : edges_table.rows()) {
    if (!field_count_ok(edges_table, row, edge_log)) continue;
    netkde::EdgeSpec spec{field(row, c_eid), field(row, c_from), field(row, c_to), {}};
    if (c_geom) {
      const std::string text = csv::trim(field(row, *c_geom));
      bool ok = true;
      if (!text.empty()) {
        std::stringstream vertices(text);
        std::string vertex;
        while (std::getline(vertices, vertex, ';')) {
          std::istringstream xy(vertex);
          std::string sx, sy, extra;
          xy >> sx >> sy;
          auto x = parse_double(sx), y = parse_double(sy);
          if (!x || !y || (xy >> extra) || !std::isfinite(*x) || !std::isfinite(*y)) {
            edge_log.add(row.line, "geometry", "malformed vertex '" + csv::trim(vertex) + "'");
            ok = false;
            break;
          }
          spec.geometry.push_back({*x, *y});
        }
      }
      if (!ok) continue;
    }
    edges.push_back(std::move(spec));
  }
  edge_log.throw_if_any();
  try {
    return netkde::RoadNetwork(std::move(nodes), std::move(edges));
  } catch (const ValidationError& e) {
    throw ValidationError(edges_path + ": " + e.what());
  }
}

Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options) {
  if (csv::to_lower(csv::trim(options.coordinate_units)) != "meters") {
    throw ValidationError("coordinate_units '" + options.coordinate_units +
                          "' not supported: inputs must use a planar metric CRS (meters)");
  }
  Dataset ds;
  std::vector<std::string> errors;
  auto attempt = [&](auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      errors.emplace_back(e.what());
    }
  };

  for (const auto& extra : options.extra_poi_categories) attempt([&] { ds.categories.add(extra); });
  if (paths.crashes.empty()) {
    errors.emplace_back("manifest: no crashes file given");
  } else {
    attempt([&] { ds.crashes = load_crashes(paths.crashes, &ds.rejected_age_rows); });
  }
  if (!paths.pois.empty()) attempt([&] { ds.pois = load_pois(paths.pois, ds.categories); });
  std::vector<Zone> zones;
  if (!paths.zones.empty()) attempt([&] { zones = load_zones_json(paths.zones); });
  if (!paths.adjacency.empty()) attempt([&] { ds.adjacency = load_adjacency_csv(paths.adjacency); });
  if (paths.nodes.empty() != paths.edges.empty()) {
    errors.emplace_back("manifest: nodes and edges files must be given together");
  } else if (!paths.nodes.empty()) {
    attempt([&] { ds.network.emplace(load_network(paths.nodes, paths.edges)); });
  }

  if (paths.zones.empty()) {
    // Zone universe from the adjacency file and explicit zone_id columns.
    std::set<std::string> ids;
    for (const auto& [a, b] : ds.adjacency) {
      ids.insert(a);
      ids.insert(b);
    }
    for (const auto& c : ds.crashes) {
      if (c.zone_id) ids.insert(*c.zone_id);
    }
    for (const auto& p : ds.pois) {
      if (p.zone_id) ids.insert(*p.zone_id);
    }
    for (const auto& id : ids) zones.push_back(Zone{id, {}, {}});
  }
  attempt([&] { ds.zones = ZoneSet(std::move(zones)); });

  if (!errors.empty()) {
    std::string message;
    for (const auto& e : errors) {
      if (!message.empty()) message += '\n';
      message += e;
    }
    throw ValidationError(message);
  }

  if (ds.rejected_age_rows > 0) {
    ds.warnings.push_back(std::to_string(ds.rejected_age_rows) +
                          " crash rows rejected: age group outside the seven bands");
  }
  std::size_t unknown_zone = 0;
  for (const auto& c : ds.crashes) {
    if (c.zone_id && !ds.zones.index_of(*c.zone_id)) ++unknown_zone;
  }
  if (unknown_zone > 0) {
    ds.warnings.push_back(std::to_string(unknown_zone) + " crashes reference unknown zone ids");
  }
  return ds;
}

std::vector<std::pair<std::string, std::vector<double>>> poi_counts_by_zone(
    std::span<const PoiRecord> pois, const ZoneSet& zones, const PoiCategories& categories,
    std::size_t* unassigned) {
  std::map<std::string, std::size_t> column;
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (const auto& name : categories.names()) {
    column[name] = out.size();
    out.emplace_back(name, std::vector<double>(zones.size(), 0.0));
  }
  std::size_t missing = 0;
  for (const auto& p : pois) {
    auto z = p.zone_id ? zones.index_of(*p.zone_id) : zones.locate(p.position);
    auto col = column.find(p.category);
    if (!z || col == column.end()) {
      ++missing;
      continue;
    }
    out[col->second].second[*z] += 1.0;
  }
  if (unassigned) *unassigned = missing;
  return out;
}

}  // namespace crashkit::ingest
