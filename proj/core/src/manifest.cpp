#include "crashkit/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "crashkit/csv.hpp"

namespace crashkit {

namespace {

using Section = std::map<std::string, std::string>;
using Sections = std::map<std::string, Section>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"seed", "output"}},
      {"inputs", {"crashes", "pois", "zones", "adjacency", "nodes", "edges", "coordinate_units",
                  "extra_poi_categories"}},
      {"filter", {"age_group", "day_class", "hours", "year"}},
      {"kde", {"bandwidth", "lixel_unit", "snap_tolerance", "truncation_multiple", "weight_mode", "top_k",
               "geojson"}},
      {"moran", {"permutations", "alpha", "tail"}},
      {"geodetector", {"target", "jenks_k", "k_per_factor", "permutations", "top_m"}},
      {"tensor", {"day_class", "core_size", "sweep", "age_size", "time_size", "elbow_tol", "max_iter", "tol",
                  "restarts", "eps", "top_q", "grid_search", "sweep_age", "sweep_time",
                  "pattern_geodetector"}},
      {"report", {"bin_width"}},
  };
  return keys;
}

[[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) {
  throw ValidationError("manifest [" + section + "] " + key + ": " + message);
}

class Reader {
 public:
  explicit Reader(const Sections& s) : sections_(s) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end() || csv::trim(k->second).empty()) return std::nullopt;
    return csv::trim(k->second);
  }

  double real(const std::string& section, const std::string& key, double fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size() || !std::isfinite(out)) {
      fail(section, key, "expected a number, got '" + *v + "'");
    }
    return out;
  }

  std::uint64_t integer(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      fail(section, key, "expected a nonnegative integer, got '" + *v + "'");
    }
    return out;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    const auto t = csv::to_lower(*v);
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    fail(section, key, "expected true or false, got '" + *v + "'");
  }

 private:
  const Sections& sections_;
};

std::string resolve(const std::filesystem::path& base, const std::optional<std::string>& p) {
  if (!p) return {};
  std::filesystem::path path(*p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal().string();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = csv::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Sections parse_sections(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("manifest: " + std::string(e.what()));
  }
  Sections sections;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ValidationError("manifest: key '" + name + "' outside any [section]");
    }
    for (const auto& [key, value] : section) sections[name][key] = value.data();
  }
  return sections;
}

void apply_override(Sections& sections, const std::string& text) {
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ValidationError("override '" + text + "': expected section.key=value");
  }
  sections[csv::trim(text.substr(0, dot))][csv::trim(text.substr(dot + 1, eq - dot - 1))] =
      csv::trim(text.substr(eq + 1));
}

void check_schema(const Sections& sections) {
  for (const auto& [name, keys] : sections) {
    auto known = schema().find(name);
    if (known == schema().end()) throw ValidationError("manifest: unknown section [" + name + "]");
    for (const auto& [key, value] : keys) {
      if (!known->second.count(key)) fail(name, key, "unknown key");
    }
  }
}

}  // namespace

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) {
    std::size_t v = 0;
    const auto t = csv::trim(s);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw ValidationError("'" + text + "': expected integers or ranges like 1-8");
    }
    return v;
  };
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    const auto lo = number(item.substr(0, dash));
    const auto hi = number(item.substr(dash + 1));
    if (hi < lo) throw ValidationError("'" + text + "': descending range " + item);
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides) {
  Sections sections = parse_sections(text);
  for (const auto& o : overrides) apply_override(sections, o);
  check_schema(sections);
  const Reader r(sections);

  RunManifest m;
  if (!r.get("run", "seed")) fail("run", "seed", "a seed is required for reproducible runs");
  m.seed = r.integer("run", "seed", 0);
  m.output_dir = resolve(base_dir, r.get("run", "output").value_or("out"));

  m.paths.crashes = resolve(base_dir, r.get("inputs", "crashes"));
  m.paths.pois = resolve(base_dir, r.get("inputs", "pois"));
  m.paths.zones = resolve(base_dir, r.get("inputs", "zones"));
  m.paths.adjacency = resolve(base_dir, r.get("inputs", "adjacency"));
  m.paths.nodes = resolve(base_dir, r.get("inputs", "nodes"));
  m.paths.edges = resolve(base_dir, r.get("inputs", "edges"));
  if (m.paths.crashes.empty()) fail("inputs", "crashes", "required");
  m.load.coordinate_units = r.get("inputs", "coordinate_units").value_or("meters");
  if (auto extra = r.get("inputs", "extra_poi_categories")) m.load.extra_poi_categories = split_list(*extra);

  if (auto v = r.get("filter", "age_group")) {
    m.filter.age_group = ingest::parse_age_group(*v);
    if (!m.filter.age_group) fail("filter", "age_group", "unknown age band '" + *v + "'");
  }
  if (auto v = r.get("filter", "day_class")) {
    m.filter.day_class = ingest::parse_day_class(*v);
    if (!m.filter.day_class) fail("filter", "day_class", "expected weekday or weekend");
  }
  if (auto v = r.get("filter", "hours")) {
    const auto dash = v->find('-');
    if (dash == std::string::npos) fail("filter", "hours", "expected a range like 7-10");
    int first = -1, last = -1;
    const auto lo = csv::trim(v->substr(0, dash));
    const auto hi = csv::trim(v->substr(dash + 1));
    auto a = std::from_chars(lo.data(), lo.data() + lo.size(), first);
    auto b = std::from_chars(hi.data(), hi.data() + hi.size(), last);
    if (lo.empty() || hi.empty() || a.ec != std::errc() || b.ec != std::errc() || a.ptr != lo.data() + lo.size() ||
        b.ptr != hi.data() + hi.size()) {
      fail("filter", "hours", "expected a range like 7-10");
    }
    if (first < 0 || first > 23 || last < 0 || last > 24) fail("filter", "hours", "hours must lie in 0-24");
    m.filter.hours = std::pair{first, last};
  }
  if (r.get("filter", "year")) m.filter.year = static_cast<int>(r.integer("filter", "year", 0));

  m.kde.bandwidth = r.real("kde", "bandwidth", 200.0);
  m.kde.lixel_unit = r.real("kde", "lixel_unit", 200.0);
  m.kde.snap_tolerance = r.real("kde", "snap_tolerance", 10.0);
  m.truncation_multiple = r.real("kde", "truncation_multiple", 3.0);
  if (m.truncation_multiple < 1.0) fail("kde", "truncation_multiple", "must be at least 1");
  m.kde.truncation_radius = m.truncation_multiple * m.kde.bandwidth;
  if (auto v = r.get("kde", "weight_mode")) {
    const auto t = csv::to_lower(*v);
    if (t == "unit") {
      m.kde.weight_mode = netkde::WeightMode::unit;
    } else if (t == "swi") {
      m.kde.weight_mode = netkde::WeightMode::swi;
    } else {
      fail("kde", "weight_mode", "expected unit or swi");
    }
  }
  try {
    m.kde.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("manifest [kde]: ") + e.what());
  }
  m.top_k = r.integer("kde", "top_k", 10);
  m.geojson = r.boolean("kde", "geojson", true);

  m.moran_permutations = r.integer("moran", "permutations", 999);
  if (m.moran_permutations < 99) fail("moran", "permutations", "at least 99 permutations required");
  m.alpha = r.real("moran", "alpha", 0.05);
  if (!(m.alpha > 0.0 && m.alpha < 1.0)) fail("moran", "alpha", "must lie in (0, 1)");
  if (auto v = r.get("moran", "tail")) {
    const auto t = csv::to_lower(*v);
    if (t == "greater") {
      m.tail = autocorr::Tail::greater;
    } else if (t == "less") {
      m.tail = autocorr::Tail::less;
    } else if (t == "folded") {
      m.tail = autocorr::Tail::folded;
    } else {
      fail("moran", "tail", "expected greater, less or folded");
    }
  }

  if (auto v = r.get("geodetector", "target")) {
    const auto t = csv::to_lower(*v);
    if (t == "swi") {
      m.geo_target = GeoTarget::swi;
    } else if (t == "count") {
      m.geo_target = GeoTarget::count;
    } else {
      fail("geodetector", "target", "expected swi or count");
    }
  }
  m.jenks_k = r.integer("geodetector", "jenks_k", 5);
  if (m.jenks_k < 1) fail("geodetector", "jenks_k", "must be at least 1");
  if (auto v = r.get("geodetector", "k_per_factor")) {
    for (const auto& item : split_list(*v)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) fail("geodetector", "k_per_factor", "expected NAME:k entries");
      std::string name = csv::trim(item.substr(0, colon));
      for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      const auto k = parse_size_list(item.substr(colon + 1));
      if (k.size() != 1 || k[0] < 1) fail("geodetector", "k_per_factor", "bad class count in '" + item + "'");
      m.k_per_factor[name] = k[0];
    }
  }
  m.geo_permutations = r.integer("geodetector", "permutations", 999);
  if (m.geo_permutations < 99) fail("geodetector", "permutations", "at least 99 permutations required");
  m.top_m = r.integer("geodetector", "top_m", 0);

  if (auto v = r.get("tensor", "day_class")) {
    auto d = ingest::parse_day_class(*v);
    if (!d) fail("tensor", "day_class", "expected weekday or weekend");
    m.day_class = *d;
  }
  if (auto v = r.get("tensor", "core_size")) {
    const auto sizes = split_list(*v);
    std::vector<std::size_t> dims;
    for (const auto& s : sizes) {
      auto one = parse_size_list(s);
      if (one.size() != 1) fail("tensor", "core_size", "expected three integers like 13,5,3");
      dims.push_back(one[0]);
    }
    if (dims.size() != 3 || dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
      fail("tensor", "core_size", "expected three positive integers like 13,5,3");
    }
    m.core_size = tensor::CoreSize{dims[0], dims[1], dims[2]};
  }
  if (auto v = r.get("tensor", "sweep")) m.sweep = parse_size_list(*v);
  if (!std::is_sorted(m.sweep.begin(), m.sweep.end()) ||
      std::find(m.sweep.begin(), m.sweep.end(), 0) != m.sweep.end()) {
    fail("tensor", "sweep", "candidates must be positive and ascending");
  }
  m.sweep_age_size = r.integer("tensor", "age_size", 5);
  m.sweep_time_size = r.integer("tensor", "time_size", 3);
  if (m.sweep_age_size < 1 || m.sweep_age_size > ingest::kAgeGroupCount) fail("tensor", "age_size", "must lie in 1-7");
  if (m.sweep_time_size < 1 || m.sweep_time_size > 24) fail("tensor", "time_size", "must lie in 1-24");
  m.elbow_tol = r.real("tensor", "elbow_tol", 0.01);
  if (!(m.elbow_tol > 0.0)) fail("tensor", "elbow_tol", "must be positive");
  m.ntd.max_iter = r.integer("tensor", "max_iter", 500);
  m.ntd.tol = r.real("tensor", "tol", 1e-6);
  m.ntd.restarts = r.integer("tensor", "restarts", 5);
  m.ntd.eps = r.real("tensor", "eps", 1e-9);
  m.ntd.seed = m.seed;
  if (m.ntd.max_iter < 1) fail("tensor", "max_iter", "must be positive");
  if (m.ntd.restarts < 1) fail("tensor", "restarts", "must be positive");
  if (!(m.ntd.eps > 0.0)) fail("tensor", "eps", "must be positive");
  if (!(m.ntd.tol >= 0.0)) fail("tensor", "tol", "must be nonnegative");
  m.top_q = r.integer("tensor", "top_q", 10);
  m.grid_search = r.boolean("tensor", "grid_search", false);
  if (auto v = r.get("tensor", "sweep_age")) m.sweep_age = parse_size_list(*v);
  if (auto v = r.get("tensor", "sweep_time")) m.sweep_time = parse_size_list(*v);
  if (m.grid_search && (m.sweep.empty() || m.sweep_age.empty() || m.sweep_time.empty())) {
    fail("tensor", "grid_search", "requires sweep, sweep_age and sweep_time");
  }
  m.pattern_geodetector = r.boolean("tensor", "pattern_geodetector", false);

  m.bin_width = static_cast<int>(r.integer("report", "bin_width", 2));
  if (!ingest::valid_bin_width(m.bin_width)) fail("report", "bin_width", "must divide 24");
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open manifest");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto m = parse_manifest(buffer.str(), path.parent_path(), overrides);
  m.source = path;
  return m;
}

}  // namespace crashkit
