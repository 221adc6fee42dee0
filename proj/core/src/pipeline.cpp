#include "crashkit/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crashkit/csv.hpp"
#include "crashkit/geodetector.hpp"
#include "crashkit/netkde.hpp"
#include "crashkit/tensor.hpp"

namespace crashkit::pipeline {

namespace {

using Json = nlohmann::ordered_json;
using csv::escape;
using csv::format_real;

std::string join_reals(const std::vector<double>& values, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_real(values[i]);
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string geodetector_target_name(GeoTarget t) { return t == GeoTarget::swi ? "swi" : "count"; }

/// Per-zone SWI or crash count over the zone universe.
ZoneField zone_target(const RunManifest& manifest, const Inputs& inputs, std::size_t* unassigned) {
  const auto& zones = inputs.dataset.zones;
  std::vector<double> values(zones.size(), 0.0);
  const auto idx = ingest::zone_indices(inputs.crashes, zones);
  std::size_t missing = 0;
  for (std::size_t c = 0; c < inputs.crashes.size(); ++c) {
    if (!idx[c]) {
      ++missing;
      continue;
    }
    values[*idx[c]] += manifest.geo_target == GeoTarget::swi
                           ? static_cast<double>(ingest::severity_weight(inputs.crashes[c].severity))
                           : 1.0;
  }
  if (unassigned) *unassigned = missing;
  return ZoneField(zones.ids(), std::move(values));
}

autocorr::SpatialWeights zone_weights(const Inputs& inputs, std::vector<std::string>& messages) {
  const auto& ds = inputs.dataset;
  if (!ds.adjacency.empty()) {
    std::vector<std::string> warnings;
    auto w = autocorr::weights_from_adjacency(ds.zones.ids(), ds.adjacency, &warnings);
    for (auto& m : warnings) messages.push_back("moran: " + m);
    return w;
  }
  if (ds.zones.has_geometry()) return autocorr::queen_weights(ds.zones);
  throw ValidationError("moran: zones.json or adjacency.csv is required");
}

std::string lisa_csv(const std::vector<autocorr::LisaResult>& rows) {
  std::string out = "zone_id,value,z,lag,local_i,p,class\n";
  for (const auto& r : rows) {
    out += escape(r.zone_id) + "," + format_real(r.value) + "," + format_real(r.z) + "," + format_real(r.lag) +
           "," + format_real(r.local_i) + "," + format_real(r.p) + "," + std::string(autocorr::to_string(r.cls)) +
           "\n";
  }
  return out;
}

std::string tail_name(autocorr::Tail t) {
  switch (t) {
    case autocorr::Tail::greater: return "greater";
    case autocorr::Tail::less: return "less";
    case autocorr::Tail::folded: return "folded";
  }
  return "greater";
}

std::string factor_matrix_csv(const std::string& label, const std::vector<std::string>& rows,
                              const tensor::Matrix& m) {
  std::string out = label;
  for (Eigen::Index c = 0; c < m.cols(); ++c) out += ",p" + std::to_string(c + 1);
  out += "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += escape(rows[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += "," + format_real(m(r, c));
    out += "\n";
  }
  return out;
}

std::string size_label(const tensor::CoreSize& s) {
  return std::to_string(s.spatial) + "x" + std::to_string(s.age) + "x" + std::to_string(s.time);
}

Json counts_json(const ingest::SeverityCounts& c) {
  return Json{{"crashes", c.fatal + c.serious + c.slight},
              {"fatal", c.fatal},
              {"serious", c.serious},
              {"slight", c.slight},
              {"swi", ingest::compute_swi(c)}};
}

void add_severity(ingest::SeverityCounts& c, ingest::Severity s) {
  switch (s) {
    case ingest::Severity::fatal: ++c.fatal; break;
    case ingest::Severity::serious: ++c.serious; break;
    case ingest::Severity::slight: ++c.slight; break;
  }
}

std::string heatmap_svg(const ingest::TemporalHeatmap& h) {
  static const char* days[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  const int bins = h.bins_per_day();
  const int cell = 28, left = 44, top = 24;
  const double peak = h.cells.empty() ? 0.0 : *std::max_element(h.cells.begin(), h.cells.end());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + bins * cell + 8 << "\" height=\""
      << top + 7 * cell + 8 << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int b = 0; b < bins; ++b) {
    svg << "<text x=\"" << left + b * cell + cell / 2 << "\" y=\"" << top - 8 << "\" text-anchor=\"middle\">"
        << b * h.bin_width_hours << "</text>\n";
  }
  for (int d = 0; d < 7; ++d) {
    svg << "<text x=\"" << left - 6 << "\" y=\"" << top + d * cell + cell / 2 + 4 << "\" text-anchor=\"end\">"
        << days[d] << "</text>\n";
    for (int b = 0; b < bins; ++b) {
      const double v = h.at(d, b);
      const int shade = peak > 0.0 ? static_cast<int>(255.0 - 200.0 * v / peak + 0.5) : 255;
      char fill[8];
      std::snprintf(fill, sizeof fill, "#ff%02x%02x", shade, shade);
      svg << "<rect x=\"" << left + b * cell << "\" y=\"" << top + d * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"" << fill << "\" stroke=\"#ddd\" data-day=\"" << d
          << "\" data-bin=\"" << b << "\" data-value=\"" << format_real(v) << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

tensor::TuckerModel fit_tensor(const RunManifest& m, const tensor::LabeledTensor& t, OutputSet& out,
                               Json& selection) {
  tensor::CoreSize size;
  if (!m.sweep.empty()) {
    tensor::SweepResult sweep;
    std::string rows = "candidate,kl,objective\n";
    if (m.grid_search) {
      sweep = tensor::grid_search_core_size(t.values, m.sweep, m.sweep_age, m.sweep_time, m.elbow_tol, m.ntd);
      for (const auto& r : sweep.rows) {
        rows += size_label(r.size) + "," + format_real(r.kl) + "," + format_real(r.objective) + "\n";
      }
    } else {
      sweep = tensor::select_core_size(t.values, m.sweep, m.sweep_age_size, m.sweep_time_size, m.elbow_tol, m.ntd);
      for (const auto& r : sweep.rows) {
        rows += std::to_string(r.size.spatial) + "," + format_real(r.kl) + "," + format_real(r.objective) + "\n";
      }
    }
    out.files["sweep.csv"] = rows;
    size = m.core_size.value_or(sweep.selected);
    selection = Json{{"mode", m.grid_search ? "grid" : "spatial_sweep"},
                     {"elbow_tol", m.elbow_tol},
                     {"selected", size_label(sweep.selected)}};
  } else if (m.core_size) {
    size = *m.core_size;
    selection = Json{{"mode", "fixed"}};
  } else {
    throw ValidationError("tensor: set [tensor] core_size or sweep");
  }
  return tensor::ntd(t.values, size, m.ntd);
}

}  // namespace

void OutputSet::merge(OutputSet other) {
  for (auto& [name, content] : other.files) files[name] = std::move(content);
  for (auto& msg : other.messages) messages.push_back(std::move(msg));
}

Inputs load_inputs(const RunManifest& manifest) {
  Inputs in;
  in.dataset = ingest::load_dataset(manifest.paths, manifest.load);
  for (const auto& c : in.dataset.crashes) {
    if (manifest.filter.matches(c)) in.crashes.push_back(c);
  }
  return in;
}

OutputSet cmd_kde(const RunManifest& manifest, const Inputs& inputs) {
  if (!inputs.dataset.network) throw ValidationError("kde: nodes.csv and edges.csv are required");
  const auto& net = *inputs.dataset.network;
  const auto& cfg = manifest.kde;

  std::vector<netkde::WeightedEvent> events;
  std::size_t excluded = 0;
  for (const auto& c : inputs.crashes) {
    auto snap = netkde::snap_to_network(c.position, net, cfg.snap_tolerance);
    if (!snap) {
      ++excluded;
      continue;
    }
    const double w = cfg.weight_mode == netkde::WeightMode::swi
                         ? static_cast<double>(ingest::severity_weight(c.severity))
                         : 1.0;
    events.push_back({snap->position, w});
  }
  const auto lixels = netkde::lixelize(net, cfg.lixel_unit);
  const auto density = netkde::net_kde(events, lixels, cfg, net);

  OutputSet out;
  std::string rows = "lixel_id,edge_id,offset_start,offset_end,density\n";
  for (std::size_t i = 0; i < lixels.size(); ++i) {
    const auto& l = lixels[i];
    rows += std::to_string(l.id) + "," + escape(net.edges()[l.edge].id) + "," + format_real(l.start) + "," +
            format_real(l.end) + "," + format_real(density[i]) + "\n";
  }
  out.files["density.csv"] = rows;

  std::string top = "rank,lixel_id,edge_id,density\n";
  const auto ranked = netkde::rank_segments(density, lixels, manifest.top_k);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    top += std::to_string(r + 1) + "," + std::to_string(ranked[r].lixel_id) + "," +
           escape(net.edges()[ranked[r].edge].id) + "," + format_real(ranked[r].density) + "\n";
  }
  out.files["segments.csv"] = top;

  if (manifest.geojson) {
    Json features = Json::array();
    for (std::size_t i = 0; i < lixels.size(); ++i) {
      const auto& l = lixels[i];
      Json coords = Json::array();
      for (const auto& p : net.subline(l.edge, l.start, l.end)) coords.push_back({p.x, p.y});
      features.push_back(Json{{"type", "Feature"},
                              {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                              {"properties",
                               {{"lixel_id", l.id}, {"edge_id", net.edges()[l.edge].id}, {"density", density[i]}}}});
    }
    out.files["density.geojson"] = Json{{"type", "FeatureCollection"}, {"features", features}}.dump() + "\n";
  }

  out.messages.push_back("kde: " + std::to_string(events.size()) + " events snapped, " + std::to_string(excluded) +
                         " excluded beyond " + format_real(cfg.snap_tolerance) + " m; " +
                         std::to_string(lixels.size()) + " lixels");
  return out;
}

OutputSet cmd_moran(const RunManifest& manifest, const Inputs& inputs) {
  OutputSet out;
  const auto w = zone_weights(inputs, out.messages);
  const auto agg = ingest::aggregate_zone_swi(inputs.crashes, inputs.dataset.zones);
  const auto& field = agg.field;

  double moran_i = 0.0;
  double p = 1.0;
  try {
    moran_i = autocorr::global_morans_i(field.values, w);
    p = autocorr::permutation_test_global(field.values, w, manifest.moran_permutations, manifest.seed,
                                          manifest.tail);
  } catch (const std::domain_error& e) {
    throw ValidationError(std::string("moran: ") + e.what());
  }
  const auto local = autocorr::lisa(field, w, manifest.moran_permutations, manifest.seed, manifest.alpha);

  Json clusters = Json::object();
  for (auto c : {autocorr::LisaClass::HH, autocorr::LisaClass::LL, autocorr::LisaClass::HL, autocorr::LisaClass::LH,
                 autocorr::LisaClass::not_significant}) {
    clusters[std::string(autocorr::to_string(c))] =
        std::count_if(local.begin(), local.end(), [c](const auto& r) { return r.cls == c; });
  }
  const auto n = static_cast<double>(field.size());
  Json j{{"I", moran_i},
         {"n_perm", manifest.moran_permutations},
         {"seed", manifest.seed},
         {"p", p},
         {"tail", tail_name(manifest.tail)},
         {"expected_I", -1.0 / (n - 1.0)},
         {"zones", field.size()},
         {"links", w.link_count()},
         {"isolates", w.isolate_count()},
         {"alpha", manifest.alpha},
         {"unassigned_crashes", agg.unassigned_count},
         {"clusters", clusters}};
  out.files["moran.json"] = dump(j);
  out.files["lisa.csv"] = lisa_csv(local);
  if (w.isolate_count() > 0) {
    out.messages.push_back("moran: " + std::to_string(w.isolate_count()) + " zones without neighbors");
  }
  return out;
}

OutputSet cmd_geodetect(const RunManifest& manifest, const Inputs& inputs) {
  if (inputs.dataset.pois.empty()) throw ValidationError("geodetect: pois.csv with at least one POI is required");
  if (inputs.dataset.zones.empty()) throw ValidationError("geodetect: zones.json or adjacency.csv is required");
  OutputSet out;
  std::size_t unassigned = 0;
  const auto y = zone_target(manifest, inputs, &unassigned);
  std::size_t poi_unassigned = 0;
  const auto factors = ingest::poi_counts_by_zone(inputs.dataset.pois, inputs.dataset.zones,
                                                  inputs.dataset.categories, &poi_unassigned);

  geodetector::SuiteOptions opts;
  opts.default_k = manifest.jenks_k;
  opts.k_per_factor = manifest.k_per_factor;
  opts.n_perm = manifest.geo_permutations;
  opts.seed = manifest.seed;
  opts.top_m = manifest.top_m;
  const auto report = geodetector::run_detector_suite(y.values, factors, opts);

  std::string rows = "factors,pd,rank,p,class,k,breaks\n";
  for (std::size_t r = 0; r < report.individual.size(); ++r) {
    const auto& f = report.individual[r];
    rows += escape(f.factor) + "," + format_real(f.pd) + "," + std::to_string(r + 1) + "," + format_real(f.p) + ",," +
            std::to_string(f.k) + "," + escape(join_reals(f.breaks)) + "\n";
  }
  for (std::size_t r = 0; r < report.interactions.size(); ++r) {
    const auto& x = report.interactions[r];
    rows += escape(x.factor_a + "&" + x.factor_b) + "," + format_real(x.pd_ab) + "," + std::to_string(r + 1) + "," +
            format_real(x.p) + "," + std::string(geodetector::to_string(x.cls)) + ",,\n";
  }
  out.files["pd.csv"] = rows;
  for (const auto& s : report.skipped) out.messages.push_back("geodetect: skipped " + s.factor + ": " + s.reason);
  out.messages.push_back("geodetect: target " + geodetector_target_name(manifest.geo_target) + ", " +
                         std::to_string(report.individual.size()) + " factors, " +
                         std::to_string(report.interactions.size()) + " interactions; " +
                         std::to_string(unassigned) + " crashes and " + std::to_string(poi_unassigned) +
                         " POIs outside every zone");
  return out;
}

OutputSet cmd_tensor(const RunManifest& manifest, const Inputs& inputs) {
  if (inputs.dataset.zones.empty()) throw ValidationError("tensor: zones.json or adjacency.csv is required");
  OutputSet out;
  const auto labeled = tensor::build_tensor(inputs.crashes, inputs.dataset.zones, manifest.day_class);
  Json selection;
  const auto model = fit_tensor(manifest, labeled, out, selection);

  std::vector<std::string> ages, hours;
  for (std::size_t a = 0; a < ingest::kAgeGroupCount; ++a) {
    ages.emplace_back(ingest::to_string(static_cast<ingest::AgeGroup>(a)));
  }
  for (int h = 0; h < 24; ++h) hours.push_back(std::to_string(h));
  out.files["factors_spatial.csv"] = factor_matrix_csv("zone_id", labeled.zone_ids, model.factors[0]);
  out.files["factors_age.csv"] = factor_matrix_csv("age_group", ages, model.factors[1]);
  out.files["factors_temporal.csv"] = factor_matrix_csv("hour", hours, model.factors[2]);

  std::string core = "j1,j2,j3,value\n";
  const auto& g = model.core;
  for (std::size_t i = 0; i < g.dim(0); ++i) {
    for (std::size_t j = 0; j < g.dim(1); ++j) {
      for (std::size_t k = 0; k < g.dim(2); ++k) {
        core += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + std::to_string(k + 1) + "," +
                format_real(g(i, j, k)) + "\n";
      }
    }
  }
  out.files["core.csv"] = core;

  const auto patterns = tensor::extract_patterns(model, labeled.zone_ids, manifest.top_q);
  Json temporal = Json::array(), age = Json::array(), spatial = Json::array();
  for (const auto& t : patterns.temporal) {
    temporal.push_back({{"pattern", t.column + 1}, {"peak_hours", t.peak_hours}, {"label", t.label}});
  }
  for (const auto& a : patterns.age) age.push_back({{"pattern", a.column + 1}, {"dominant", a.dominant}});
  for (const auto& s : patterns.spatial) {
    Json zones = Json::array();
    for (const auto& [id, v] : s.top_zones) zones.push_back({{"zone_id", id}, {"loading", v}});
    spatial.push_back({{"pattern", s.column + 1}, {"top_zones", zones}});
  }
  Json j{{"day_class", std::string(ingest::to_string(manifest.day_class))},
         {"shape", {labeled.values.dim(0), labeled.values.dim(1), labeled.values.dim(2)}},
         {"core_size", {model.core.dim(0), model.core.dim(1), model.core.dim(2)}},
         {"selection", selection},
         {"normalization_max", labeled.max_before_normalization},
         {"total_swi", labeled.total_before_normalization},
         {"unassigned_crashes", labeled.unassigned},
         {"objective", model.objective},
         {"iterations", model.iterations},
         {"seed", model.seed},
         {"restart", model.restart},
         {"monotone", model.monotone},
         {"warnings", model.warnings},
         {"temporal", temporal},
         {"age", age},
         {"spatial", spatial}};
  out.files["patterns.json"] = dump(j);
  for (const auto& w : model.warnings) out.messages.push_back("tensor: " + w);
  if (!model.monotone) out.messages.push_back("tensor: objective increased during fitting");

  if (manifest.pattern_geodetector) {
    if (inputs.dataset.pois.empty()) throw ValidationError("tensor: pattern_geodetector needs pois.csv");
    const auto factors = ingest::poi_counts_by_zone(inputs.dataset.pois, inputs.dataset.zones,
                                                    inputs.dataset.categories);
    geodetector::SuiteOptions opts;
    opts.default_k = manifest.jenks_k;
    opts.k_per_factor = manifest.k_per_factor;
    opts.n_perm = manifest.geo_permutations;
    opts.seed = manifest.seed;
    std::string rows = "age_pattern,time_pattern,factor,pd,rank,p\n";
    for (std::size_t a = 0; a < model.core.dim(1); ++a) {
      for (std::size_t t = 0; t < model.core.dim(2); ++t) {
        const auto field = tensor::pattern_zone_field(model, labeled.zone_ids, a, t);
        const auto report = geodetector::run_detector_suite(field.values, factors, opts);
        for (std::size_t r = 0; r < report.individual.size(); ++r) {
          const auto& f = report.individual[r];
          rows += std::to_string(a + 1) + "," + std::to_string(t + 1) + "," + escape(f.factor) + "," +
                  format_real(f.pd) + "," + std::to_string(r + 1) + "," + format_real(f.p) + "\n";
        }
      }
    }
    out.files["pattern_pd.csv"] = rows;
  }
  out.messages.push_back("tensor: core " + size_label({model.core.dim(0), model.core.dim(1), model.core.dim(2)}) +
                         ", objective " + format_real(model.objective) + " after " +
                         std::to_string(model.iterations) + " iterations");
  return out;
}

OutputSet cmd_report(const RunManifest& manifest, const Inputs& inputs) {
  const auto& ds = inputs.dataset;
  ingest::SeverityCounts total;
  std::vector<ingest::SeverityCounts> by_age(ingest::kAgeGroupCount);
  ingest::SeverityCounts weekday, weekend;
  for (const auto& c : inputs.crashes) {
    add_severity(total, c.severity);
    add_severity(by_age[static_cast<std::size_t>(c.age_group)], c.severity);
    add_severity(c.when.day_class() == ingest::DayClass::weekday ? weekday : weekend, c.severity);
  }
  const auto heatmap = ingest::temporal_heatmap(inputs.crashes, manifest.bin_width);

  Json ages = Json::object();
  for (std::size_t a = 0; a < ingest::kAgeGroupCount; ++a) {
    ages[std::string(ingest::to_string(static_cast<ingest::AgeGroup>(a)))] = counts_json(by_age[a]);
  }
  Json rows = Json::array();
  for (int d = 0; d < 7; ++d) {
    Json row = Json::array();
    for (int b = 0; b < heatmap.bins_per_day(); ++b) row.push_back(heatmap.at(d, b));
    rows.push_back(row);
  }
  Json j{{"seed", manifest.seed},
         {"records_loaded", ds.crashes.size()},
         {"records_after_filter", inputs.crashes.size()},
         {"rejected_age_rows", ds.rejected_age_rows},
         {"totals", counts_json(total)},
         {"by_day_class", {{"weekday", counts_json(weekday)}, {"weekend", counts_json(weekend)}}},
         {"by_age_group", ages},
         {"zones", ds.zones.size()},
         {"pois", ds.pois.size()},
         {"warnings", ds.warnings},
         {"heatmap", {{"bin_width_hours", heatmap.bin_width_hours}, {"rows", rows}}}};
  if (!ds.zones.empty()) {
    const auto agg = ingest::aggregate_zone_swi(inputs.crashes, ds.zones);
    j["unassigned"] = {{"crashes", agg.unassigned_count}, {"swi", agg.unassigned_swi}};
  }
  OutputSet out;
  out.files["report.json"] = dump(j);
  out.files["heatmap.svg"] = heatmap_svg(heatmap);
  return out;
}

OutputSet cmd_run(const RunManifest& manifest, const Inputs& inputs) {
  const auto& ds = inputs.dataset;
  OutputSet out = cmd_report(manifest, inputs);
  if (ds.network) {
    out.merge(cmd_kde(manifest, inputs));
  } else {
    out.messages.push_back("run: no network, kde skipped");
  }
  if (ds.zones.empty()) {
    out.messages.push_back("run: no zones, moran, geodetect and tensor skipped");
    return out;
  }
  out.merge(cmd_moran(manifest, inputs));
  if (!ds.pois.empty()) {
    out.merge(cmd_geodetect(manifest, inputs));
  } else {
    out.messages.push_back("run: no POIs, geodetect skipped");
  }
  if (manifest.core_size || !manifest.sweep.empty()) {
    out.merge(cmd_tensor(manifest, inputs));
  } else {
    out.messages.push_back("run: no core_size or sweep, tensor skipped");
  }
  return out;
}

std::vector<autocorr::LisaResult> read_lisa_csv(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto zone = table.require_column("zone_id");
  const auto value = table.require_column("value");
  const auto z = table.require_column("z");
  const auto lag = table.require_column("lag");
  const auto local = table.require_column("local_i");
  const auto p = table.require_column("p");
  const auto cls = table.require_column("class");
  std::vector<autocorr::LisaResult> out;
  for (const auto& row : table.rows()) {
    auto num = [&](std::size_t col) {
      try {
        std::size_t used = 0;
        const double v = std::stod(row.fields.at(col), &used);
        if (used != row.fields[col].size()) throw std::invalid_argument("trailing text");
        return v;
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(row.line) + ": column '" + table.header().at(col) +
                              "': not a number");
      }
    };
    autocorr::LisaResult r;
    r.zone_id = row.fields.at(zone);
    r.value = num(value);
    r.z = num(z);
    r.lag = num(lag);
    r.local_i = num(local);
    r.p = num(p);
    const auto& c = row.fields.at(cls);
    if (c == "HH") {
      r.cls = autocorr::LisaClass::HH;
    } else if (c == "LL") {
      r.cls = autocorr::LisaClass::LL;
    } else if (c == "HL") {
      r.cls = autocorr::LisaClass::HL;
    } else if (c == "LH") {
      r.cls = autocorr::LisaClass::LH;
    } else if (c == "not_significant") {
      r.cls = autocorr::LisaClass::not_significant;
    } else {
      throw ValidationError(path + ":" + std::to_string(row.line) + ": column 'class': unknown class '" + c + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string changes_csv(const std::vector<autocorr::ClusterComparison>& changes) {
  std::string out = "zone_id,before,after,change\n";
  for (const auto& c : changes) {
    out += escape(c.zone_id) + "," + std::string(autocorr::to_string(c.before)) + "," +
           std::string(autocorr::to_string(c.after)) + "," + std::string(autocorr::to_string(c.change)) + "\n";
  }
  return out;
}

void write_outputs(const OutputSet& outputs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : outputs.files) {
    const auto target = dir / name;
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + tmp.string());
      f << content;
      if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }
}

}  // namespace crashkit::pipeline
