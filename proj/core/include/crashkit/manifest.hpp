#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crashkit/autocorr.hpp"
#include "crashkit/ingest.hpp"
#include "crashkit/netkde.hpp"
#include "crashkit/tensor.hpp"

namespace crashkit {

enum class GeoTarget { swi, count };

/// Everything a pipeline run needs, parsed from an INI-style manifest:
///
///   [run]      seed, output
///   [inputs]   crashes, pois, zones, adjacency, nodes, edges,
///              coordinate_units, extra_poi_categories
///   [filter]   age_group, day_class, hours (e.g. 7-10), year
///   [kde]      bandwidth, lixel_unit, snap_tolerance, truncation_multiple,
///              weight_mode, top_k, geojson
///   [moran]    permutations, alpha, tail
///   [geodetector] target, jenks_k, k_per_factor, permutations, top_m
///   [tensor]   day_class, core_size, sweep, age_size, time_size, elbow_tol,
///              max_iter, tol, restarts, eps, top_q, grid_search, sweep_age,
///              sweep_time, pattern_geodetector
///   [report]   bin_width
///
/// Relative paths resolve against the manifest's directory.
struct RunManifest {
  std::filesystem::path source;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  ingest::DatasetPaths paths;
  ingest::LoadOptions load;
  ingest::CrashFilter filter;

  netkde::KdeConfig kde;
  double truncation_multiple = 3.0;
  std::size_t top_k = 10;
  bool geojson = true;

  std::size_t moran_permutations = 999;
  double alpha = 0.05;
  autocorr::Tail tail = autocorr::Tail::greater;

  GeoTarget geo_target = GeoTarget::swi;
  std::size_t jenks_k = 5;
  std::map<std::string, std::size_t> k_per_factor;
  std::size_t geo_permutations = 999;
  std::size_t top_m = 0;

  ingest::DayClass day_class = ingest::DayClass::weekday;
  std::optional<tensor::CoreSize> core_size;
  std::vector<std::size_t> sweep;
  std::size_t sweep_age_size = 5;
  std::size_t sweep_time_size = 3;
  double elbow_tol = 0.01;
  tensor::NtdOptions ntd;
  std::size_t top_q = 10;
  bool grid_search = false;
  std::vector<std::size_t> sweep_age;
  std::vector<std::size_t> sweep_time;
  bool pattern_geodetector = false;

  int bin_width = 2;
};

/// Reads and validates a manifest. `overrides` are "section.key=value"
/// strings applied on top of the file. Throws ValidationError naming the
/// offending key.
RunManifest load_manifest(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {});

/// Same, from in-memory text; relative paths resolve against `base_dir`.
RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {});

/// "1,2,5" or ranges "1-8" (mixable: "1-4,6,8").
std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace crashkit
