#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace crashkit {

/// Raised for malformed input files, manifests or parameters. The CLI maps
/// this to exit code 2; every other exception maps to exit code 3.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Planar coordinates in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// A scalar value per zone over a fixed, ordered zone universe.
struct ZoneField {
  std::vector<std::string> zone_ids;
  std::vector<double> values;

  ZoneField() = default;
  ZoneField(std::vector<std::string> ids, std::vector<double> vals);

  std::size_t size() const noexcept { return values.size(); }
  std::optional<std::size_t> index_of(const std::string& zone_id) const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace crashkit
