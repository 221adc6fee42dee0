#include "crashkit/common.hpp"

namespace crashkit {

ZoneField::ZoneField(std::vector<std::string> ids, std::vector<double> vals)
    : zone_ids(std::move(ids)), values(std::move(vals)) {
  if (zone_ids.size() != values.size()) {
    throw std::invalid_argument("ZoneField: id and value counts differ");
  }
  index_.reserve(zone_ids.size());
  for (std::size_t i = 0; i < zone_ids.size(); ++i) {
    if (!index_.emplace(zone_ids[i], i).second) {
      throw std::invalid_argument("ZoneField: duplicate zone id '" + zone_ids[i] + "'");
    }
  }
}

std::optional<std::size_t> ZoneField::index_of(const std::string& zone_id) const {
  auto it = index_.find(zone_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace crashkit
