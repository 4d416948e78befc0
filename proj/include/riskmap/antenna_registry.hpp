#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riskmap/error.hpp"
#include "riskmap/ids.hpp"
#include "riskmap/text.hpp"

namespace riskmap {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend constexpr bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Antenna id -> tower coordinates. Ids are unique and sorted, so AntennaId
/// order is lexicographic id order.
class AntennaRegistry {
 public:
  AntennaRegistry() = default;

  static AntennaRegistry from_entries(
      std::vector<std::pair<std::string, GeoPoint>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    AntennaRegistry reg;
    std::vector<std::string> names;
    names.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& [id, p] = entries[i];
      if (id.empty()) throw ConsistencyError("empty antenna id");
      if (i > 0 && entries[i - 1].first == id)
        throw ConsistencyError("duplicate antenna id " + id);
      if (!valid(p))
        throw ConsistencyError("antenna " + id + " has coordinates out of range");
      names.push_back(id);
      reg.coords_.push_back(p);
    }
    reg.names_ = NameTable<AntennaTag>::from_names(std::move(names));
    return reg;
  }

  static bool valid(GeoPoint p) noexcept {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
           p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
  }

  std::size_t size() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }

  const std::string& name(AntennaId id) const { return names_.name(id); }
  std::optional<AntennaId> find(std::string_view id) const { return names_.find(id); }
  bool contains(AntennaId id) const noexcept { return id.value < coords_.size(); }

  GeoPoint location(AntennaId id) const {
    if (!contains(id))
      throw ConsistencyError("antenna index " + std::to_string(id.value) +
                             " not in registry");
    return coords_[id.value];
  }

  const NameTable<AntennaTag>& names() const noexcept { return names_; }

 private:
  NameTable<AntennaTag> names_;
  std::vector<GeoPoint> coords_;
};

/// Antenna file: `antenna_id,latitude,longitude` per line, decimal degrees.
inline AntennaRegistry load_antennas(std::string_view text,
                                     const std::string& label = "<antennas>") {
  std::vector<std::pair<std::string, GeoPoint>> entries;
  std::size_t line_no = 0;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (line.empty()) return;
    std::string_view f[3];
    if (split_fields(line, ',', f) != 3)
      throw ParseError(label, line_no, "expected antenna_id,latitude,longitude");
    GeoPoint p;
    if (f[0].empty() || !parse_double(f[1], p.lat) || !parse_double(f[2], p.lon))
      throw ParseError(label, line_no, "malformed antenna line");
    if (!AntennaRegistry::valid(p))
      throw ParseError(label, line_no,
                       "coordinates out of range for antenna " + std::string{f[0]});
    entries.emplace_back(std::string{f[0]}, p);
  });
  try {
    return AntennaRegistry::from_entries(std::move(entries));
  } catch (const ConsistencyError& e) {
    throw ParseError(label, 0, e.what());
  }
}

inline std::string export_antennas(const AntennaRegistry& reg) {
  std::string out;
  for (std::uint32_t i = 0; i < reg.size(); ++i) {
    const AntennaId id{i};
    const GeoPoint p = reg.location(id);
    out += reg.name(id);
    out.push_back(',');
    append_double(out, p.lat);
    out.push_back(',');
    append_double(out, p.lon);
    out.push_back('\n');
  }
  return out;
}

}  // namespace riskmap
