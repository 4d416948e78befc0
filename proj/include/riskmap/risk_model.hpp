#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/cdr_ingest.hpp"
#include "riskmap/geometry.hpp"
#include "riskmap/home_detection.hpp"
#include "riskmap/parallel.hpp"
#include "riskmap/social_graph.hpp"
#include "riskmap/text.hpp"

namespace riskmap {

/// Per-antenna risk numbers: residents N, vulnerable residents V, outgoing
/// calls C and outgoing calls to endemic-homed users VC.
struct AntennaIndicators {
  AntennaId antenna;
  std::uint64_t n_residents = 0;
  std::uint64_t n_vulnerable = 0;
  std::uint64_t calls_out = 0;
  std::uint64_t vulnerable_calls = 0;

  double vulnerable_fraction() const noexcept {
    return n_residents == 0 ? 0.0
                            : static_cast<double>(n_vulnerable) / static_cast<double>(n_residents);
  }

  friend bool operator==(const AntennaIndicators&, const AntennaIndicators&) = default;
};

/// Users whose home antenna lies inside the zone (boundary included).
inline UserSet residents_of_zone(const HomeMap& homes, const AntennaRegistry& registry,
                                 const EndemicZone& zone) {
  std::vector<char> inside(registry.size(), 0);
  for (std::uint32_t a = 0; a < registry.size(); ++a)
    inside[a] = point_in_zone(registry.location(AntennaId{a}), zone);
  UserSet out(homes.universe());
  for (const auto& h : homes.assignments()) {
    if (!registry.contains(h.home))
      throw ConsistencyError("home antenna index " + std::to_string(h.home.value) +
                             " missing from registry");
    if (inside[h.home.value]) out.insert(h.user);
  }
  return out;
}

/// Every graph neighbor of a resident. Residency itself neither grants nor
/// blocks the tag.
inline UserSet tag_vulnerable(const SocialGraph& graph, const UserSet& residents) {
  UserSet out(std::max(graph.nodes().universe(), residents.universe()));
  for (UserId r : residents.members())
    for (UserId v : graph.neighbors(r)) out.insert(v);
  return out;
}

/// One entry per registry antenna, in antenna id order, all-zero ones included.
/// A record whose callee has no home counts toward C but never VC.
inline std::vector<AntennaIndicators> compute_indicators(
    std::span<const CallRecord> records, const HomeMap& homes, const UserSet& residents,
    const UserSet& vulnerable, const AntennaRegistry& registry, unsigned partitions = 1) {
  std::vector<AntennaIndicators> out(registry.size());
  for (std::uint32_t a = 0; a < registry.size(); ++a) out[a].antenna = AntennaId{a};

  for (const auto& h : homes.assignments()) {
    if (!registry.contains(h.home))
      throw ConsistencyError("home antenna index " + std::to_string(h.home.value) +
                             " missing from registry");
    ++out[h.home.value].n_residents;
    if (vulnerable.contains(h.user)) ++out[h.home.value].n_vulnerable;
  }

  const auto ranges = split_evenly(records.size(), partitions);
  std::vector<std::vector<std::uint64_t>> calls(ranges.size()), vcalls(ranges.size());
  parallel_for(ranges.size(), partitions, [&](std::size_t p) {
    calls[p].assign(registry.size(), 0);
    vcalls[p].assign(registry.size(), 0);
    for (std::size_t i = ranges[p].first; i < ranges[p].second; ++i) {
      const auto& r = records[i];
      if (r.direction != Direction::outgoing || !registry.contains(r.antenna)) continue;
      ++calls[p][r.antenna.value];
      if (residents.contains(r.callee) && homes.find(r.callee)) ++vcalls[p][r.antenna.value];
    }
  });
  for (std::size_t p = 0; p < ranges.size(); ++p)
    for (std::size_t a = 0; a < registry.size(); ++a) {
      out[a].calls_out += calls[p][a];
      out[a].vulnerable_calls += vcalls[p][a];
    }
  return out;
}

/// `antenna_id,N,V,C,VC`, by antenna id.
inline std::string export_indicators_csv(std::span<const AntennaIndicators> rows,
                                         const AntennaRegistry& registry) {
  std::string out;
  for (const auto& r : rows) {
    out += registry.name(r.antenna);
    for (std::uint64_t v : {r.n_residents, r.n_vulnerable, r.calls_out, r.vulnerable_calls}) {
      out.push_back(',');
      out += std::to_string(v);
    }
    out.push_back('\n');
  }
  return out;
}

inline nlohmann::ordered_json indicators_json(std::span<const AntennaIndicators> rows,
                                              const AntennaRegistry& registry) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    const GeoPoint p = registry.location(r.antenna);
    arr.push_back({{"antenna_id", registry.name(r.antenna)},
                   {"lat", p.lat},
                   {"lon", p.lon},
                   {"N", r.n_residents},
                   {"V", r.n_vulnerable},
                   {"C", r.calls_out},
                   {"VC", r.vulnerable_calls}});
  }
  return arr;
}

inline std::string export_indicators_json(std::span<const AntennaIndicators> rows,
                                          const AntennaRegistry& registry) {
  nlohmann::ordered_json doc;
  doc["antennas"] = indicators_json(rows, registry);
  return doc.dump(2) + "\n";
}

inline std::vector<AntennaIndicators> import_indicators_csv(
    std::string_view text, const AntennaRegistry& registry,
    const std::string& label = "<indicators>") {
  std::vector<AntennaIndicators> rows;
  std::size_t line_no = 0;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (line.empty()) return;
    std::string_view f[5];
    AntennaIndicators r;
    if (split_fields(line, ',', f) != 5 || !parse_int(f[1], r.n_residents) ||
        !parse_int(f[2], r.n_vulnerable) || !parse_int(f[3], r.calls_out) ||
        !parse_int(f[4], r.vulnerable_calls))
      throw ParseError(label, line_no, "expected antenna_id,N,V,C,VC");
    const auto a = registry.find(f[0]);
    if (!a) throw ParseError(label, line_no, "unknown antenna " + std::string{f[0]});
    if (r.n_vulnerable > r.n_residents || r.vulnerable_calls > r.calls_out)
      throw ParseError(label, line_no, "indicator invariant violated (V > N or VC > C)");
    r.antenna = *a;
    rows.push_back(r);
  });
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.antenna < b.antenna; });
  return rows;
}

}  // namespace riskmap
