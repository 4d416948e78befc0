#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/error.hpp"
#include "riskmap/risk_model.hpp"
#include "riskmap/text.hpp"

namespace riskmap {

/// Plotting thresholds: an antenna is shown iff N > min_volume and
/// V/N > beta.
struct FilterParams {
  double beta = 0.15;
  std::uint64_t min_volume = 50;

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  }

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

struct FilterPreset {
  std::string_view name;
  FilterParams params;
};

/// Filter regimes of the published Argentina and Mexico risk maps.
inline constexpr std::array<FilterPreset, 4> kFilterPresets{{
    {"argentina-national", {0.15, 50}},
    {"argentina-broad", {0.01, 50}},
    {"amba", {0.02, 50}},
    {"mexico", {0.50, 80}},
}};

inline std::optional<FilterParams> find_preset(std::string_view name) {
  for (const auto& p : kFilterPresets)
    if (p.name == name) return p.params;
  return std::nullopt;
}

inline bool passes_filter(const AntennaIndicators& a, const FilterParams& params) noexcept {
  if (a.n_residents == 0) return false;
  return a.n_residents > params.min_volume && a.vulnerable_fraction() > params.beta;
}

inline std::vector<AntennaIndicators> filter_antennas(std::span<const AntennaIndicators> rows,
                                                      const FilterParams& params) {
  params.validate();
  std::vector<AntennaIndicators> kept;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(kept),
               [&](const AntennaIndicators& a) { return passes_filter(a, params); });
  return kept;
}

struct HeatmapCircle {
  std::string antenna_id;
  GeoPoint center;
  double radius_scale = 0.0;  // k * sqrt(population): area tracks population
  double intensity = 0.0;     // vulnerable / population
  std::uint64_t population = 0;
  std::uint64_t vulnerable = 0;

  friend bool operator==(const HeatmapCircle&, const HeatmapCircle&) = default;
};

inline std::vector<HeatmapCircle> build_circles(std::span<const AntennaIndicators> kept,
                                                const AntennaRegistry& registry,
                                                double k = 1.0) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("radius constant k must be > 0");
  std::vector<HeatmapCircle> out;
  out.reserve(kept.size());
  for (const auto& a : kept) {
    if (!registry.contains(a.antenna))
      throw ConsistencyError("antenna index " + std::to_string(a.antenna.value) +
                             " missing from registry");
    out.push_back({registry.name(a.antenna), registry.location(a.antenna),
                   k * std::sqrt(static_cast<double>(a.n_residents)), a.vulnerable_fraction(),
                   a.n_residents, a.n_vulnerable});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.antenna_id < b.antenna_id; });
  return out;
}

enum class LayerFormat { geojson, csv };

/// RFC 7946 FeatureCollection of Points, or the CSV mirror
/// `antenna_id,lat,lon,N,V,intensity,radius_scale`. Byte-deterministic.
inline std::string export_layer(std::span<const HeatmapCircle> circles, LayerFormat format) {
  std::vector<const HeatmapCircle*> sorted;
  for (const auto& c : circles) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->antenna_id < b->antenna_id; });

  if (format == LayerFormat::csv) {
    std::string out;
    for (const auto* c : sorted) {
      out += c->antenna_id;
      out.push_back(',');
      append_double(out, c->center.lat);
      out.push_back(',');
      append_double(out, c->center.lon);
      out += "," + std::to_string(c->population) + "," + std::to_string(c->vulnerable) + ",";
      append_double(out, c->intensity);
      out.push_back(',');
      append_double(out, c->radius_scale);
      out.push_back('\n');
    }
    return out;
  }

  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto* c : sorted) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["id"] = c->antenna_id;
    f["geometry"] = {{"type", "Point"},
                     {"coordinates", nlohmann::ordered_json::array({c->center.lon, c->center.lat})}};
    f["properties"] = {{"antenna_id", c->antenna_id},
                       {"population", c->population},
                       {"vulnerable", c->vulnerable},
                       {"intensity", c->intensity},
                       {"radius_scale", c->radius_scale}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump(2) + "\n";
}

}  // namespace riskmap
