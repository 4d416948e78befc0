#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/error.hpp"

namespace riskmap {

/// Closed ring: first vertex repeated as the last.
struct Ring {
  std::vector<GeoPoint> vertices;

  friend bool operator==(const Ring&, const Ring&) = default;
};

namespace detail {

/// Twice the signed area of triangle (a, b, p) in (lon, lat) space.
inline double orient(GeoPoint a, GeoPoint b, GeoPoint p) noexcept {
  return (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
}

inline bool on_segment(GeoPoint a, GeoPoint b, GeoPoint p) noexcept {
  if (orient(a, b, p) != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

inline int sign(double v) noexcept { return (v > 0) - (v < 0); }

inline bool segments_intersect(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) noexcept {
  const int o1 = sign(orient(a, b, c)), o2 = sign(orient(a, b, d));
  const int o3 = sign(orient(c, d, a)), o4 = sign(orient(c, d, b));
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
         (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

inline double ring_area2(const Ring& r) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < r.vertices.size(); ++i)
    acc += r.vertices[i].lon * r.vertices[i + 1].lat - r.vertices[i + 1].lon * r.vertices[i].lat;
  return acc;
}

inline void validate_ring(const Ring& r, std::size_t index) {
  const auto& v = r.vertices;
  const std::string where = "ring " + std::to_string(index);
  if (v.size() < 4) throw ConsistencyError(where + " needs at least 3 distinct vertices");
  if (!(v.front() == v.back())) throw ConsistencyError(where + " is not closed");
  for (const auto& p : v)
    if (!AntennaRegistry::valid(p)) throw ConsistencyError(where + " has an invalid coordinate");
  if (ring_area2(r) == 0.0) throw ConsistencyError(where + " is degenerate (zero area)");
  const std::size_t n = v.size() - 1;  // edges
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == v[i + 1]) throw ConsistencyError(where + " repeats a vertex");
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // neighbours share one endpoint; they must not fold back over each other
        const GeoPoint shared = j == i + 1 ? v[i + 1] : v[i];
        const GeoPoint p = j == i + 1 ? v[i] : v[i + 1];
        const GeoPoint q = j == i + 1 ? v[j + 1] : v[j];
        if (orient(p, shared, q) == 0.0 &&
            (q.lon - shared.lon) * (p.lon - shared.lon) + (q.lat - shared.lat) * (p.lat - shared.lat) > 0)
          throw ConsistencyError(where + " is self-intersecting");
        continue;
      }
      if (segments_intersect(v[i], v[i + 1], v[j], v[j + 1]))
        throw ConsistencyError(where + " is self-intersecting");
    }
  }
}

}  // namespace detail

/// Endemic region as a set of closed rings, combined under the even-odd
/// rule (holes are simply further rings).
class EndemicZone {
 public:
  EndemicZone() = default;

  static EndemicZone from_rings(std::string name, std::vector<Ring> rings) {
    if (rings.empty()) throw ConsistencyError("endemic zone has no rings");
    for (std::size_t i = 0; i < rings.size(); ++i) detail::validate_ring(rings[i], i);
    EndemicZone z;
    z.name_ = std::move(name);
    z.rings_ = std::move(rings);
    z.lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    z.hi_ = {-z.lo_.lat, -z.lo_.lon};
    for (const auto& r : z.rings_)
      for (const auto& p : r.vertices) {
        z.lo_ = {std::min(z.lo_.lat, p.lat), std::min(z.lo_.lon, p.lon)};
        z.hi_ = {std::max(z.hi_.lat, p.lat), std::max(z.hi_.lon, p.lon)};
      }
    return z;
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Ring>& rings() const noexcept { return rings_; }
  GeoPoint bbox_min() const noexcept { return lo_; }
  GeoPoint bbox_max() const noexcept { return hi_; }

 private:
  std::string name_;
  std::vector<Ring> rings_;
  GeoPoint lo_{}, hi_{};
};

/// Even-odd ray casting over all rings; boundary points count as inside.
inline bool point_in_zone(GeoPoint p, const EndemicZone& zone) noexcept {
  const GeoPoint lo = zone.bbox_min(), hi = zone.bbox_max();
  if (p.lat < lo.lat || p.lat > hi.lat || p.lon < lo.lon || p.lon > hi.lon) return false;
  bool inside = false;
  for (const auto& ring : zone.rings()) {
    const auto& v = ring.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const GeoPoint a = v[i], b = v[i + 1];
      if (detail::on_segment(a, b, p)) return true;
      // half-open in latitude so a vertex on the ray is counted once
      if (a.lat <= p.lat && b.lat > p.lat) {
        if (detail::orient(a, b, p) > 0) inside = !inside;
      } else if (b.lat <= p.lat && a.lat > p.lat) {
        if (detail::orient(a, b, p) < 0) inside = !inside;
      }
    }
  }
  return inside;
}

inline constexpr double kEarthRadiusKm = 6371.0088;

inline double haversine_km(GeoPoint a, GeoPoint b) noexcept {
  constexpr double rad = 3.14159265358979323846 / 180.0;
  const double dlat = (b.lat - a.lat) * rad, dlon = (b.lon - a.lon) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Distance from p to the nearest ring edge, in km, using an
/// equirectangular projection centred on p. Fine at regional scale.
inline double distance_to_boundary_km(GeoPoint p, const EndemicZone& zone) noexcept {
  constexpr double rad = 3.14159265358979323846 / 180.0;
  const double kx = std::cos(p.lat * rad) * rad * kEarthRadiusKm;
  const double ky = rad * kEarthRadiusKm;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ring : zone.rings()) {
    const auto& v = ring.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double ax = (v[i].lon - p.lon) * kx, ay = (v[i].lat - p.lat) * ky;
      const double bx = (v[i + 1].lon - p.lon) * kx, by = (v[i + 1].lat - p.lat) * ky;
      const double dx = bx - ax, dy = by - ay;
      const double len2 = dx * dx + dy * dy;
      double t = len2 > 0 ? -(ax * dx + ay * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, std::hypot(ax + t * dx, ay + t * dy));
    }
  }
  return best;
}

namespace detail {

inline Ring ring_from_json(const nlohmann::json& coords) {
  Ring r;
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
      throw ConsistencyError("GeoJSON position must be [lon, lat]");
    r.vertices.push_back({pos[1].get<double>(), pos[0].get<double>()});
  }
  return r;
}

inline void collect_rings(const nlohmann::json& node, std::vector<Ring>& rings) {
  const std::string type = node.value("type", "");
  if (type == "FeatureCollection") {
    for (const auto& f : node.at("features")) collect_rings(f, rings);
  } else if (type == "Feature") {
    if (!node.contains("geometry") || node["geometry"].is_null())
      throw ConsistencyError("GeoJSON feature without geometry");
    collect_rings(node["geometry"], rings);
  } else if (type == "GeometryCollection") {
    for (const auto& g : node.at("geometries")) collect_rings(g, rings);
  } else if (type == "Polygon") {
    for (const auto& ring : node.at("coordinates")) rings.push_back(ring_from_json(ring));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : node.at("coordinates"))
      for (const auto& ring : poly) rings.push_back(ring_from_json(ring));
  } else {
    throw ConsistencyError("unsupported GeoJSON type '" + type +
                           "' (need Polygon or MultiPolygon)");
  }
}

}  // namespace detail

/// Reads Polygon/MultiPolygon geometry (bare, in a Feature, or in a
/// FeatureCollection). The zone name defaults to a `name` property.
inline EndemicZone load_zone_geojson(std::string_view text, std::string name = {},
                                     const std::string& label = "<zone>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(label, 0, std::string{"invalid JSON: "} + e.what());
  }
  try {
    if (name.empty()) {
      const nlohmann::json* props = nullptr;
      if (doc.value("type", "") == "Feature" && doc.contains("properties"))
        props = &doc["properties"];
      else if (doc.value("type", "") == "FeatureCollection" && !doc["features"].empty())
        props = &doc["features"][0]["properties"];
      if (props && props->is_object() && props->contains("name") && (*props)["name"].is_string())
        name = (*props)["name"].get<std::string>();
    }
    std::vector<Ring> rings;
    detail::collect_rings(doc, rings);
    return EndemicZone::from_rings(name.empty() ? "endemic zone" : name, std::move(rings));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(label, 0, std::string{"malformed GeoJSON: "} + e.what());
  } catch (const ConsistencyError& e) {
    throw ParseError(label, 0, e.what());
  }
}

/// Geometry object: Polygon for one ring, MultiPolygon otherwise.
inline nlohmann::json zone_geometry_json(const EndemicZone& zone) {
  auto ring_json = [](const Ring& r) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : r.vertices) a.push_back({p.lon, p.lat});
    return a;
  };
  nlohmann::json g;
  if (zone.rings().size() == 1) {
    g["type"] = "Polygon";
    g["coordinates"] = nlohmann::json::array({ring_json(zone.rings()[0])});
  } else {
    g["type"] = "MultiPolygon";
    nlohmann::json polys = nlohmann::json::array();
    for (const auto& r : zone.rings()) polys.push_back(nlohmann::json::array({ring_json(r)}));
    g["coordinates"] = polys;
  }
  return g;
}

inline std::string zone_to_geojson(const EndemicZone& zone) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  nlohmann::ordered_json feature;
  feature["type"] = "Feature";
  feature["properties"] = {{"name", zone.name()}};
  feature["geometry"] = zone_geometry_json(zone);
  fc["features"] = nlohmann::ordered_json::array({feature});
  return fc.dump(2) + "\n";
}

}  // namespace riskmap
