#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/cdr_ingest.hpp"
#include "riskmap/civil_time.hpp"
#include "riskmap/error.hpp"
#include "riskmap/geometry.hpp"
#include "riskmap/home_detection.hpp"
#include "riskmap/io.hpp"
#include "riskmap/parallel.hpp"
#include "riskmap/social_graph.hpp"

namespace riskmap {

struct BoundingBox {
  GeoPoint min{-40.0, -70.0};
  GeoPoint max{-20.0, -55.0};
};

/// A nine-vertex region in the north of the default bounding box.
inline EndemicZone default_synth_zone() {
  const std::vector<GeoPoint> v = {{-21.5, -66.0}, {-21.0, -62.0}, {-22.5, -58.5},
                                   {-25.0, -57.5}, {-28.5, -59.0}, {-30.5, -61.0},
                                   {-30.0, -64.0}, {-28.0, -66.5}, {-25.0, -67.5},
                                   {-21.5, -66.0}};
  return EndemicZone::from_rings("synthetic endemic zone", {Ring{v}});
}

struct SynthConfig {
  std::uint64_t seed = 1;
  std::uint32_t n_users = 1000;
  std::uint32_t n_antennas = 200;
  std::uint32_t n_days = 30;
  CivilDate start_date{2011, 11, 1};
  std::int32_t utc_offset_minutes = -180;
  BoundingBox bbox{};
  EndemicZone endemic_zone = default_synth_zone();
  double endemic_fraction = 0.2;
  /// Probability a weekday-night call is routed by the home antenna.
  double home_night_affinity = 0.8;
  double mean_degree = 8.0;
  /// Edge-weight multiplier toward antennas inside the zone.
  double endemic_tie_bias = 3.0;
  double calls_per_user_day = 2.0;
  /// Edge weight decays as exp(-distance / distance_decay_km).
  double distance_decay_km = 150.0;
  /// Share of a user's localized events written as incoming records.
  double incoming_share = 0.5;
  std::uint32_t min_night_calls = 4;

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("synth: " + m); };
    if (n_users < 2) fail("n_users must be at least 2");
    if (n_antennas < 1) fail("n_antennas must be positive");
    if (n_days < 2) fail("n_days must be at least 2");
    if (!days_from_civil(start_date)) fail("invalid start date");
    if (!(endemic_fraction >= 0.0 && endemic_fraction <= 1.0))
      fail("endemic_fraction must lie in [0, 1]");
    if (!(home_night_affinity > 0.5 && home_night_affinity <= 1.0))
      fail("home_night_affinity must lie in (0.5, 1]");
    if (!(mean_degree >= 1.0)) fail("mean_degree must be at least 1");
    if (mean_degree >= n_users) fail("mean_degree must be below n_users");
    if (!(endemic_tie_bias > 0.0)) fail("endemic_tie_bias must be positive");
    if (!(calls_per_user_day > 0.0)) fail("calls_per_user_day must be positive");
    if (!(distance_decay_km > 0.0)) fail("distance_decay_km must be positive");
    if (!(incoming_share >= 0.0 && incoming_share <= 1.0))
      fail("incoming_share must lie in [0, 1]");
    if (min_night_calls < 1) fail("min_night_calls must be positive");
    if (!(bbox.min.lat < bbox.max.lat && bbox.min.lon < bbox.max.lon) ||
        !AntennaRegistry::valid(bbox.min) || !AntennaRegistry::valid(bbox.max))
      fail("invalid bounding box");
    const GeoPoint lo = endemic_zone.bbox_min(), hi = endemic_zone.bbox_max();
    if (endemic_zone.rings().empty() || lo.lat < bbox.min.lat || lo.lon < bbox.min.lon ||
        hi.lat > bbox.max.lat || hi.lon > bbox.max.lon)
      fail("endemic zone must lie inside the bounding box");
    const bool need_inside = endemic_fraction > 0.0, need_outside = endemic_fraction < 1.0;
    if (need_inside && need_outside && n_antennas < 2)
      fail("need at least 2 antennas to place homes inside and outside the zone");
  }
};

struct SynthUser {
  AntennaId home;
  bool endemic = false;
  std::uint32_t night_calls = 0;
  std::uint32_t calls = 0;
};

/// What the generator put in, for use as a test oracle.
struct GroundTruthManifest {
  std::vector<SynthUser> users;  // indexed by UserId
  std::vector<std::pair<UserId, UserId>> edges;  // canonical, sorted
  std::vector<std::uint32_t> antenna_population;  // indexed by AntennaId
  std::vector<std::uint8_t> antenna_in_zone;
};

struct SynthDataset {
  SynthConfig config;
  AntennaRegistry registry;
  UserTable users;
  std::vector<CallRecord> records;
  GroundTruthManifest manifest;
};

/// std::mt19937_64 (its output sequence is fixed by the C++ standard) with
/// portable integer-only draws; std distributions are not portable.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

  /// True with probability threshold / 2^53 (see probability_threshold).
  bool chance(std::uint64_t threshold) { return (next() >> 11) < threshold; }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t probability_threshold(double p) {
  return static_cast<std::uint64_t>(std::llround(std::clamp(p, 0.0, 1.0) * 9007199254740992.0));
}

namespace detail {

inline std::string padded_id(char prefix, std::uint32_t i, std::uint32_t n) {
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

inline std::int64_t to_micro(double deg) { return std::llround(deg * 1e6); }

}  // namespace detail

inline SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthRng rng(cfg.seed);
  SynthDataset out;
  out.config = cfg;
  const EndemicZone& zone = cfg.endemic_zone;

  // Antennas: split by zone area share, each uniform by rejection.
  const std::int64_t lat0 = detail::to_micro(cfg.bbox.min.lat), lat1 = detail::to_micro(cfg.bbox.max.lat);
  const std::int64_t lon0 = detail::to_micro(cfg.bbox.min.lon), lon1 = detail::to_micro(cfg.bbox.max.lon);
  auto draw_point = [&] {
    const auto la = lat0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(lat1 - lat0 + 1)));
    const auto lo = lon0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(lon1 - lon0 + 1)));
    return GeoPoint{static_cast<double>(la) / 1e6, static_cast<double>(lo) / 1e6};
  };
  std::uint32_t grid_inside = 0;
  constexpr std::uint32_t kGrid = 200;
  for (std::uint32_t i = 0; i < kGrid; ++i)
    for (std::uint32_t j = 0; j < kGrid; ++j) {
      const GeoPoint p{cfg.bbox.min.lat + (i + 0.5) * (cfg.bbox.max.lat - cfg.bbox.min.lat) / kGrid,
                       cfg.bbox.min.lon + (j + 0.5) * (cfg.bbox.max.lon - cfg.bbox.min.lon) / kGrid};
      grid_inside += point_in_zone(p, zone);
    }
  auto n_inside = static_cast<std::uint32_t>(
      (std::uint64_t{cfg.n_antennas} * grid_inside + kGrid * kGrid / 2) / (kGrid * kGrid));
  if (cfg.endemic_fraction > 0.0) n_inside = std::max(n_inside, 1u);
  if (cfg.endemic_fraction < 1.0) n_inside = std::min(n_inside, cfg.n_antennas - 1);

  std::vector<std::pair<GeoPoint, bool>> sites;
  for (std::uint32_t i = 0; i < cfg.n_antennas; ++i) {
    const bool want_inside = i < n_inside;
    for (std::uint64_t tries = 0;; ++tries) {
      if (tries > 10'000'000) throw ConfigError("synth: cannot place antennas (zone too small?)");
      const GeoPoint p = draw_point();
      if (point_in_zone(p, zone) == want_inside) {
        sites.emplace_back(p, want_inside);
        break;
      }
    }
  }
  for (std::size_t i = sites.size(); i > 1; --i) std::swap(sites[i - 1], sites[rng.below(i)]);

  std::vector<std::pair<std::string, GeoPoint>> entries;
  std::vector<AntennaId> inside_ids, outside_ids;
  out.manifest.antenna_in_zone.resize(cfg.n_antennas);
  for (std::uint32_t i = 0; i < cfg.n_antennas; ++i) {
    entries.emplace_back(detail::padded_id('A', i, cfg.n_antennas), sites[i].first);
    out.manifest.antenna_in_zone[i] = sites[i].second;
    (sites[i].second ? inside_ids : outside_ids).push_back(AntennaId{i});
  }
  out.registry = AntennaRegistry::from_entries(std::move(entries));
  const std::uint32_t n_ant = cfg.n_antennas;

  // Users and homes.
  const std::uint32_t n_users = cfg.n_users;
  std::vector<std::string> names;
  for (std::uint32_t u = 0; u < n_users; ++u) names.push_back(detail::padded_id('u', u, n_users));
  out.users = UserTable::from_names(std::move(names));
  auto& users = out.manifest.users;
  users.resize(n_users);
  auto n_endemic = static_cast<std::uint32_t>(std::llround(cfg.endemic_fraction * n_users));
  if (inside_ids.empty()) n_endemic = 0;
  if (outside_ids.empty()) n_endemic = n_users;
  std::vector<std::uint32_t> order(n_users);
  for (std::uint32_t u = 0; u < n_users; ++u) order[u] = u;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::uint32_t k = 0; k < n_users; ++k) {
    auto& su = users[order[k]];
    su.endemic = k < n_endemic;
    const auto& pool = su.endemic ? inside_ids : outside_ids;
    su.home = pool[rng.below(pool.size())];
  }
  out.manifest.antenna_population.assign(n_ant, 0);
  std::vector<std::vector<std::uint32_t>> residents(n_ant);
  for (std::uint32_t u = 0; u < n_users; ++u) {
    ++out.manifest.antenna_population[users[u].home.value];
    residents[users[u].home.value].push_back(u);
  }

  // Distances, nearest neighbours and quantized edge weights between antennas.
  std::vector<double> dist(std::size_t{n_ant} * n_ant);
  for (std::uint32_t a = 0; a < n_ant; ++a)
    for (std::uint32_t b = 0; b < n_ant; ++b)
      dist[std::size_t{a} * n_ant + b] =
          haversine_km(out.registry.location(AntennaId{a}), out.registry.location(AntennaId{b}));
  std::vector<std::vector<std::uint64_t>> cumulative(n_ant);
  for (std::uint32_t a = 0; a < n_ant; ++a) {
    std::vector<double> w(n_ant);
    double wmax = 0.0;
    for (std::uint32_t b = 0; b < n_ant; ++b) {
      w[b] = out.manifest.antenna_population[b] *
             std::exp(-dist[std::size_t{a} * n_ant + b] / cfg.distance_decay_km) *
             (out.manifest.antenna_in_zone[b] ? cfg.endemic_tie_bias : 1.0);
      wmax = std::max(wmax, w[b]);
    }
    auto& cum = cumulative[a];
    cum.resize(n_ant);
    std::uint64_t acc = 0;
    for (std::uint32_t b = 0; b < n_ant; ++b) {
      acc += wmax > 0 ? static_cast<std::uint64_t>(std::llround(std::ldexp(w[b] / wmax, 40))) : 0;
      cum[b] = acc;
    }
  }

  // Social edges: each user opens ~mean_degree/2 ties.
  std::vector<std::uint64_t> packed;
  const auto whole_stubs = static_cast<std::uint32_t>(cfg.mean_degree / 2);
  const std::uint64_t frac_stub = probability_threshold(cfg.mean_degree / 2 - whole_stubs);
  for (std::uint32_t u = 0; u < n_users; ++u) {
    std::uint32_t stubs = whole_stubs + (rng.chance(frac_stub) ? 1 : 0);
    stubs = std::max(stubs, 1u);
    const auto& cum = cumulative[users[u].home.value];
    for (std::uint32_t s = 0; s < stubs; ++s) {
      for (int attempt = 0; attempt < 16; ++attempt) {
        if (cum.back() == 0) break;
        const std::uint64_t x = rng.below(cum.back());
        const auto b = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), x) - cum.begin());
        const auto& at = residents[b];
        const std::uint32_t v = at[rng.below(at.size())];
        if (v == u) continue;
        packed.push_back(SocialGraph::pack(std::min(u, v), std::max(u, v)));
        break;
      }
    }
  }
  std::sort(packed.begin(), packed.end());
  packed.erase(std::unique(packed.begin(), packed.end()), packed.end());
  std::vector<std::vector<std::uint32_t>> adj(n_users);
  for (std::uint64_t e : packed) {
    const auto [a, b] = SocialGraph::unpack(e);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (std::uint32_t u = 0; u < n_users; ++u) {
    if (!adj[u].empty()) continue;
    std::uint32_t v = static_cast<std::uint32_t>(rng.below(n_users - 1));
    if (v >= u) ++v;
    adj[u].push_back(v);
    adj[v].push_back(u);
    packed.push_back(SocialGraph::pack(std::min(u, v), std::max(u, v)));
  }
  std::sort(packed.begin(), packed.end());
  packed.erase(std::unique(packed.begin(), packed.end()), packed.end());
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  for (std::uint64_t e : packed) {
    const auto [a, b] = SocialGraph::unpack(e);
    out.manifest.edges.emplace_back(UserId{a}, UserId{b});
  }

  // Every edge gets at least one call, owned by a random endpoint.
  std::vector<std::vector<std::uint32_t>> forced(n_users);
  for (std::uint64_t e : packed) {
    const auto [a, b] = SocialGraph::unpack(e);
    if (rng.chance(probability_threshold(0.5)))
      forced[a].push_back(b);
    else
      forced[b].push_back(a);
  }

  // Per-user antenna pool: home plus 2-3 of the 8 nearest other antennas.
  std::vector<std::vector<std::uint32_t>> nearest(n_ant);
  for (std::uint32_t a = 0; a < n_ant; ++a) {
    std::vector<std::uint32_t> idx;
    for (std::uint32_t b = 0; b < n_ant; ++b)
      if (b != a) idx.push_back(b);
    const std::size_t keep = std::min<std::size_t>(8, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::uint32_t x, std::uint32_t y) {
                        const double dx = dist[std::size_t{a} * n_ant + x];
                        const double dy = dist[std::size_t{a} * n_ant + y];
                        return dx < dy || (dx == dy && x < y);
                      });
    idx.resize(keep);
    nearest[a] = std::move(idx);
  }

  // Calendar: nights whose morning tail still falls inside the window.
  const NightWindowConfig night{};
  const std::int64_t day0 = *days_from_civil(cfg.start_date);
  const std::int64_t offset = std::int64_t{cfg.utc_offset_minutes} * 60;
  std::vector<std::int64_t> night_days;
  for (std::int64_t d = day0; d + 1 < day0 + cfg.n_days; ++d)
    if (night.night_days.contains(weekday_from_days(d))) night_days.push_back(d);
  if (night_days.empty()) throw ConfigError("synth: window contains no weekday night");
  const auto night_len = static_cast<std::uint64_t>((24 - night.start_hour + night.end_hour) * 3600);
  const std::uint64_t window_secs = std::uint64_t{cfg.n_days} * 86400;

  const std::uint64_t p_home = probability_threshold(cfg.home_night_affinity);
  const std::uint64_t p_incoming = probability_threshold(cfg.incoming_share);
  const double mean_calls = cfg.calls_per_user_day * cfg.n_days;
  const auto lo_calls = static_cast<std::uint64_t>(std::max(1.0, std::floor(mean_calls / 2)));
  const auto hi_calls = std::max(lo_calls, static_cast<std::uint64_t>(std::ceil(mean_calls * 1.5)));

  struct Event {
    std::int64_t local;
    std::uint32_t owner, partner, antenna;
    bool incoming;
  };
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(mean_calls * n_users * 1.05));
  std::vector<std::uint32_t> night_antennas, tally(n_ant, 0);
  for (std::uint32_t u = 0; u < n_users; ++u) {
    auto& su = users[u];
    const std::uint32_t home = su.home.value;
    std::vector<std::uint32_t> pool{home};
    const auto& near = nearest[home];
    const std::uint64_t extra = std::min<std::uint64_t>(2 + rng.below(2), near.size());
    std::vector<std::uint32_t> cand = near;
    for (std::uint64_t k = 0; k < extra; ++k) {
      const auto j = static_cast<std::size_t>(k + rng.below(cand.size() - k));
      std::swap(cand[k], cand[j]);
      pool.push_back(cand[k]);
    }

    auto total = static_cast<std::uint32_t>(lo_calls + rng.below(hi_calls - lo_calls + 1));
    total = std::max<std::uint32_t>(total, static_cast<std::uint32_t>(forced[u].size()));
    const std::uint32_t n_night = std::max(cfg.min_night_calls, total / 4);
    total = std::max(total, n_night);
    su.calls = total;
    su.night_calls = n_night;

    // Redraw until the home is the strict mode of the night antennas.
    for (;;) {
      night_antennas.clear();
      for (std::uint32_t k = 0; k < n_night; ++k) {
        if (pool.size() == 1 || rng.chance(p_home))
          night_antennas.push_back(home);
        else
          night_antennas.push_back(pool[1 + rng.below(pool.size() - 1)]);
      }
      for (std::uint32_t a : pool) tally[a] = 0;
      for (std::uint32_t a : night_antennas) ++tally[a];
      bool strict = true;
      for (std::size_t k = 1; k < pool.size(); ++k) strict &= tally[pool[k]] < tally[home];
      if (strict) break;
    }

    for (std::uint32_t k = 0; k < total; ++k) {
      Event ev{};
      ev.owner = u;
      ev.partner = k < forced[u].size() ? forced[u][k]
                                        : adj[u][rng.below(adj[u].size())];
      if (k < n_night) {
        const std::int64_t d = night_days[rng.below(night_days.size())];
        ev.local = d * 86400 + std::int64_t{night.start_hour} * 3600 +
                   static_cast<std::int64_t>(rng.below(night_len));
        ev.antenna = night_antennas[k];
      } else {
        do ev.local = day0 * 86400 + static_cast<std::int64_t>(rng.below(window_secs));
        while (is_weekday_night(Timestamp{ev.local - offset, static_cast<std::int32_t>(offset)}, night));
        ev.antenna = pool[rng.below(pool.size())];
      }
      ev.incoming = rng.chance(p_incoming);
      events.push_back(ev);
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.local < b.local; });
  out.records.reserve(events.size());
  for (const auto& ev : events) {
    CallRecord r;
    r.time = Timestamp{ev.local - offset, static_cast<std::int32_t>(offset)};
    r.antenna = AntennaId{ev.antenna};
    if (ev.incoming) {
      r.caller = UserId{ev.partner};
      r.callee = UserId{ev.owner};
      r.direction = Direction::incoming;
    } else {
      r.caller = UserId{ev.owner};
      r.callee = UserId{ev.partner};
      r.direction = Direction::outgoing;
    }
    out.records.push_back(r);
  }
  return out;
}

/// Streams records in the CDR file format.
inline void write_cdr_file(const fs::path& path, std::span<const CallRecord> records,
                           const UserTable& users, const AntennaRegistry& registry) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  constexpr std::size_t kBlock = 1 << 14;
  for (std::size_t i = 0; i < records.size(); i += kBlock) {
    const std::string text =
        export_cdr(records.subspan(i, std::min(kBlock, records.size() - i)), users, registry);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  }
  if (!out) throw IoError("cannot write " + path.string());
}

inline nlohmann::ordered_json synth_config_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"n_users", c.n_users},
          {"n_antennas", c.n_antennas},
          {"n_days", c.n_days},
          {"start_date", format_civil_date(c.start_date)},
          {"utc_offset_minutes", c.utc_offset_minutes},
          {"bbox", {c.bbox.min.lat, c.bbox.min.lon, c.bbox.max.lat, c.bbox.max.lon}},
          {"endemic_fraction", c.endemic_fraction},
          {"home_night_affinity", c.home_night_affinity},
          {"mean_degree", c.mean_degree},
          {"endemic_tie_bias", c.endemic_tie_bias},
          {"calls_per_user_day", c.calls_per_user_day},
          {"distance_decay_km", c.distance_decay_km},
          {"incoming_share", c.incoming_share},
          {"min_night_calls", c.min_night_calls}};
}

/// manifest.json, schema "riskmap-synth-manifest" version 1.
inline std::string manifest_to_json(const SynthDataset& ds) {
  nlohmann::ordered_json doc;
  doc["schema"] = "riskmap-synth-manifest";
  doc["version"] = 1;
  doc["prng"] = "mt19937_64";
  doc["config"] = synth_config_json(ds.config);
  auto& antennas = doc["antennas"] = nlohmann::ordered_json::array();
  for (std::uint32_t a = 0; a < ds.registry.size(); ++a) {
    const GeoPoint p = ds.registry.location(AntennaId{a});
    antennas.push_back({{"id", ds.registry.name(AntennaId{a})},
                        {"lat", p.lat},
                        {"lon", p.lon},
                        {"in_zone", ds.manifest.antenna_in_zone[a] != 0},
                        {"population", ds.manifest.antenna_population[a]}});
  }
  auto& users = doc["users"] = nlohmann::ordered_json::array();
  for (std::uint32_t u = 0; u < ds.users.size(); ++u) {
    const auto& su = ds.manifest.users[u];
    users.push_back({{"id", ds.users.name(UserId{u})},
                     {"home", ds.registry.name(su.home)},
                     {"endemic", su.endemic},
                     {"night_calls", su.night_calls},
                     {"calls", su.calls}});
  }
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : ds.manifest.edges)
    edges.push_back({ds.users.name(a), ds.users.name(b)});
  return doc.dump(1) + "\n";
}

struct SynthFiles {
  std::vector<fs::path> cdr;
  fs::path antennas, zone, manifest;
};

/// Writes `cdr.csv` (or `cdr-NNN.csv` parts), `antennas.csv`,
/// `zone.geojson` and `manifest.json` into `dir`.
inline SynthFiles write_synth(const SynthDataset& ds, const fs::path& dir,
                              unsigned cdr_parts = 1) {
  fs::create_directories(dir);
  SynthFiles files;
  cdr_parts = std::max(1u, cdr_parts);
  const std::span<const CallRecord> all = ds.records;
  for (const auto& [b, e] : split_evenly(all.size(), cdr_parts)) {
    std::string name = "cdr.csv";
    if (cdr_parts > 1) {
      std::string idx = std::to_string(files.cdr.size());
      name = "cdr-" + std::string(idx.size() < 3 ? 3 - idx.size() : 0, '0') + idx + ".csv";
    }
    const fs::path p = dir / name;
    write_cdr_file(p, all.subspan(b, e - b), ds.users, ds.registry);
    files.cdr.push_back(p);
  }
  files.antennas = dir / "antennas.csv";
  write_text_file(files.antennas, export_antennas(ds.registry));
  files.zone = dir / "zone.geojson";
  write_text_file(files.zone, zone_to_geojson(ds.config.endemic_zone));
  files.manifest = dir / "manifest.json";
  write_text_file(files.manifest, manifest_to_json(ds));
  return files;
}

}  // namespace riskmap
