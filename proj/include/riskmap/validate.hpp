#pragma once

#include <chrono>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "riskmap/cdr_ingest.hpp"
#include "riskmap/heatmap.hpp"
#include "riskmap/home_detection.hpp"
#include "riskmap/oracles.hpp"
#include "riskmap/risk_model.hpp"
#include "riskmap/social_graph.hpp"
#include "riskmap/synth.hpp"

namespace riskmap {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs every stage on a synthetic dataset and compares it with the
/// brute-force oracles and the generator manifest.
inline std::vector<CheckResult> run_validation(const SynthConfig& cfg) {
  std::vector<CheckResult> results;
  auto check = [&](std::string name, const std::function<std::string()>& body) {
    CheckResult r{std::move(name), false, {}};
    try {
      r.detail = body();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string{"exception: "} + e.what();
    }
    if (r.passed) r.detail = "ok";
    results.push_back(std::move(r));
  };

  const SynthDataset ds = generate(cfg);
  std::string text = export_cdr(ds.records, ds.users, ds.registry);
  // a few broken lines so the malformed path is exercised too
  text += "broken line without fields\n";
  text += "u1,u2,2011-13-01T00:00:00-03:00,out," + ds.registry.name(AntennaId{0}) + "\n";
  text += "u1,u2,2011-11-01T00:00:00-03:00,sideways," + ds.registry.name(AntennaId{0}) + "\n";

  const CdrBatch batch = parse_cdr_stream(text, ds.registry);
  const auto raw = oracle::raw_calls(text);
  const auto names = [&](const UserSet& s) {
    std::set<std::string> out;
    for (UserId u : s.members()) out.insert(batch.users.name(u));
    return out;
  };

  check("ingest: malformed lines counted", [&]() -> std::string {
    std::size_t bad = 0, total = 0;
    for (const auto& line : oracle::lines_of(text)) {
      if (line.empty()) continue;
      ++total;
      bad += !oracle::line_well_formed(line);
    }
    if (batch.report.records_dropped_malformed != bad)
      return "malformed " + std::to_string(batch.report.records_dropped_malformed) +
             " vs oracle " + std::to_string(bad);
    if (batch.report.records_read != total || batch.records.size() != raw.size())
      return "record counts disagree with oracle";
    if (batch.report.records_read != batch.records.size() + batch.report.records_dropped())
      return "report conservation violated";
    return {};
  });

  const ActivityFilterConfig activity{};
  const UserSet kept = filter_users_by_activity(batch.records, batch.users.size(), activity);
  check("activity filter vs recount", [&]() -> std::string {
    return names(kept) == oracle::kept_users(raw, activity.mu, activity.m_cap)
               ? std::string{}
               : "kept sets differ";
  });

  UserSet clients(batch.users.size());
  const UserSet localized = localized_users(batch.records, batch.users.size());
  for (UserId u : kept.members())
    if (localized.contains(u)) clients.insert(u);
  const auto client_names = names(clients);

  const SocialGraph graph = build_graph(batch.records, clients);
  check("graph vs pairwise scan", [&]() -> std::string {
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& [a, b] : graph.edges()) got.emplace(batch.users.name(a), batch.users.name(b));
    return got == oracle::graph_edges(raw, client_names) ? std::string{} : "edge sets differ";
  });

  const HomeMap homes = detect_homes(batch.records, clients, batch.users.size());
  check("homes vs night recount", [&]() -> std::string {
    std::map<std::string, oracle::RawHome> got;
    for (const auto& h : homes.assignments())
      got[batch.users.name(h.user)] = {ds.registry.name(h.home), h.night_calls_at_home,
                                       h.night_calls_total};
    return got == oracle::homes(raw, client_names) ? std::string{} : "home maps differ";
  });

  UserSet everyone(batch.users.size());
  for (std::uint32_t u = 0; u < batch.users.size(); ++u) everyone.insert(UserId{u});
  const HomeMap all_homes = detect_homes(batch.records, everyone, batch.users.size());
  check("homes vs generator manifest", [&]() -> std::string {
    std::size_t compared = 0;
    for (std::uint32_t u = 0; u < ds.users.size(); ++u) {
      const auto& su = ds.manifest.users[u];
      if (su.night_calls < cfg.min_night_calls) continue;
      const auto id = batch.users.find(ds.users.name(UserId{u}));
      const auto home = id ? all_homes.home_of(*id) : std::nullopt;
      if (!home || ds.registry.name(*home) != ds.registry.name(su.home))
        return "user " + ds.users.name(UserId{u}) + " home mismatch";
      ++compared;
    }
    return compared ? std::string{} : "no users compared";
  });

  const EndemicZone& zone = cfg.endemic_zone;
  check("point-in-zone vs crossing number", [&]() -> std::string {
    std::vector<std::vector<GeoPoint>> rings;
    for (const auto& r : zone.rings()) rings.push_back(r.vertices);
    SynthRng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<GeoPoint> pts;
    for (const auto& r : rings)
      for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        pts.push_back(r[i]);
        pts.push_back({(r[i].lat + r[i + 1].lat) / 2, (r[i].lon + r[i + 1].lon) / 2});
      }
    const GeoPoint lo = cfg.bbox.min, hi = cfg.bbox.max;
    while (pts.size() < 1000) {
      const double fy = static_cast<double>(rng.below(1u << 16)) / (1u << 16);
      const double fx = static_cast<double>(rng.below(1u << 16)) / (1u << 16);
      pts.push_back({lo.lat + fy * (hi.lat - lo.lat), lo.lon + fx * (hi.lon - lo.lon)});
    }
    for (const auto& p : pts)
      if (point_in_zone(p, zone) != oracle::point_in_rings(p.lat, p.lon, rings))
        return "disagreement at (" + format_double(p.lat) + ", " + format_double(p.lon) + ")";
    return {};
  });

  check("residents vs generator manifest", [&]() -> std::string {
    const UserSet res = residents_of_zone(all_homes, ds.registry, zone);
    for (std::uint32_t u = 0; u < ds.users.size(); ++u) {
      const auto id = batch.users.find(ds.users.name(UserId{u}));
      const bool got = id && res.contains(*id);
      if (got != ds.manifest.users[u].endemic)
        return "user " + ds.users.name(UserId{u}) + " residency mismatch";
    }
    return {};
  });

  const UserSet residents = residents_of_zone(homes, ds.registry, zone);
  const UserSet vulnerable = tag_vulnerable(graph, residents);
  oracle::Adjacency adj;
  for (UserId u : clients.members()) {
    auto& row = adj[batch.users.name(u)];
    for (UserId v : graph.neighbors(u)) row.insert(batch.users.name(v));
  }
  check("vulnerable tagging vs brute force", [&]() -> std::string {
    return names(vulnerable) == oracle::vulnerable(adj, names(residents)) ? std::string{}
                                                                         : "tag sets differ";
  });

  const auto indicators =
      compute_indicators(batch.records, homes, residents, vulnerable, ds.registry);
  check("indicators vs recount", [&]() -> std::string {
    std::map<std::string, std::string> home_of;
    for (const auto& h : homes.assignments())
      home_of[batch.users.name(h.user)] = ds.registry.name(h.home);
    std::vector<std::string> antennas(ds.registry.names().names().begin(),
                                      ds.registry.names().names().end());
    const auto expect =
        oracle::indicators(raw, home_of, names(residents), names(vulnerable), antennas);
    for (const auto& a : indicators) {
      const auto& e = expect.at(ds.registry.name(a.antenna));
      if (e != std::array<std::uint64_t, 4>{a.n_residents, a.n_vulnerable, a.calls_out,
                                            a.vulnerable_calls})
        return "antenna " + ds.registry.name(a.antenna) + " differs";
    }
    return expect.size() == indicators.size() ? std::string{} : "antenna count differs";
  });

  check("filter inclusion chains", [&]() -> std::string {
    const double betas[] = {0.0, 0.01, 0.02, 0.15, 0.5};
    const std::uint64_t volumes[] = {0, 50, 80};
    auto ids = [&](double b, std::uint64_t m) {
      std::set<std::uint32_t> s;
      for (const auto& a : filter_antennas(indicators, {b, m})) s.insert(a.antenna.value);
      return s;
    };
    for (std::uint64_t m : volumes)
      for (std::size_t i = 0; i + 1 < std::size(betas); ++i) {
        const auto wide = ids(betas[i], m), narrow = ids(betas[i + 1], m);
        if (!std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()))
          return "beta chain broken";
      }
    for (double b : betas)
      for (std::size_t i = 0; i + 1 < std::size(volumes); ++i) {
        const auto wide = ids(b, volumes[i]), narrow = ids(b, volumes[i + 1]);
        if (!std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()))
          return "min_volume chain broken";
      }
    return {};
  });

  check("circles recomputed", [&]() -> std::string {
    const auto kept_antennas = filter_antennas(indicators, {0.0, 0});
    const auto circles = build_circles(kept_antennas, ds.registry, 2.0);
    for (std::size_t i = 0; i < circles.size(); ++i) {
      const auto& a = kept_antennas[i];
      const auto& c = circles[i];
      if (c.antenna_id != ds.registry.name(a.antenna) ||
          c.radius_scale != 2.0 * std::sqrt(static_cast<double>(a.n_residents)) ||
          c.intensity != static_cast<double>(a.n_vulnerable) / static_cast<double>(a.n_residents))
        return "circle " + c.antenna_id + " differs";
    }
    const auto again = build_circles(kept_antennas, ds.registry, 2.0);
    if (export_layer(circles, LayerFormat::geojson) != export_layer(again, LayerFormat::geojson) ||
        export_layer(circles, LayerFormat::csv) != export_layer(again, LayerFormat::csv))
      return "layer export not deterministic";
    return {};
  });

  return results;
}

}  // namespace riskmap
