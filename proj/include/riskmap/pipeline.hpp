#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/cdr_ingest.hpp"
#include "riskmap/config.hpp"
#include "riskmap/error.hpp"
#include "riskmap/geometry.hpp"
#include "riskmap/heatmap.hpp"
#include "riskmap/home_detection.hpp"
#include "riskmap/io.hpp"
#include "riskmap/risk_model.hpp"
#include "riskmap/social_graph.hpp"

namespace riskmap {

enum class Stage { config, ingest, graph, homes, risk, heatmap, synth, validate };

constexpr std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::config: return "config";
    case Stage::ingest: return "ingest";
    case Stage::graph: return "graph";
    case Stage::homes: return "homes";
    case Stage::risk: return "risk";
    case Stage::heatmap: return "heatmap";
    case Stage::synth: return "synth";
    case Stage::validate: return "validate";
  }
  return "unknown";
}

/// Process exit status for a failure in each stage. 1 is reserved for
/// unexpected errors.
constexpr int exit_code(Stage s) noexcept {
  switch (s) {
    case Stage::config: return 2;
    case Stage::ingest: return 3;
    case Stage::graph: return 4;
    case Stage::homes: return 5;
    case Stage::risk: return 6;
    case Stage::heatmap: return 7;
    case Stage::synth: return 8;
    case Stage::validate: return 9;
  }
  return 1;
}

class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& message)
      : Error(std::string{stage_name(stage)} + ": " + message), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// Runs fn, re-labelling any failure as belonging to `stage`.
template <class Fn>
decltype(auto) in_stage(Stage stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

namespace artifact {
inline constexpr std::string_view ingest_report_txt = "ingest_report.txt";
inline constexpr std::string_view ingest_report_json = "ingest_report.json";
inline constexpr std::string_view clients = "clients.txt";
inline constexpr std::string_view edges = "edges.csv";
inline constexpr std::string_view homes = "homes.csv";
inline constexpr std::string_view indicators_csv = "indicators.csv";
inline constexpr std::string_view indicators_json = "indicators.json";
inline constexpr std::string_view heatmap_geojson = "heatmap.geojson";
inline constexpr std::string_view heatmap_csv = "heatmap.csv";
inline constexpr std::string_view viewer_bundle = "viewer_bundle.json";
inline constexpr std::string_view cache = ".riskmap-cache.json";
}  // namespace artifact

/// Parsed records plus the operator-client set N_C: activity-kept users that
/// are the localized party of at least one record.
struct IngestResult {
  AntennaRegistry registry;
  CdrBatch batch;
  UserSet clients;
};

inline UserSet select_clients(const CdrBatch& batch, const ActivityFilterConfig& activity) {
  const UserSet kept = filter_users_by_activity(batch.records, batch.users.size(), activity);
  const UserSet localized = localized_users(batch.records, batch.users.size());
  UserSet clients(batch.users.size());
  for (UserId u : kept.members())
    if (localized.contains(u)) clients.insert(u);
  return clients;
}

inline IngestResult ingest_inputs(std::span<const fs::path> cdr, const fs::path& antennas,
                                  const IngestOptions& opts,
                                  const ActivityFilterConfig& activity) {
  if (!fs::exists(antennas)) throw IoError("antenna file not found: " + antennas.string());
  for (const auto& p : cdr)
    if (!fs::exists(p)) throw IoError("CDR file not found: " + p.string());
  IngestResult r;
  r.registry = load_antennas(read_text_file(antennas), antennas.string());
  r.batch = parse_cdr_files(cdr, r.registry, opts);
  r.clients = select_clients(r.batch, activity);
  r.batch.report.users_kept = r.clients.size();
  return r;
}

inline std::string export_user_list(const UserSet& users, const UserTable& table) {
  std::string out;
  for (UserId u : users.members()) {
    out += table.name(u);
    out.push_back('\n');
  }
  return out;
}

/// Names not present in `table` are ignored.
inline UserSet import_user_list(std::string_view text, const UserTable& table) {
  UserSet out(table.size());
  for_each_line(text, [&](std::string_view line) {
    if (const auto id = table.find(line)) out.insert(*id);
  });
  return out;
}

/// Indicators plus the antenna coordinates they carry, as read back from
/// indicators.json.
struct LoadedIndicators {
  AntennaRegistry registry;
  std::vector<AntennaIndicators> rows;
};

inline LoadedIndicators import_indicators_json(std::string_view text,
                                               const std::string& label = "<indicators.json>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(label, 0, std::string{"invalid JSON: "} + e.what());
  }
  try {
    std::vector<std::pair<std::string, GeoPoint>> entries;
    for (const auto& a : doc.at("antennas"))
      entries.emplace_back(a.at("antenna_id").get<std::string>(),
                           GeoPoint{a.at("lat").get<double>(), a.at("lon").get<double>()});
    LoadedIndicators out{AntennaRegistry::from_entries(std::move(entries)), {}};
    for (const auto& a : doc.at("antennas")) {
      AntennaIndicators r;
      r.antenna = *out.registry.find(a.at("antenna_id").get<std::string>());
      r.n_residents = a.at("N").get<std::uint64_t>();
      r.n_vulnerable = a.at("V").get<std::uint64_t>();
      r.calls_out = a.at("C").get<std::uint64_t>();
      r.vulnerable_calls = a.at("VC").get<std::uint64_t>();
      if (r.n_vulnerable > r.n_residents || r.vulnerable_calls > r.calls_out)
        throw ConsistencyError("indicator invariant violated (V > N or VC > C) for " +
                               a.at("antenna_id").get<std::string>());
      out.rows.push_back(r);
    }
    std::sort(out.rows.begin(), out.rows.end(),
              [](const auto& a, const auto& b) { return a.antenna < b.antenna; });
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(label, 0, std::string{"malformed indicators: "} + e.what());
  } catch (const ConsistencyError& e) {
    throw ParseError(label, 0, e.what());
  }
}

/// Beta and min-volume grids used for the reference filter table.
inline constexpr std::array<double, 5> kBetaGrid{0.0, 0.01, 0.02, 0.15, 0.5};
inline constexpr std::array<std::uint64_t, 3> kMinVolumeGrid{0, 50, 80};

/// JSON bundle for the map viewer, schema "riskmap-viewer-bundle" v1.
inline std::string viewer_bundle_json(std::span<const AntennaIndicators> indicators,
                                      const AntennaRegistry& registry, const EndemicZone& zone,
                                      const FilterParams& active,
                                      const std::optional<std::string>& preset, double radius_k) {
  nlohmann::ordered_json doc;
  doc["schema"] = "riskmap-viewer-bundle";
  doc["version"] = 1;
  doc["zone"] = {{"name", zone.name()}, {"geometry", zone_geometry_json(zone)}};
  auto& antennas = doc["antennas"] = nlohmann::ordered_json::array();
  for (const auto& a : indicators) {
    const GeoPoint p = registry.location(a.antenna);
    antennas.push_back({{"id", registry.name(a.antenna)},
                        {"lat", p.lat},
                        {"lon", p.lon},
                        {"N", a.n_residents},
                        {"V", a.n_vulnerable},
                        {"C", a.calls_out},
                        {"VC", a.vulnerable_calls},
                        {"intensity", a.vulnerable_fraction()}});
  }
  auto& presets = doc["presets"] = nlohmann::ordered_json::array();
  for (const auto& p : kFilterPresets)
    presets.push_back({{"name", p.name}, {"beta", p.params.beta}, {"min_volume", p.params.min_volume}});
  doc["active_filter"] = {{"preset", preset ? nlohmann::ordered_json(*preset) : nlohmann::ordered_json()},
                          {"beta", active.beta},
                          {"min_volume", active.min_volume}};
  doc["radius_k"] = radius_k;
  auto& table = doc["reference_filters"] = nlohmann::ordered_json::array();
  for (double beta : kBetaGrid)
    for (std::uint64_t mv : kMinVolumeGrid) {
      nlohmann::ordered_json visible = nlohmann::ordered_json::array();
      for (const auto& a : filter_antennas(indicators, {beta, mv})) visible.push_back(registry.name(a.antenna));
      table.push_back({{"beta", beta}, {"min_volume", mv}, {"visible", visible}});
    }
  return doc.dump(1) + "\n";
}

struct StageReport {
  Stage stage;
  bool cached = false;
  double seconds = 0.0;
};

struct RunSummary {
  std::vector<StageReport> stages;

  bool all_cached() const {
    return std::all_of(stages.begin(), stages.end(), [](const auto& s) { return s.cached; });
  }
};

/// Writes ingest report, client list, edge list, homes, indicators and
/// heatmap layers into cfg.output_dir. A stage is skipped when the content
/// hash of its inputs and relevant settings matches the previous run and
/// its artifacts are still present.
inline RunSummary run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  in_stage(Stage::config, [&] { cfg.validate(); });
  const fs::path out = cfg.output_dir;
  in_stage(Stage::config, [&] { fs::create_directories(out); });
  const fs::path cache_path = out / artifact::cache;

  nlohmann::json cache = nlohmann::json::object();
  if (fs::exists(cache_path)) {
    try {
      cache = nlohmann::json::parse(read_text_file(cache_path));
      if (!cache.is_object()) cache = nlohmann::json::object();
    } catch (const std::exception&) {
      cache = nlohmann::json::object();
    }
  }
  auto save_cache = [&] { write_text_file(cache_path, cache.dump(1) + "\n"); };

  RunSummary summary;
  using clock = std::chrono::steady_clock;
  auto fresh = [&](Stage s, const std::string& key,
                   std::initializer_list<std::string_view> files) {
    const std::string name{stage_name(s)};
    if (!cache.contains(name) || cache[name] != key) return false;
    return std::all_of(files.begin(), files.end(),
                       [&](std::string_view f) { return fs::exists(out / f); });
  };
  auto record = [&](Stage s, bool cached, clock::time_point t0) {
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    summary.stages.push_back({s, cached, secs});
    if (log)
      *log << stage_name(s) << ": " << (cached ? "cached" : "computed") << " ("
           << format_double(std::round(secs * 1000) / 1000) << " s)\n";
  };

  // Keys chain: each stage hashes the keys of the stages it consumes.
  std::vector<fs::path> cdr_files;
  std::string ingest_key;
  in_stage(Stage::ingest, [&] {
    cdr_files = expand_glob(cfg.cdr_glob);
    if (!fs::exists(cfg.antennas))
      throw IoError("antenna file not found: " + cfg.antennas.string());
    Sha256 h;
    h.field("ingest/v1");
    for (const auto& p : cdr_files) h.field(sha256_file(p));
    h.field(sha256_file(cfg.antennas));
    h.field(cfg.ingest.mode == ParseMode::strict ? "strict" : "lenient");
    h.field(cfg.ingest.window ? format_civil_date(cfg.ingest.window->start) + "/" +
                                    format_civil_date(cfg.ingest.window->end)
                              : "-");
    h.field(std::to_string(cfg.activity.mu) + "/" + std::to_string(cfg.activity.m_cap));
    ingest_key = h.hex();
  });
  const std::string graph_key = Sha256{}.field("graph/v1").field(ingest_key).hex();
  const std::string homes_key =
      Sha256{}
          .field("homes/v1")
          .field(ingest_key)
          .field(std::to_string(cfg.night.start_hour) + "/" + std::to_string(cfg.night.end_hour) +
                 "/" + std::to_string(cfg.night.night_days.bits()))
          .hex();

  std::optional<IngestResult> ingest;
  auto need_ingest = [&]() -> IngestResult& {
    if (!ingest)
      ingest = in_stage(Stage::ingest, [&] {
        return ingest_inputs(cdr_files, cfg.antennas, cfg.ingest, cfg.activity);
      });
    return *ingest;
  };
  std::optional<SocialGraph> graph;
  auto need_graph = [&]() -> SocialGraph& {
    if (!graph) {
      auto& in = need_ingest();
      graph = in_stage(Stage::graph, [&] {
        return build_graph(in.batch.records, in.clients, cfg.ingest.partitions);
      });
    }
    return *graph;
  };
  std::optional<HomeMap> homes;
  auto need_homes = [&]() -> HomeMap& {
    if (!homes) {
      auto& in = need_ingest();
      homes = in_stage(Stage::homes, [&] {
        return detect_homes(in.batch.records, in.clients, in.batch.users.size(), cfg.night,
                            cfg.ingest.partitions);
      });
    }
    return *homes;
  };

  auto t0 = clock::now();
  if (fresh(Stage::ingest, ingest_key,
            {artifact::ingest_report_txt, artifact::ingest_report_json, artifact::clients})) {
    record(Stage::ingest, true, t0);
  } else {
    auto& in = need_ingest();
    in_stage(Stage::ingest, [&] {
      write_text_file(out / artifact::ingest_report_txt, in.batch.report.to_key_value());
      write_text_file(out / artifact::ingest_report_json, in.batch.report.to_json().dump(2) + "\n");
      write_text_file(out / artifact::clients, export_user_list(in.clients, in.batch.users));
      cache["ingest"] = ingest_key;
      save_cache();
    });
    record(Stage::ingest, false, t0);
  }

  t0 = clock::now();
  if (fresh(Stage::graph, graph_key, {artifact::edges})) {
    record(Stage::graph, true, t0);
  } else {
    auto& g = need_graph();
    in_stage(Stage::graph, [&] {
      write_text_file(out / artifact::edges, export_edge_list(g, ingest->batch.users));
      cache["graph"] = graph_key;
      save_cache();
    });
    record(Stage::graph, false, t0);
  }

  t0 = clock::now();
  if (fresh(Stage::homes, homes_key, {artifact::homes})) {
    record(Stage::homes, true, t0);
  } else {
    auto& h = need_homes();
    in_stage(Stage::homes, [&] {
      write_text_file(out / artifact::homes,
                      export_homes(h, ingest->batch.users, ingest->registry));
      cache["homes"] = homes_key;
      save_cache();
    });
    record(Stage::homes, false, t0);
  }

  t0 = clock::now();
  std::string zone_hash;
  in_stage(Stage::risk, [&] {
    if (!fs::exists(cfg.zone)) throw IoError("zone file not found: " + cfg.zone.string());
    zone_hash = sha256_file(cfg.zone);
  });
  const std::string risk_key =
      Sha256{}.field("risk/v1").field(homes_key).field(graph_key).field(zone_hash).hex();
  auto load_zone = [&] {
    return load_zone_geojson(read_text_file(cfg.zone), {}, cfg.zone.string());
  };
  std::optional<std::vector<AntennaIndicators>> indicators;
  std::optional<AntennaRegistry> registry;
  if (fresh(Stage::risk, risk_key, {artifact::indicators_csv, artifact::indicators_json})) {
    record(Stage::risk, true, t0);
  } else {
    auto& g = need_graph();
    auto& h = need_homes();
    in_stage(Stage::risk, [&] {
      const EndemicZone zone = load_zone();
      const UserSet residents = residents_of_zone(h, ingest->registry, zone);
      const UserSet vulnerable = tag_vulnerable(g, residents);
      indicators = compute_indicators(ingest->batch.records, h, residents, vulnerable,
                                      ingest->registry, cfg.ingest.partitions);
      write_text_file(out / artifact::indicators_csv,
                      export_indicators_csv(*indicators, ingest->registry));
      write_text_file(out / artifact::indicators_json,
                      export_indicators_json(*indicators, ingest->registry));
      cache["risk"] = risk_key;
      save_cache();
    });
    record(Stage::risk, false, t0);
  }

  t0 = clock::now();
  const std::string heatmap_key =
      Sha256{}
          .field("heatmap/v1")
          .field(risk_key)
          .field(format_double(cfg.filter.beta) + "/" + std::to_string(cfg.filter.min_volume) +
                 "/" + format_double(cfg.radius_k))
          .field(cfg.emit_viewer_bundle ? "bundle:" + cfg.preset.value_or("") : "no-bundle")
          .hex();
  const bool heatmap_fresh =
      fresh(Stage::heatmap, heatmap_key, {artifact::heatmap_geojson, artifact::heatmap_csv}) &&
      (!cfg.emit_viewer_bundle || fs::exists(out / artifact::viewer_bundle));
  if (heatmap_fresh) {
    record(Stage::heatmap, true, t0);
  } else {
    in_stage(Stage::heatmap, [&] {
      if (ingest) {
        registry = ingest->registry;
      } else {
        registry = load_antennas(read_text_file(cfg.antennas), cfg.antennas.string());
      }
      if (!indicators)
        indicators = import_indicators_csv(read_text_file(out / artifact::indicators_csv),
                                           *registry, (out / artifact::indicators_csv).string());
      const auto kept = filter_antennas(*indicators, cfg.filter);
      const auto circles = build_circles(kept, *registry, cfg.radius_k);
      write_text_file(out / artifact::heatmap_geojson, export_layer(circles, LayerFormat::geojson));
      write_text_file(out / artifact::heatmap_csv, export_layer(circles, LayerFormat::csv));
      if (cfg.emit_viewer_bundle)
        write_text_file(out / artifact::viewer_bundle,
                        viewer_bundle_json(*indicators, *registry, load_zone(), cfg.filter,
                                           cfg.preset, cfg.radius_k));
      cache["heatmap"] = heatmap_key;
      save_cache();
    });
    record(Stage::heatmap, false, t0);
  }
  return summary;
}

}  // namespace riskmap
