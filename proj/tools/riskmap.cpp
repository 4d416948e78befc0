// riskmap: command-line front end for the CDR risk-mapping pipeline.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskmap/riskmap.hpp"

namespace {

using namespace riskmap;

constexpr const char* kExitCodes =
    "Exit codes: 0 ok, 1 unexpected error, 2 usage/config, 3 ingest, 4 graph,\n"
    "5 homes, 6 risk, 7 heatmap, 8 synth, 9 validation failure.\n"
    "RISKMAP_OUTPUT_DIR overrides the configured output directory; --out wins over both.";

// Flags mirroring PipelineConfig. Unset flags leave the config file value alone.
struct Overrides {
  std::string config;
  std::optional<std::string> cdr, antennas, zone, out, mode, window_start, window_end, preset;
  std::optional<std::uint32_t> mu, max, partitions, night_start, night_end;
  std::optional<std::vector<std::string>> night_days;
  std::optional<double> beta, radius_k;
  std::optional<std::uint64_t> min_volume;
  bool emit_viewer_bundle = false;
};

void add_input_flags(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "TOML config file");
  app->add_option("--cdr", o.cdr, "CDR file or glob (.csv or .csv.gz)");
  app->add_option("--antennas", o.antennas, "antenna file: antenna_id,lat,lon");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--mode", o.mode, "parse mode: lenient skips bad lines, strict aborts")
      ->check(CLI::IsMember({"strict", "lenient"}));
  app->add_option("--window-start", o.window_start, "first local date kept (YYYY-MM-DD)");
  app->add_option("--window-end", o.window_end, "first local date dropped (YYYY-MM-DD)");
  app->add_option("--mu", o.mu, "minimum calls per month, inclusive (default 5)");
  app->add_option("--max", o.max, "maximum calls per month, inclusive (default 400)");
  app->add_option("--partitions", o.partitions, "parallel partitions (artifacts do not depend on it)")
      ->check(CLI::PositiveNumber);
}

void add_night_flags(CLI::App* app, Overrides& o) {
  app->add_option("--night-start", o.night_start, "night window start hour (default 20)");
  app->add_option("--night-end", o.night_end, "night window end hour, exclusive (default 6)");
  app->add_option("--night-days", o.night_days, "weekdays whose evening opens a night (default mon tue wed thu)");
}

void add_zone_flag(CLI::App* app, Overrides& o) {
  app->add_option("--zone", o.zone, "endemic zone GeoJSON (Polygon or MultiPolygon)");
}

void add_filter_flags(CLI::App* app, Overrides& o) {
  std::string presets;
  for (const auto& p : kFilterPresets) presets += (presets.empty() ? "" : ", ") + std::string{p.name};
  app->add_option("--preset", o.preset, "filter preset: " + presets);
  app->add_option("--beta", o.beta, "keep antennas with V/N > beta");
  app->add_option("--min-volume", o.min_volume, "keep antennas with N > min-volume");
  app->add_option("--radius-k", o.radius_k, "circle radius constant k in k*sqrt(N)");
  app->add_flag("--emit-viewer-bundle", o.emit_viewer_bundle, "also write viewer_bundle.json");
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_pipeline_config(o.config);
  if (const char* env = std::getenv("RISKMAP_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (o.out) cfg.output_dir = *o.out;
  if (o.cdr) cfg.cdr_glob = *o.cdr;
  if (o.antennas) cfg.antennas = *o.antennas;
  if (o.zone) cfg.zone = *o.zone;
  if (o.mode) cfg.ingest.mode = *o.mode == "strict" ? ParseMode::strict : ParseMode::lenient;
  if (o.window_start || o.window_end) {
    const auto s = parse_civil_date(o.window_start.value_or(""));
    const auto e = parse_civil_date(o.window_end.value_or(""));
    if (!s || !e) throw ConfigError("--window-start and --window-end must both be YYYY-MM-DD");
    cfg.ingest.window = ObservationWindow{*s, *e};
  }
  if (o.mu) cfg.activity.mu = *o.mu;
  if (o.max) cfg.activity.m_cap = *o.max;
  if (o.partitions) cfg.ingest.partitions = *o.partitions;
  if (o.night_start) cfg.night.start_hour = *o.night_start;
  if (o.night_end) cfg.night.end_hour = *o.night_end;
  if (o.night_days) {
    cfg.night.night_days = {};
    for (const auto& d : *o.night_days) {
      const auto wd = parse_weekday(d);
      if (!wd) throw ConfigError("unknown weekday '" + d + "'");
      cfg.night.night_days.insert(*wd);
    }
  }
  if (o.preset) apply_preset(cfg, *o.preset);
  if (o.beta) {
    cfg.filter.beta = *o.beta;
    cfg.preset.reset();
  }
  if (o.min_volume) {
    cfg.filter.min_volume = *o.min_volume;
    cfg.preset.reset();
  }
  if (o.radius_k) cfg.radius_k = *o.radius_k;
  if (o.emit_viewer_bundle) cfg.emit_viewer_bundle = true;
  // A flag combination equal to a preset is reported under that preset's name.
  if (!cfg.preset)
    for (const auto& p : kFilterPresets)
      if (p.params == cfg.filter) {
        cfg.preset = std::string{p.name};
        break;
      }
  return cfg;
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string{what} + " is required (flag or config file)");
}

void check_common(const PipelineConfig& cfg) {
  require(!cfg.cdr_glob.empty(), "--cdr");
  require(!cfg.antennas.empty(), "--antennas");
  if (cfg.ingest.window) cfg.ingest.window->validate();
  cfg.activity.validate();
  cfg.night.validate();
}

IngestResult stage_ingest(const PipelineConfig& cfg) {
  return in_stage(Stage::ingest, [&] {
    const auto files = expand_glob(cfg.cdr_glob);
    return ingest_inputs(files, cfg.antennas, cfg.ingest, cfg.activity);
  });
}

void write_out(const PipelineConfig& cfg, std::string_view name, const std::string& body, Stage s) {
  in_stage(s, [&] {
    fs::create_directories(cfg.output_dir);
    write_text_file(cfg.output_dir / name, body);
  });
  std::cerr << "wrote " << (cfg.output_dir / name).string() << "\n";
}

int cmd_run(const Overrides& o) {
  const PipelineConfig cfg = resolve(o);
  const RunSummary s = run_pipeline(cfg, &std::cerr);
  if (s.all_cached()) std::cerr << "all stages cached\n";
  std::cout << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_ingest(const Overrides& o) {
  const PipelineConfig cfg = resolve(o);
  check_common(cfg);
  const auto in = stage_ingest(cfg);
  write_out(cfg, artifact::ingest_report_txt, in.batch.report.to_key_value(), Stage::ingest);
  write_out(cfg, artifact::ingest_report_json, in.batch.report.to_json().dump(2) + "\n", Stage::ingest);
  write_out(cfg, artifact::clients, export_user_list(in.clients, in.batch.users), Stage::ingest);
  std::cout << in.batch.report.to_key_value();
  return 0;
}

int cmd_graph(const Overrides& o) {
  const PipelineConfig cfg = resolve(o);
  check_common(cfg);
  const auto in = stage_ingest(cfg);
  const auto g = in_stage(Stage::graph, [&] {
    return build_graph(in.batch.records, in.clients, cfg.ingest.partitions);
  });
  write_out(cfg, artifact::edges, export_edge_list(g, in.batch.users), Stage::graph);
  std::cout << "nodes " << g.nodes().size() << "\nedges " << g.edge_count() << "\n";
  return 0;
}

HomeMap stage_homes(const PipelineConfig& cfg, const IngestResult& in) {
  return in_stage(Stage::homes, [&] {
    return detect_homes(in.batch.records, in.clients, in.batch.users.size(), cfg.night,
                        cfg.ingest.partitions);
  });
}

int cmd_homes(const Overrides& o) {
  const PipelineConfig cfg = resolve(o);
  check_common(cfg);
  const auto in = stage_ingest(cfg);
  const auto homes = stage_homes(cfg, in);
  write_out(cfg, artifact::homes, export_homes(homes, in.batch.users, in.registry), Stage::homes);
  std::cout << "clients " << in.clients.size() << "\nhomed " << homes.size() << "\n";
  return 0;
}

int cmd_risk(const Overrides& o) {
  const PipelineConfig cfg = resolve(o);
  check_common(cfg);
  require(!cfg.zone.empty(), "--zone");
  const auto in = stage_ingest(cfg);
  const auto g = in_stage(Stage::graph, [&] {
    return build_graph(in.batch.records, in.clients, cfg.ingest.partitions);
  });
  const auto homes = stage_homes(cfg, in);
  const auto rows = in_stage(Stage::risk, [&] {
    const auto zone = load_zone_geojson(read_text_file(cfg.zone), {}, cfg.zone.string());
    const UserSet residents = residents_of_zone(homes, in.registry, zone);
    const UserSet vulnerable = tag_vulnerable(g, residents);
    std::cout << "residents " << residents.size() << "\nvulnerable " << vulnerable.size() << "\n";
    return compute_indicators(in.batch.records, homes, residents, vulnerable, in.registry,
                              cfg.ingest.partitions);
  });
  write_out(cfg, artifact::indicators_csv, export_indicators_csv(rows, in.registry), Stage::risk);
  write_out(cfg, artifact::indicators_json, export_indicators_json(rows, in.registry), Stage::risk);
  return 0;
}

int cmd_heatmap(const Overrides& o, const std::optional<std::string>& indicators_path) {
  const PipelineConfig cfg = resolve(o);
  cfg.filter.validate();
  if (!(cfg.radius_k > 0.0)) throw ConfigError("--radius-k must be > 0");
  if (cfg.emit_viewer_bundle) require(!cfg.zone.empty(), "--zone (for the viewer bundle)");
  const fs::path src = indicators_path ? fs::path{*indicators_path}
                                       : cfg.output_dir / artifact::indicators_json;
  in_stage(Stage::heatmap, [&] {
    const auto loaded = import_indicators_json(read_text_file(src), src.string());
    const auto kept = filter_antennas(loaded.rows, cfg.filter);
    const auto circles = build_circles(kept, loaded.registry, cfg.radius_k);
    write_out(cfg, artifact::heatmap_geojson, export_layer(circles, LayerFormat::geojson),
              Stage::heatmap);
    write_out(cfg, artifact::heatmap_csv, export_layer(circles, LayerFormat::csv), Stage::heatmap);
    if (cfg.emit_viewer_bundle) {
      const auto zone = load_zone_geojson(read_text_file(cfg.zone), {}, cfg.zone.string());
      write_out(cfg, artifact::viewer_bundle,
                viewer_bundle_json(loaded.rows, loaded.registry, zone, cfg.filter, cfg.preset,
                                   cfg.radius_k),
                Stage::heatmap);
    }
    std::cout << "filter beta=" << format_double(cfg.filter.beta)
              << " min_volume=" << cfg.filter.min_volume;
    if (cfg.preset) std::cout << " (" << *cfg.preset << ")";
    std::cout << "\nantennas " << loaded.rows.size() << "\nkept " << kept.size() << "\n";
  });
  return 0;
}

int cmd_synth(const SynthConfig& sc, const std::string& dir, unsigned parts) {
  const auto files = in_stage(Stage::synth, [&] {
    sc.validate();
    return write_synth(generate(sc), dir, parts);
  });
  for (const auto& p : files.cdr) std::cout << p.string() << "\n";
  std::cout << files.antennas.string() << "\n" << files.zone.string() << "\n"
            << files.manifest.string() << "\n";
  return 0;
}

int cmd_validate(SynthConfig sc) {
  const auto results = in_stage(Stage::validate, [&] { return run_validation(sc); });
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << ": " << r.detail;
    std::cout << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : exit_code(Stage::validate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"riskmap: Chagas risk maps from call detail records"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Overrides o;
  auto* run = app.add_subcommand("run", "run every stage with caching");
  add_input_flags(run, o);
  add_night_flags(run, o);
  add_zone_flag(run, o);
  add_filter_flags(run, o);

  auto* ingest = app.add_subcommand("ingest", "parse CDRs, apply the activity filter, report counts");
  add_input_flags(ingest, o);

  auto* graph = app.add_subcommand("graph", "write the client communication graph as an edge list");
  add_input_flags(graph, o);

  auto* homes = app.add_subcommand("homes", "assign each client the antenna of most weekday-night calls");
  add_input_flags(homes, o);
  add_night_flags(homes, o);

  auto* risk = app.add_subcommand("risk", "compute per-antenna N, V, C, VC");
  add_input_flags(risk, o);
  add_night_flags(risk, o);
  add_zone_flag(risk, o);

  std::optional<std::string> indicators_path;
  auto* heatmap = app.add_subcommand("heatmap", "filter antennas and write heatmap layers");
  heatmap->add_option("-c,--config", o.config, "TOML config file");
  heatmap->add_option("--indicators", indicators_path, "indicators.json (default <out>/indicators.json)");
  heatmap->add_option("--out", o.out, "output directory");
  add_zone_flag(heatmap, o);
  add_filter_flags(heatmap, o);

  SynthConfig sc;
  std::string synth_dir = "synth";
  unsigned parts = 1;
  auto* synth = app.add_subcommand("synth", "generate a synthetic CDR fixture with a ground-truth manifest");
  synth->add_option("--seed", sc.seed, "PRNG seed (mt19937_64)");
  synth->add_option("--users", sc.n_users, "number of users");
  synth->add_option("--antennas", sc.n_antennas, "number of antennas");
  synth->add_option("--days", sc.n_days, "days of records");
  synth->add_option("--endemic-fraction", sc.endemic_fraction, "share of users homed in the zone");
  synth->add_option("--affinity", sc.home_night_affinity, "probability a night call uses the home antenna");
  synth->add_option("--mean-degree", sc.mean_degree, "mean contacts per user");
  synth->add_option("--tie-bias", sc.endemic_tie_bias, "edge weight multiplier toward the zone");
  synth->add_option("--calls-per-day", sc.calls_per_user_day, "mean day calls per user");
  synth->add_option("--decay-km", sc.distance_decay_km, "edge weight distance decay (km)");
  synth->add_option("--out", synth_dir, "output directory");
  synth->add_option("--parts", parts, "split the CDR output into this many files")->check(CLI::PositiveNumber);

  bool small = false;
  SynthConfig vc;
  vc.n_users = 1000;
  auto* validate = app.add_subcommand("validate", "check every module against brute-force oracles");
  validate->add_flag("--small", small, "100-user dataset");
  validate->add_option("--seed", vc.seed, "PRNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(o);
    if (*ingest) return cmd_ingest(o);
    if (*graph) return cmd_graph(o);
    if (*homes) return cmd_homes(o);
    if (*risk) return cmd_risk(o);
    if (*heatmap) return cmd_heatmap(o, indicators_path);
    if (*synth) return cmd_synth(sc, synth_dir, parts);
    if (*validate) {
      if (small) {
        vc.n_users = 100;
        vc.n_antennas = 40;
        vc.mean_degree = 6;
      }
      return cmd_validate(vc);
    }
  } catch (const StageError& e) {
    std::cerr << "riskmap: " << e.what() << "\n";
    return exit_code(e.stage());
  } catch (const ConfigError& e) {
    std::cerr << "riskmap: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "riskmap: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
