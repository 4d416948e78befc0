#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "riskmap/cdr_ingest.hpp"
#include "riskmap/error.hpp"
#include "riskmap/heatmap.hpp"
#include "riskmap/home_detection.hpp"
#include "riskmap/io.hpp"
#include "riskmap/text.hpp"

namespace riskmap {

/// Values of the small TOML subset used for pipeline configs: `[table]`
/// headers, `key = value` with strings, integers, floats, booleans and
/// one-line arrays of those, `#` comments.
using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;
using TomlValue = std::variant<bool, std::int64_t, double, std::string, std::vector<TomlScalar>>;

class TomlDocument {
 public:
  static TomlDocument parse(std::string_view text, const std::string& label = "<config>") {
    TomlDocument doc;
    std::string table;
    std::size_t line_no = 0;
    for_each_line(text, [&](std::string_view raw) {
      ++line_no;
      std::string_view line = trim(strip_comment(raw));
      if (line.empty()) return;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3)
          throw ParseError(label, line_no, "malformed table header");
        table = std::string{trim(line.substr(1, line.size() - 2))};
        return;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(label, line_no, "expected key = value");
      const std::string key{trim(line.substr(0, eq))};
      if (key.empty()) throw ParseError(label, line_no, "empty key");
      const std::string full = table.empty() ? key : table + "." + key;
      auto value = parse_value(trim(line.substr(eq + 1)));
      if (!value) throw ParseError(label, line_no, "cannot parse value for " + full);
      if (!doc.values_.emplace(full, std::move(*value)).second)
        throw ParseError(label, line_no, "duplicate key " + full);
    });
    return doc;
  }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get_string(const std::string& key) const {
    return get<std::string>(key, "a string");
  }
  std::optional<bool> get_bool(const std::string& key) const { return get<bool>(key, "a boolean"); }
  std::optional<std::int64_t> get_int(const std::string& key) const {
    return get<std::int64_t>(key, "an integer");
  }
  std::optional<double> get_number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    throw ConfigError("config key " + key + " must be a number");
  }
  std::optional<std::vector<std::string>> get_string_array(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto* arr = std::get_if<std::vector<TomlScalar>>(&it->second);
    if (!arr) throw ConfigError("config key " + key + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *arr) {
      const auto* s = std::get_if<std::string>(&v);
      if (!s) throw ConfigError("config key " + key + " must be an array of strings");
      out.push_back(*s);
    }
    return out;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

 private:
  template <class T>
  std::optional<T> get(const std::string& key, const char* what) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto* v = std::get_if<T>(&it->second);
    if (!v) throw ConfigError("config key " + key + " must be " + what);
    return *v;
  }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  static std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }

  static std::optional<TomlScalar> parse_scalar(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '"') {
      if (s.size() < 2 || s.back() != '"') return std::nullopt;
      std::string out;
      for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) {
          const char c = s[++i];
          out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
        } else {
          out.push_back(s[i]);
        }
      }
      return out;
    }
    if (s == "true") return true;
    if (s == "false") return false;
    std::string digits;
    for (char c : s)
      if (c != '_') digits.push_back(c);
    std::int64_t i = 0;
    if (parse_int(digits, i)) return i;
    double d = 0;
    if (parse_double(digits, d)) return d;
    return std::nullopt;
  }

  static std::optional<TomlValue> parse_value(std::string_view s) {
    if (!s.empty() && s.front() == '[') {
      if (s.back() != ']') return std::nullopt;
      std::vector<TomlScalar> items;
      std::string_view body = trim(s.substr(1, s.size() - 2));
      while (!body.empty()) {
        std::size_t end = 0;
        if (body.front() == '"') {
          end = body.find('"', 1);
          if (end == std::string_view::npos) return std::nullopt;
          end = body.find(',', end);
        } else {
          end = body.find(',');
        }
        const auto item = parse_scalar(body.substr(0, end));
        if (!item) return std::nullopt;
        items.push_back(*item);
        if (end == std::string_view::npos) break;
        body = trim(body.substr(end + 1));
      }
      return items;
    }
    auto scalar = parse_scalar(s);
    if (!scalar) return std::nullopt;
    return std::visit([](auto&& v) -> TomlValue { return v; }, *scalar);
  }

  std::map<std::string, TomlValue> values_;
};

/// Everything `riskmap run` needs. Relative paths in a config file resolve
/// against the file's directory.
struct PipelineConfig {
  std::string cdr_glob;
  fs::path antennas;
  fs::path zone;
  fs::path output_dir = "riskmap-out";
  IngestOptions ingest;
  ActivityFilterConfig activity;
  NightWindowConfig night;
  std::optional<std::string> preset;
  FilterParams filter = kFilterPresets[0].params;
  double radius_k = 1.0;
  bool emit_viewer_bundle = false;

  void validate() const {
    if (cdr_glob.empty()) throw ConfigError("config: input.cdr is required");
    if (antennas.empty()) throw ConfigError("config: input.antennas is required");
    if (zone.empty()) throw ConfigError("config: input.zone is required");
    if (output_dir.empty()) throw ConfigError("config: output directory is empty");
    if (ingest.window) ingest.window->validate();
    if (ingest.partitions < 1) throw ConfigError("config: partitions must be >= 1");
    activity.validate();
    night.validate();
    filter.validate();
    if (!(radius_k > 0.0)) throw ConfigError("config: heatmap.radius_k must be > 0");
  }
};

inline void apply_preset(PipelineConfig& cfg, const std::string& name) {
  const auto p = find_preset(name);
  if (!p) {
    std::string known;
    for (const auto& pr : kFilterPresets) known += (known.empty() ? "" : ", ") + std::string{pr.name};
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  cfg.preset = name;
  cfg.filter = *p;
}

inline PipelineConfig pipeline_config_from_toml(const TomlDocument& doc, const fs::path& base_dir) {
  static const std::set<std::string> known = {
      "input.cdr",          "input.antennas",     "input.zone",         "output.dir",
      "ingest.mode",        "ingest.partitions",  "activity.mu",        "activity.max",
      "window.start",       "window.end",         "night.start_hour",   "night.end_hour",
      "night.days",         "heatmap.preset",     "heatmap.beta",       "heatmap.min_volume",
      "heatmap.radius_k",   "heatmap.emit_viewer_bundle"};
  for (const auto& k : doc.keys())
    if (!known.count(k)) throw ConfigError("config: unknown key " + k);

  auto resolve = [&](const std::string& p) {
    const fs::path path{p};
    return path.is_absolute() ? path : base_dir / path;
  };
  auto non_negative = [](std::int64_t v, const char* key) {
    if (v < 0 || v > UINT32_MAX) throw ConfigError(std::string{"config: "} + key + " out of range");
    return static_cast<std::uint32_t>(v);
  };

  PipelineConfig cfg;
  if (auto v = doc.get_string("input.cdr")) cfg.cdr_glob = resolve(*v).string();
  if (auto v = doc.get_string("input.antennas")) cfg.antennas = resolve(*v);
  if (auto v = doc.get_string("input.zone")) cfg.zone = resolve(*v);
  if (auto v = doc.get_string("output.dir")) cfg.output_dir = resolve(*v);
  if (auto v = doc.get_string("ingest.mode")) {
    if (*v == "strict")
      cfg.ingest.mode = ParseMode::strict;
    else if (*v == "lenient")
      cfg.ingest.mode = ParseMode::lenient;
    else
      throw ConfigError("config: ingest.mode must be 'strict' or 'lenient'");
  }
  if (auto v = doc.get_int("ingest.partitions")) cfg.ingest.partitions = non_negative(*v, "ingest.partitions");
  if (auto v = doc.get_int("activity.mu")) cfg.activity.mu = non_negative(*v, "activity.mu");
  if (auto v = doc.get_int("activity.max")) cfg.activity.m_cap = non_negative(*v, "activity.max");
  const auto ws = doc.get_string("window.start"), we = doc.get_string("window.end");
  if (ws || we) {
    if (!ws || !we) throw ConfigError("config: window needs both start and end");
    const auto s = parse_civil_date(*ws), e = parse_civil_date(*we);
    if (!s || !e) throw ConfigError("config: window dates must be YYYY-MM-DD");
    cfg.ingest.window = ObservationWindow{*s, *e};
  }
  if (auto v = doc.get_int("night.start_hour")) cfg.night.start_hour = non_negative(*v, "night.start_hour");
  if (auto v = doc.get_int("night.end_hour")) cfg.night.end_hour = non_negative(*v, "night.end_hour");
  if (auto v = doc.get_string_array("night.days")) {
    cfg.night.night_days = {};
    for (const auto& d : *v) {
      const auto wd = parse_weekday(d);
      if (!wd) throw ConfigError("config: unknown weekday '" + d + "'");
      cfg.night.night_days.insert(*wd);
    }
  }
  if (auto v = doc.get_string("heatmap.preset")) apply_preset(cfg, *v);
  if (auto v = doc.get_number("heatmap.beta")) {
    cfg.filter.beta = *v;
    cfg.preset.reset();
  }
  if (auto v = doc.get_int("heatmap.min_volume")) {
    if (*v < 0) throw ConfigError("config: heatmap.min_volume must be >= 0");
    cfg.filter.min_volume = static_cast<std::uint64_t>(*v);
    cfg.preset.reset();
  }
  if (auto v = doc.get_number("heatmap.radius_k")) cfg.radius_k = *v;
  if (auto v = doc.get_bool("heatmap.emit_viewer_bundle")) cfg.emit_viewer_bundle = *v;
  return cfg;
}

inline PipelineConfig load_pipeline_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return pipeline_config_from_toml(TomlDocument::parse(text, path.string()),
                                     path.has_parent_path() ? path.parent_path() : fs::path{"."});
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace riskmap
