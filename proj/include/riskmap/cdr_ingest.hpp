#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/civil_time.hpp"
#include "riskmap/error.hpp"
#include "riskmap/ids.hpp"
#include "riskmap/io.hpp"
#include "riskmap/parallel.hpp"
#include "riskmap/text.hpp"

namespace riskmap {

/// Relative to the operator client: `outgoing` means the caller is the
/// client, `incoming` means the callee is.
enum class Direction : std::uint8_t { incoming, outgoing };

constexpr std::string_view to_string(Direction d) noexcept {
  return d == Direction::outgoing ? "out" : "in";
}

enum class ParseMode { strict, lenient };

/// One communication event. User and antenna fields index the owning
/// batch's UserTable and the AntennaRegistry.
struct CallRecord {
  UserId caller;
  UserId callee;
  Timestamp time;
  Direction direction = Direction::outgoing;
  AntennaId antenna;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

/// The user whose position the record's antenna reveals.
constexpr UserId localized_user(const CallRecord& r) noexcept {
  return r.direction == Direction::outgoing ? r.caller : r.callee;
}

struct ActivityFilterConfig {
  std::uint32_t mu = 5;
  std::uint32_t m_cap = 400;

  void validate() const {
    if (mu > m_cap)
      throw ConfigError("activity filter needs mu <= M (got " + std::to_string(mu) +
                        " > " + std::to_string(m_cap) + ")");
  }
};

struct IngestReport {
  std::uint64_t records_read = 0;
  std::uint64_t records_dropped_malformed = 0;
  std::uint64_t records_dropped_selfcall = 0;
  std::uint64_t records_dropped_unknown_antenna = 0;
  std::uint64_t records_dropped_out_of_window = 0;
  std::uint64_t users_seen = 0;
  std::uint64_t users_kept = 0;

  std::uint64_t records_dropped() const noexcept {
    return records_dropped_malformed + records_dropped_selfcall +
           records_dropped_unknown_antenna + records_dropped_out_of_window;
  }

  /// Record counters only; user counters describe a merged batch and are
  /// filled in afterwards.
  IngestReport& operator+=(const IngestReport& o) noexcept {
    records_read += o.records_read;
    records_dropped_malformed += o.records_dropped_malformed;
    records_dropped_selfcall += o.records_dropped_selfcall;
    records_dropped_unknown_antenna += o.records_dropped_unknown_antenna;
    records_dropped_out_of_window += o.records_dropped_out_of_window;
    return *this;
  }

  friend bool operator==(const IngestReport&, const IngestReport&) = default;

  std::string to_key_value() const {
    std::string out;
    for (const auto& [k, v] : fields()) out += std::string{k} + "=" + std::to_string(v) + "\n";
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : fields()) j[std::string{k}] = v;
    return j;
  }

 private:
  std::vector<std::pair<std::string_view, std::uint64_t>> fields() const {
    return {{"records_read", records_read},
            {"records_dropped_malformed", records_dropped_malformed},
            {"records_dropped_selfcall", records_dropped_selfcall},
            {"records_dropped_unknown_antenna", records_dropped_unknown_antenna},
            {"records_dropped_out_of_window", records_dropped_out_of_window},
            {"users_seen", users_seen},
            {"users_kept", users_kept}};
  }
};

/// Local calendar dates [start, end).
struct ObservationWindow {
  CivilDate start;
  CivilDate end;

  void validate() const {
    if (!days_from_civil(start) || !days_from_civil(end) || !(start < end))
      throw ConfigError("observation window needs valid dates with start < end");
  }

  bool contains(const Timestamp& t) const {
    const std::int64_t d = local_day(t);
    return d >= *days_from_civil(start) && d < *days_from_civil(end);
  }
};

struct IngestOptions {
  ParseMode mode = ParseMode::lenient;
  std::optional<ObservationWindow> window;
  /// Number of byte-range chunks per input and worker threads.
  unsigned partitions = 1;
};

/// Records with their user dictionary. Users are every id that appears in a
/// kept record, sorted.
struct CdrBatch {
  UserTable users;
  std::vector<CallRecord> records;
  IngestReport report;
};

namespace detail {

struct ChunkResult {
  std::vector<std::string_view> names;
  std::vector<CallRecord> records;
  IngestReport report;
  std::size_t lines = 0;
  std::optional<std::pair<std::size_t, std::string>> error;
};

struct Chunk {
  std::size_t source = 0;
  std::string_view text;
};

inline ChunkResult parse_chunk(std::string_view text, const AntennaRegistry& registry,
                               const IngestOptions& opts) {
  ChunkResult out;
  std::unordered_map<std::string_view, std::uint32_t> interned;
  interned.reserve(1024);
  auto intern = [&](std::string_view name) {
    auto [it, fresh] = interned.try_emplace(name, static_cast<std::uint32_t>(out.names.size()));
    if (fresh) out.names.push_back(name);
    return UserId{it->second};
  };

  std::optional<std::int64_t> win_lo, win_hi;
  if (opts.window) {
    win_lo = days_from_civil(opts.window->start);
    win_hi = days_from_civil(opts.window->end);
  }

  out.records.reserve(text.size() / 48);
  std::size_t pos = 0;
  while (pos < text.size() && !out.error) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++out.lines;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    ++out.report.records_read;
    std::string_view f[5];
    const char* reason = nullptr;
    std::optional<Timestamp> ts;
    Direction dir = Direction::outgoing;
    if (split_fields(line, ',', f) != 5) {
      reason = "expected 5 comma-separated fields";
    } else if (f[0].empty() || f[1].empty() || f[4].empty()) {
      reason = "empty identifier";
    } else if (!(ts = parse_timestamp(f[2]))) {
      reason = "invalid timestamp";
    } else if (f[3] == "out") {
      dir = Direction::outgoing;
    } else if (f[3] == "in") {
      dir = Direction::incoming;
    } else {
      reason = "direction must be 'in' or 'out'";
    }
    if (reason) {
      ++out.report.records_dropped_malformed;
      if (opts.mode == ParseMode::strict) out.error.emplace(out.lines, reason);
      continue;
    }
    if (f[0] == f[1]) {
      ++out.report.records_dropped_selfcall;
      continue;
    }
    const auto antenna = registry.find(f[4]);
    if (!antenna) {
      ++out.report.records_dropped_unknown_antenna;
      if (opts.mode == ParseMode::strict)
        out.error.emplace(out.lines, "unknown antenna " + std::string{f[4]});
      continue;
    }
    if (win_lo) {
      const std::int64_t d = local_day(*ts);
      if (d < *win_lo || d >= *win_hi) {
        ++out.report.records_dropped_out_of_window;
        continue;
      }
    }
    out.records.push_back(CallRecord{intern(f[0]), intern(f[1]), *ts, dir, *antenna});
  }
  return out;
}

/// Splits text into up to `parts` pieces that end on line boundaries.
inline std::vector<std::string_view> split_on_lines(std::string_view text,
                                                    std::size_t parts) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (std::size_t p = 1; p <= parts && begin < text.size(); ++p) {
    std::size_t end = p == parts ? text.size() : text.size() * p / parts;
    if (end < begin) end = begin;
    if (end < text.size()) {
      const std::size_t nl = text.find('\n', end == 0 ? 0 : end - 1);
      end = nl == std::string_view::npos ? text.size() : nl + 1;
    }
    if (end > begin) out.push_back(text.substr(begin, end - begin));
    begin = end;
  }
  return out;
}

}  // namespace detail

/// Parses CDR text from several sources, chunked and parsed in parallel, and
/// merged in input order. The result is independent of `opts.partitions`.
inline CdrBatch parse_cdr_sources(std::span<const std::string_view> sources,
                                  std::span<const std::string> labels,
                                  const AntennaRegistry& registry,
                                  const IngestOptions& opts = {}) {
  if (opts.window) opts.window->validate();
  const std::size_t parts = std::max(1u, opts.partitions);

  std::vector<detail::Chunk> chunks;
  for (std::size_t s = 0; s < sources.size(); ++s)
    for (std::string_view piece : detail::split_on_lines(sources[s], parts))
      chunks.push_back({s, piece});

  std::vector<detail::ChunkResult> results(chunks.size());
  parallel_for(chunks.size(), parts, [&](std::size_t i) {
    results[i] = detail::parse_chunk(chunks[i].text, registry, opts);
  });

  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].error) continue;
    std::size_t line = results[i].error->first;
    for (std::size_t j = i; j-- > 0 && chunks[j].source == chunks[i].source;)
      line += results[j].lines;
    const std::size_t s = chunks[i].source;
    throw ParseError(s < labels.size() ? labels[s] : "<stream>", line,
                     results[i].error->second);
  }

  std::vector<std::string_view> all;
  for (const auto& r : results) all.insert(all.end(), r.names.begin(), r.names.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  CdrBatch batch;
  std::size_t total = 0;
  for (const auto& r : results) total += r.records.size();
  batch.records.reserve(total);
  for (auto& r : results) {
    std::vector<std::uint32_t> remap(r.names.size());
    for (std::size_t k = 0; k < r.names.size(); ++k)
      remap[k] = static_cast<std::uint32_t>(
          std::lower_bound(all.begin(), all.end(), r.names[k]) - all.begin());
    for (CallRecord rec : r.records) {
      rec.caller.value = remap[rec.caller.value];
      rec.callee.value = remap[rec.callee.value];
      batch.records.push_back(rec);
    }
    batch.report += r.report;
    r = {};
  }
  batch.users = UserTable::from_names({all.begin(), all.end()});
  batch.report.users_seen = batch.users.size();
  return batch;
}

/// Single in-memory CDR stream.
inline CdrBatch parse_cdr_stream(std::string_view text, const AntennaRegistry& registry,
                                 const IngestOptions& opts = {},
                                 const std::string& label = "<stream>") {
  const std::string_view sources[] = {text};
  const std::string labels[] = {label};
  return parse_cdr_sources(sources, labels, registry, opts);
}

inline CdrBatch parse_cdr_stream(std::istream& in, const AntennaRegistry& registry,
                                 const IngestOptions& opts = {},
                                 const std::string& label = "<stream>") {
  const std::string text = read_stream(in, label);
  return parse_cdr_stream(text, registry, opts, label);
}

/// Files are memory-mapped (or inflated when `.gz`) and parsed as one
/// ordered stream.
inline CdrBatch parse_cdr_files(std::span<const fs::path> paths,
                                const AntennaRegistry& registry,
                                const IngestOptions& opts = {}) {
  std::vector<InputBuffer> buffers;
  std::vector<std::string_view> views;
  std::vector<std::string> labels;
  for (const auto& p : paths) {
    buffers.push_back(InputBuffer::open(p));
    views.push_back(buffers.back().view());
    labels.push_back(p.string());
  }
  return parse_cdr_sources(views, labels, registry, opts);
}

/// Users whose participation count (as caller or callee) lies within
/// [mu, M] in every local calendar month in which they appear.
inline UserSet filter_users_by_activity(std::span<const CallRecord> records,
                                        std::size_t n_users,
                                        const ActivityFilterConfig& cfg) {
  cfg.validate();
  UserSet kept(n_users);
  if (records.empty()) return kept;

  std::vector<std::int64_t> month(records.size());
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (std::size_t i = 0; i < records.size(); ++i) {
    month[i] = local_month_index(records[i].time);
    lo = std::min(lo, month[i]);
    hi = std::max(hi, month[i]);
  }
  const auto span = static_cast<std::size_t>(hi - lo + 1);

  auto verdict = [&](auto&& count_of) {
    for (std::uint32_t u = 0; u < n_users; ++u) {
      bool seen = false, ok = true;
      for (std::size_t m = 0; m < span && ok; ++m) {
        const std::uint64_t c = count_of(u, m);
        if (c == 0) continue;
        seen = true;
        ok = c >= cfg.mu && c <= cfg.m_cap;
      }
      if (seen && ok) kept.insert(UserId{u});
    }
  };

  if (n_users * span <= (std::size_t{1} << 27)) {
    std::vector<std::uint32_t> counts(n_users * span, 0);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto m = static_cast<std::size_t>(month[i] - lo);
      ++counts[records[i].caller.value * span + m];
      ++counts[records[i].callee.value * span + m];
    }
    verdict([&](std::uint32_t u, std::size_t m) { return counts[u * span + m]; });
  } else {
    std::unordered_map<std::uint64_t, std::uint32_t> counts;
    auto key = [&](std::uint32_t u, std::size_t m) {
      return (static_cast<std::uint64_t>(u) << 32) | m;
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto m = static_cast<std::size_t>(month[i] - lo);
      ++counts[key(records[i].caller.value, m)];
      ++counts[key(records[i].callee.value, m)];
    }
    verdict([&](std::uint32_t u, std::size_t m) -> std::uint64_t {
      auto it = counts.find(key(u, m));
      return it == counts.end() ? 0 : it->second;
    });
  }
  return kept;
}

/// Users that appear as the localized (operator-client) party at least once.
inline UserSet localized_users(std::span<const CallRecord> records, std::size_t n_users) {
  UserSet out(n_users);
  for (const auto& r : records) out.insert(localized_user(r));
  return out;
}

/// Writes records back in the CDR file format.
inline std::string export_cdr(std::span<const CallRecord> records, const UserTable& users,
                              const AntennaRegistry& registry) {
  std::string out;
  out.reserve(records.size() * 48);
  for (const auto& r : records) {
    out += users.name(r.caller);
    out.push_back(',');
    out += users.name(r.callee);
    out.push_back(',');
    out += format_timestamp(r.time);
    out.push_back(',');
    out += to_string(r.direction);
    out.push_back(',');
    out += registry.name(r.antenna);
    out.push_back('\n');
  }
  return out;
}

}  // namespace riskmap
