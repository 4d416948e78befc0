#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskmap/antenna_registry.hpp"
#include "riskmap/cdr_ingest.hpp"
#include "riskmap/civil_time.hpp"
#include "riskmap/error.hpp"
#include "riskmap/ids.hpp"
#include "riskmap/parallel.hpp"

namespace riskmap {

enum class Weekday : std::uint8_t { sunday, monday, tuesday, wednesday, thursday, friday, saturday };

/// Bitmask of weekdays (bit 0 = Sunday).
class WeekdaySet {
 public:
  constexpr WeekdaySet() = default;
  constexpr WeekdaySet(std::initializer_list<Weekday> days) {
    for (Weekday d : days) insert(d);
  }
  constexpr void insert(Weekday d) noexcept { bits_ |= 1u << static_cast<unsigned>(d); }
  constexpr bool contains(unsigned c_encoding) const noexcept {
    return (bits_ >> (c_encoding % 7)) & 1u;
  }
  constexpr bool contains(Weekday d) const noexcept { return contains(static_cast<unsigned>(d)); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  friend constexpr bool operator==(WeekdaySet, WeekdaySet) = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Accepts three-letter English abbreviations or full names, any case.
inline std::optional<Weekday> parse_weekday(std::string_view s) {
  static constexpr std::array<std::string_view, 7> names = {
      "sunday", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday"};
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
  for (std::size_t i = 0; i < names.size(); ++i)
    if (lower == names[i] || (lower.size() == 3 && names[i].substr(0, 3) == lower))
      return static_cast<Weekday>(i);
  return std::nullopt;
}

/// Evenings that open a night window, and its local hours. The window runs
/// from start_hour (inclusive) on a night day to end_hour (exclusive) on the
/// following morning.
struct NightWindowConfig {
  unsigned start_hour = 20;
  unsigned end_hour = 6;
  WeekdaySet night_days{Weekday::monday, Weekday::tuesday, Weekday::wednesday,
                        Weekday::thursday};

  void validate() const {
    if (start_hour > 23 || end_hour > 23)
      throw ConfigError("night window hours must be within 0..23");
    if (night_days.empty()) throw ConfigError("night window needs at least one night day");
  }
};

inline bool is_weekday_night(const Timestamp& t, const NightWindowConfig& cfg = {}) {
  const std::int64_t day = local_day(t);
  const std::int64_t sod = local_second_of_day(t);
  const std::int64_t start = std::int64_t{cfg.start_hour} * 3600;
  const std::int64_t end = std::int64_t{cfg.end_hour} * 3600;
  if (start < end)  // same-day window
    return sod >= start && sod < end && cfg.night_days.contains(weekday_from_days(day));
  if (sod >= start && cfg.night_days.contains(weekday_from_days(day))) return true;
  return sod < end && cfg.night_days.contains(weekday_from_days(day - 1));
}

struct HomeAssignment {
  UserId user;
  AntennaId home;
  std::uint32_t night_calls_at_home = 0;
  std::uint32_t night_calls_total = 0;

  friend bool operator==(const HomeAssignment&, const HomeAssignment&) = default;
};

/// User -> home antenna. Only users with at least one night call have one.
class HomeMap {
 public:
  HomeMap() = default;

  /// `assignments` must be sorted by user with no duplicates.
  HomeMap(std::size_t n_users, std::vector<HomeAssignment> assignments)
      : slot_(n_users, kNone), assignments_(std::move(assignments)) {
    for (std::size_t i = 0; i < assignments_.size(); ++i) {
      const auto u = assignments_[i].user.value;
      if (u >= slot_.size()) slot_.resize(u + 1, kNone);
      if (slot_[u] != kNone) throw ConsistencyError("duplicate home assignment");
      slot_[u] = static_cast<std::uint32_t>(i);
    }
  }

  std::size_t size() const noexcept { return assignments_.size(); }
  std::size_t universe() const noexcept { return slot_.size(); }

  const HomeAssignment* find(UserId u) const noexcept {
    if (u.value >= slot_.size() || slot_[u.value] == kNone) return nullptr;
    return &assignments_[slot_[u.value]];
  }

  std::optional<AntennaId> home_of(UserId u) const noexcept {
    const auto* a = find(u);
    return a ? std::optional{a->home} : std::nullopt;
  }

  std::span<const HomeAssignment> assignments() const noexcept { return assignments_; }

  friend bool operator==(const HomeMap& a, const HomeMap& b) {
    return a.assignments_ == b.assignments_;
  }

 private:
  static constexpr std::uint32_t kNone = UINT32_MAX;
  std::vector<std::uint32_t> slot_;
  std::vector<HomeAssignment> assignments_;
};

/// Home antenna = the antenna holding the most of the user's weekday-night
/// events, counting only records where the user is the localized party.
/// Ties go to the smallest antenna id.
inline HomeMap detect_homes(std::span<const CallRecord> records, const UserSet& clients,
                            std::size_t n_users, const NightWindowConfig& cfg = {},
                            unsigned partitions = 1) {
  cfg.validate();
  struct Cell {
    std::uint64_t key;
    std::uint32_t count;
  };
  auto compress = [](std::vector<std::uint64_t>& keys) {
    std::sort(keys.begin(), keys.end());
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      while (j < keys.size() && keys[j] == keys[i]) ++j;
      cells.push_back({keys[i], static_cast<std::uint32_t>(j - i)});
      i = j;
    }
    return cells;
  };

  const auto ranges = split_evenly(records.size(), partitions);
  std::vector<std::vector<Cell>> partial(ranges.size());
  parallel_for(ranges.size(), partitions, [&](std::size_t p) {
    std::vector<std::uint64_t> keys;
    for (std::size_t i = ranges[p].first; i < ranges[p].second; ++i) {
      const auto& r = records[i];
      const UserId u = localized_user(r);
      if (!clients.contains(u) || !is_weekday_night(r.time, cfg)) continue;
      keys.push_back((static_cast<std::uint64_t>(u.value) << 32) | r.antenna.value);
    }
    partial[p] = compress(keys);
  });

  std::vector<Cell> cells;
  for (const auto& p : partial) cells.insert(cells.end(), p.begin(), p.end());
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.key < b.key; });

  std::vector<HomeAssignment> out;
  for (std::size_t i = 0; i < cells.size();) {
    const auto user = static_cast<std::uint32_t>(cells[i].key >> 32);
    HomeAssignment h{UserId{user}, AntennaId{}, 0, 0};
    std::uint32_t best_antenna = 0, best = 0, current = UINT32_MAX, acc = 0;
    auto flush = [&] {
      // strictly greater keeps the first (smallest) antenna on ties
      if (current != UINT32_MAX && acc > best) {
        best = acc;
        best_antenna = current;
      }
    };
    for (; i < cells.size() && (cells[i].key >> 32) == user; ++i) {
      const auto antenna = static_cast<std::uint32_t>(cells[i].key);
      if (antenna != current) {
        flush();
        current = antenna;
        acc = 0;
      }
      acc += cells[i].count;
      h.night_calls_total += cells[i].count;
    }
    flush();
    h.home = AntennaId{best_antenna};
    h.night_calls_at_home = best;
    out.push_back(h);
  }
  return HomeMap(n_users, std::move(out));
}

/// `user_id,antenna_id,night_calls_at_home,night_calls_total`, by user_id.
inline std::string export_homes(const HomeMap& homes, const UserTable& users,
                                const AntennaRegistry& registry) {
  std::string out;
  for (const auto& h : homes.assignments()) {
    out += users.name(h.user);
    out.push_back(',');
    out += registry.name(h.home);
    out.push_back(',');
    out += std::to_string(h.night_calls_at_home);
    out.push_back(',');
    out += std::to_string(h.night_calls_total);
    out.push_back('\n');
  }
  return out;
}

inline HomeMap import_homes(std::string_view text, const UserTable& users,
                            const AntennaRegistry& registry,
                            const std::string& label = "<homes>") {
  std::vector<HomeAssignment> rows;
  std::size_t line_no = 0;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (line.empty()) return;
    std::string_view f[4];
    HomeAssignment h;
    if (split_fields(line, ',', f) != 4 || !parse_int(f[2], h.night_calls_at_home) ||
        !parse_int(f[3], h.night_calls_total))
      throw ParseError(label, line_no, "expected user_id,antenna_id,at_home,total");
    const auto u = users.find(f[0]);
    const auto a = registry.find(f[1]);
    if (!u) throw ParseError(label, line_no, "unknown user " + std::string{f[0]});
    if (!a) throw ParseError(label, line_no, "unknown antenna " + std::string{f[1]});
    if (h.night_calls_at_home < 1 || h.night_calls_at_home > h.night_calls_total)
      throw ParseError(label, line_no, "inconsistent night-call counts");
    h.user = *u;
    h.home = *a;
    rows.push_back(h);
  });
  std::sort(rows.begin(), rows.end(),
            [](const HomeAssignment& a, const HomeAssignment& b) { return a.user < b.user; });
  return HomeMap(users.size(), std::move(rows));
}

}  // namespace riskmap
