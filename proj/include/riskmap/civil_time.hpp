#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace riskmap {

/// An instant plus the UTC offset the record was stamped with. Local civil
/// time is always recoverable, which is what calendar months and the night
/// window are defined on.
struct Timestamp {
  std::int64_t utc_seconds = 0;
  std::int32_t offset_seconds = 0;

  constexpr std::int64_t local_seconds() const noexcept {
    return utc_seconds + offset_seconds;
  }

  friend constexpr bool operator==(const Timestamp&, const Timestamp&) = default;
};

struct CivilDate {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  friend constexpr auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

namespace detail {

inline constexpr std::int64_t kSecondsPerDay = 86400;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

template <class Int>
bool parse_fixed(std::string_view s, Int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline void append_2d(std::string& out, unsigned v) {
  out.push_back(static_cast<char>('0' + v / 10));
  out.push_back(static_cast<char>('0' + v % 10));
}

}  // namespace detail

/// Days since 1970-01-01 for a civil date; nullopt if the date does not exist.
inline std::optional<std::int64_t> days_from_civil(CivilDate d) {
  using namespace std::chrono;
  const year_month_day ymd{year{d.year}, month{d.month}, day{d.day}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

inline CivilDate civil_from_days(std::int64_t days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

/// 0 = Sunday ... 6 = Saturday.
inline unsigned weekday_from_days(std::int64_t days) {
  using namespace std::chrono;
  return weekday{sys_days{std::chrono::days{days}}}.c_encoding();
}

inline std::int64_t local_day(const Timestamp& t) noexcept {
  return detail::floor_div(t.local_seconds(), detail::kSecondsPerDay);
}

inline std::int64_t local_second_of_day(const Timestamp& t) noexcept {
  return t.local_seconds() - local_day(t) * detail::kSecondsPerDay;
}

/// Months since year 0, in the record's own local calendar.
inline std::int64_t local_month_index(const Timestamp& t) {
  const CivilDate d = civil_from_days(local_day(t));
  return static_cast<std::int64_t>(d.year) * 12 + (d.month - 1);
}

/// `YYYY-MM-DD`.
inline std::optional<CivilDate> parse_civil_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  CivilDate d;
  if (!detail::parse_fixed(s.substr(0, 4), d.year) ||
      !detail::parse_fixed(s.substr(5, 2), d.month) ||
      !detail::parse_fixed(s.substr(8, 2), d.day))
    return std::nullopt;
  if (!days_from_civil(d)) return std::nullopt;
  return d;
}

inline std::string format_civil_date(CivilDate d) {
  std::string out = std::to_string(d.year);
  while (out.size() < 4) out.insert(out.begin(), '0');
  out.push_back('-');
  detail::append_2d(out, d.month);
  out.push_back('-');
  detail::append_2d(out, d.day);
  return out;
}

/// `YYYY-MM-DDTHH:MM:SS±HH:MM` (or a trailing `Z`). Seconds precision only.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() < 20) return std::nullopt;
  const auto date = parse_civil_date(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    return std::nullopt;
  unsigned hh = 0, mm = 0, ss = 0;
  if (!detail::parse_fixed(s.substr(11, 2), hh) ||
      !detail::parse_fixed(s.substr(14, 2), mm) ||
      !detail::parse_fixed(s.substr(17, 2), ss))
    return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;

  std::int32_t offset = 0;
  const std::string_view zone = s.substr(19);
  if (zone == "Z") {
    offset = 0;
  } else {
    if (zone.size() != 6 || (zone[0] != '+' && zone[0] != '-') || zone[3] != ':')
      return std::nullopt;
    unsigned oh = 0, om = 0;
    if (!detail::parse_fixed(zone.substr(1, 2), oh) ||
        !detail::parse_fixed(zone.substr(4, 2), om))
      return std::nullopt;
    if (oh > 18 || om > 59) return std::nullopt;
    offset = static_cast<std::int32_t>(oh * 3600 + om * 60);
    if (zone[0] == '-') offset = -offset;
  }

  const std::int64_t local = *days_from_civil(*date) * detail::kSecondsPerDay +
                             hh * 3600 + mm * 60 + ss;
  return Timestamp{local - offset, offset};
}

inline std::string format_timestamp(const Timestamp& t) {
  const std::int64_t day = local_day(t);
  const auto sod = static_cast<unsigned>(local_second_of_day(t));
  std::string out = format_civil_date(civil_from_days(day));
  out.push_back('T');
  detail::append_2d(out, sod / 3600);
  out.push_back(':');
  detail::append_2d(out, sod / 60 % 60);
  out.push_back(':');
  detail::append_2d(out, sod % 60);
  const std::int32_t off = t.offset_seconds;
  out.push_back(off < 0 ? '-' : '+');
  const auto abs_off = static_cast<unsigned>(off < 0 ? -off : off);
  detail::append_2d(out, abs_off / 3600);
  out.push_back(':');
  detail::append_2d(out, abs_off / 60 % 60);
  return out;
}

}  // namespace riskmap
