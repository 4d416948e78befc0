#pragma once

// Brute-force reference implementations. They work on raw text and plain
// standard containers and deliberately share no code path with the
// optimized stages they check.

#include <array>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riskmap/antenna_registry.hpp"

namespace riskmap::oracle {

struct RawCall {
  std::string caller, callee, timestamp, direction, antenna;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out(1);
  for (char c : s) {
    if (c == sep)
      out.emplace_back();
    else
      out.back().push_back(c);
  }
  return out;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Regex check of one CDR line (syntax only; calendar validity via
/// days_in_month below).
inline bool line_well_formed(const std::string& line) {
  static const std::regex re(
      R"(^([^,]+),([^,]+),(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2}):(\d{2})(Z|[+-]\d{2}:\d{2}),(in|out),([^,]+)$)");
  std::smatch m;
  if (!std::regex_match(line, m, re)) return false;
  const int y = std::stoi(m[3]), mo = std::stoi(m[4]), d = std::stoi(m[5]);
  const int hh = std::stoi(m[6]), mi = std::stoi(m[7]), ss = std::stoi(m[8]);
  static constexpr int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (mo < 1 || mo > 12) return false;
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int dim = mdays[mo - 1] + (mo == 2 && leap);
  if (d < 1 || d > dim || hh > 23 || mi > 59 || ss > 59) return false;
  const std::string off = m[9];
  if (off != "Z" && (std::stoi(off.substr(1, 2)) > 18 || std::stoi(off.substr(4, 2)) > 59))
    return false;
  return true;
}

/// Well-formed, non-self-call lines as raw tuples.
inline std::vector<RawCall> raw_calls(const std::string& text) {
  std::vector<RawCall> out;
  for (const auto& line : lines_of(text)) {
    if (line.empty() || !line_well_formed(line)) continue;
    const auto f = split(line, ',');
    if (f[0] == f[1]) continue;
    out.push_back({f[0], f[1], f[2], f[3], f[4]});
  }
  return out;
}

/// Recount: per (user, "YYYY-MM" as written) participation, then the bounds.
inline std::set<std::string> kept_users(const std::vector<RawCall>& calls, unsigned mu,
                                        unsigned m_cap) {
  std::map<std::string, std::map<std::string, unsigned>> count;
  for (const auto& c : calls) {
    const std::string month = c.timestamp.substr(0, 7);
    ++count[c.caller][month];
    ++count[c.callee][month];
  }
  std::set<std::string> kept;
  for (const auto& [user, months] : count) {
    bool ok = true;
    for (const auto& [m, n] : months) ok = ok && n >= mu && n <= m_cap;
    if (ok) kept.insert(user);
  }
  return kept;
}

/// O(n^2) pair scan over the raw record list.
inline std::set<std::pair<std::string, std::string>> graph_edges(
    const std::vector<RawCall>& calls, const std::set<std::string>& clients) {
  std::set<std::pair<std::string, std::string>> edges;
  const std::vector<std::string> nodes(clients.begin(), clients.end());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      for (const auto& c : calls)
        if ((c.caller == nodes[i] && c.callee == nodes[j]) ||
            (c.caller == nodes[j] && c.callee == nodes[i])) {
          edges.emplace(nodes[i], nodes[j]);
          break;
        }
  return edges;
}

/// Sakamoto's day-of-week; 0 = Sunday.
inline int day_of_week(int y, int m, int d) {
  static constexpr int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  if (m < 3) y -= 1;
  return (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
}

/// Night test on the literal local fields of the timestamp, for the default
/// Monday-Thursday 20:00-06:00 regime.
inline bool default_night(const std::string& ts) {
  const int y = std::stoi(ts.substr(0, 4)), mo = std::stoi(ts.substr(5, 2));
  const int d = std::stoi(ts.substr(8, 2)), hh = std::stoi(ts.substr(11, 2));
  const int wd = day_of_week(y, mo, d);
  if (hh >= 20) return wd >= 1 && wd <= 4;  // Mon..Thu evening
  if (hh < 6) return wd >= 2 && wd <= 5;    // Tue..Fri morning
  return false;
}

struct RawHome {
  std::string antenna;
  unsigned at_home = 0, total = 0;
  friend bool operator==(const RawHome&, const RawHome&) = default;
};

inline std::map<std::string, RawHome> homes(const std::vector<RawCall>& calls,
                                            const std::set<std::string>& clients) {
  std::map<std::string, std::map<std::string, unsigned>> hist;
  for (const auto& c : calls) {
    const std::string& who = c.direction == "out" ? c.caller : c.callee;
    if (!clients.count(who) || !default_night(c.timestamp)) continue;
    ++hist[who][c.antenna];
  }
  std::map<std::string, RawHome> out;
  for (const auto& [user, h] : hist) {
    RawHome best;
    for (const auto& [antenna, n] : h) {  // map order = lexicographic
      best.total += n;
      if (n > best.at_home) {
        best.at_home = n;
        best.antenna = antenna;
      }
    }
    out[user] = best;
  }
  return out;
}

/// Textbook crossing number with an explicit on-boundary pre-check.
inline bool point_in_rings(double lat, double lon,
                           const std::vector<std::vector<GeoPoint>>& rings) {
  for (const auto& r : rings)
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const double x1 = r[i].lon, y1 = r[i].lat, x2 = r[i + 1].lon, y2 = r[i + 1].lat;
      const double cross = (x2 - x1) * (lat - y1) - (y2 - y1) * (lon - x1);
      const double dot = (lon - x1) * (x2 - x1) + (lat - y1) * (y2 - y1);
      const double len2 = (x2 - x1) * (x2 - x1) + (y2 - y1) * (y2 - y1);
      if (cross == 0 && dot >= 0 && dot <= len2) return true;
    }
  int crossings = 0;
  for (const auto& r : rings)
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const double x1 = r[i].lon, y1 = r[i].lat, x2 = r[i + 1].lon, y2 = r[i + 1].lat;
      if ((y1 <= lat && y2 > lat) || (y2 <= lat && y1 > lat)) {
        const double t = (lat - y1) / (y2 - y1);
        if (lon < x1 + t * (x2 - x1)) ++crossings;
      }
    }
  return crossings % 2 == 1;
}

using Adjacency = std::map<std::string, std::set<std::string>>;

/// O(V * E): every node checked against every neighbor.
inline std::set<std::string> vulnerable(const Adjacency& adj,
                                        const std::set<std::string>& residents) {
  std::set<std::string> out;
  for (const auto& [u, nbrs] : adj)
    for (const auto& v : nbrs)
      if (residents.count(v)) out.insert(u);
  return out;
}

/// {N, V, C, VC} per antenna name, every listed antenna present.
inline std::map<std::string, std::array<std::uint64_t, 4>> indicators(
    const std::vector<RawCall>& calls, const std::map<std::string, std::string>& home_of,
    const std::set<std::string>& residents, const std::set<std::string>& vulnerable_users,
    const std::vector<std::string>& antennas) {
  std::map<std::string, std::array<std::uint64_t, 4>> out;
  for (const auto& a : antennas) out[a] = {0, 0, 0, 0};
  for (const auto& [user, a] : home_of) {
    ++out[a][0];
    if (vulnerable_users.count(user)) ++out[a][1];
  }
  for (const auto& c : calls) {
    if (c.direction != "out" || !out.count(c.antenna)) continue;
    ++out[c.antenna][2];
    if (home_of.count(c.callee) && residents.count(c.callee)) ++out[c.antenna][3];
  }
  return out;
}

}  // namespace riskmap::oracle
