#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riskmap/cdr_ingest.hpp"
#include "riskmap/error.hpp"
#include "riskmap/ids.hpp"
#include "riskmap/parallel.hpp"
#include "riskmap/text.hpp"

namespace riskmap {

/// Undirected boolean communication graph over operator clients, stored as
/// compressed adjacency rows. Immutable once built; neighbor rows are sorted.
class SocialGraph {
 public:
  SocialGraph() = default;

  /// `edges` must hold canonical pairs (first < second); duplicates allowed.
  static SocialGraph from_edges(UserSet nodes, std::vector<std::uint64_t> packed_edges) {
    std::sort(packed_edges.begin(), packed_edges.end());
    packed_edges.erase(std::unique(packed_edges.begin(), packed_edges.end()),
                       packed_edges.end());
    SocialGraph g;
    g.nodes_ = std::move(nodes);
    const std::size_t n = g.nodes_.universe();
    std::vector<std::uint32_t> degree(n + 1, 0);
    for (std::uint64_t e : packed_edges) {
      const auto [a, b] = unpack(e);
      if (a >= b || b >= n) throw ConsistencyError("non-canonical edge in graph build");
      ++degree[a];
      ++degree[b];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
    g.adjacency_.resize(g.offsets_[n]);
    std::vector<std::uint64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    // Sorted (a, b) input fills every row in ascending order: smaller
    // neighbors arrive as the `b` side before larger ones as the `a` side.
    for (std::uint64_t e : packed_edges) {
      const auto [a, b] = unpack(e);
      g.adjacency_[fill[a]++] = UserId{b};
      g.adjacency_[fill[b]++] = UserId{a};
    }
    g.edge_count_ = packed_edges.size();
    return g;
  }

  static constexpr std::uint64_t pack(std::uint32_t a, std::uint32_t b) noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  static constexpr std::pair<std::uint32_t, std::uint32_t> unpack(std::uint64_t e) noexcept {
    return {static_cast<std::uint32_t>(e >> 32), static_cast<std::uint32_t>(e)};
  }

  const UserSet& nodes() const noexcept { return nodes_; }
  bool has_node(UserId u) const noexcept { return nodes_.contains(u); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Sorted neighbors; empty for unknown users.
  std::span<const UserId> neighbors(UserId u) const noexcept {
    if (u.value + 1 >= offsets_.size()) return {};
    return {adjacency_.data() + offsets_[u.value],
            adjacency_.data() + offsets_[u.value + 1]};
  }

  bool has_edge(UserId a, UserId b) const noexcept {
    const auto row = neighbors(a);
    return std::binary_search(row.begin(), row.end(), b);
  }

  /// Canonical (smaller, larger) pairs in ascending order.
  std::vector<std::pair<UserId, UserId>> edges() const {
    std::vector<std::pair<UserId, UserId>> out;
    out.reserve(edge_count_);
    for (std::uint32_t a = 0; a + 1 < offsets_.size(); ++a)
      for (UserId b : neighbors(UserId{a}))
        if (a < b.value) out.emplace_back(UserId{a}, b);
    return out;
  }

  friend bool operator==(const SocialGraph&, const SocialGraph&) = default;

 private:
  UserSet nodes_;
  std::vector<std::uint64_t> offsets_;
  std::vector<UserId> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Edge {i, j} exists iff both are clients and some record joins them.
inline SocialGraph build_graph(std::span<const CallRecord> records, const UserSet& clients,
                               unsigned partitions = 1) {
  const auto ranges = split_evenly(records.size(), partitions);
  std::vector<std::vector<std::uint64_t>> partial(ranges.size());
  parallel_for(ranges.size(), partitions, [&](std::size_t p) {
    auto& out = partial[p];
    for (std::size_t i = ranges[p].first; i < ranges[p].second; ++i) {
      const auto& r = records[i];
      if (!clients.contains(r.caller) || !clients.contains(r.callee)) continue;
      const auto [a, b] = std::minmax(r.caller.value, r.callee.value);
      out.push_back(SocialGraph::pack(a, b));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  });
  std::vector<std::uint64_t> merged;
  for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  return SocialGraph::from_edges(clients, std::move(merged));
}

inline std::span<const UserId> neighbors(const SocialGraph& g, UserId u) noexcept {
  return g.neighbors(u);
}

/// `n_i,n_j` per line, n_i < n_j, lines in lexicographic order.
inline std::string export_edge_list(const SocialGraph& g, const UserTable& users) {
  std::vector<std::pair<std::string_view, std::string_view>> rows;
  for (const auto& [a, b] : g.edges()) {
    std::string_view x = users.name(a), y = users.name(b);
    if (y < x) std::swap(x, y);
    rows.emplace_back(x, y);
  }
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [x, y] : rows) {
    out += x;
    out.push_back(',');
    out += y;
    out.push_back('\n');
  }
  return out;
}

struct ImportedGraph {
  UserTable users;
  SocialGraph graph;
};

namespace detail {

inline std::vector<std::pair<std::string_view, std::string_view>> parse_edge_lines(
    std::string_view text, const std::string& label) {
  std::vector<std::pair<std::string_view, std::string_view>> rows;
  std::size_t line_no = 0;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (line.empty()) return;
    std::string_view f[2];
    if (split_fields(line, ',', f) != 2 || f[0].empty() || f[1].empty())
      throw ParseError(label, line_no, "expected n_i,n_j");
    if (f[0] == f[1]) throw ParseError(label, line_no, "self-loop " + std::string{f[0]});
    rows.emplace_back(f[0], f[1]);
  });
  return rows;
}

}  // namespace detail

/// Builds a standalone graph whose nodes are the edge endpoints.
inline ImportedGraph import_edge_list(std::string_view text,
                                      const std::string& label = "<edges>") {
  const auto rows = detail::parse_edge_lines(text, label);
  std::vector<std::string> names;
  for (const auto& [x, y] : rows) {
    names.emplace_back(x);
    names.emplace_back(y);
  }
  ImportedGraph out;
  out.users = UserTable::from_names(std::move(names));
  UserSet nodes(out.users.size());
  std::vector<std::uint64_t> packed;
  for (const auto& [x, y] : rows) {
    const auto a = out.users.find(x)->value, b = out.users.find(y)->value;
    nodes.insert(UserId{a});
    nodes.insert(UserId{b});
    packed.push_back(SocialGraph::pack(std::min(a, b), std::max(a, b)));
  }
  out.graph = SocialGraph::from_edges(std::move(nodes), std::move(packed));
  return out;
}

/// Resolves names against an existing table; unknown users are an error.
/// Nodes are `clients` plus every endpoint.
inline SocialGraph import_edge_list(std::string_view text, const UserTable& users,
                                    UserSet clients, const std::string& label = "<edges>") {
  std::vector<std::uint64_t> packed;
  for (const auto& [x, y] : detail::parse_edge_lines(text, label)) {
    const auto a = users.find(x), b = users.find(y);
    if (!a || !b)
      throw ConsistencyError(label + ": unknown user " + std::string{a ? y : x});
    clients.insert(*a);
    clients.insert(*b);
    packed.push_back(SocialGraph::pack(std::min(a->value, b->value),
                                       std::max(a->value, b->value)));
  }
  return SocialGraph::from_edges(std::move(clients), std::move(packed));
}

}  // namespace riskmap
