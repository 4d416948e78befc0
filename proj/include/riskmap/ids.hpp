#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace riskmap {

/// Dense index into a NameTable. The tag keeps user and antenna indices from
/// being mixed up.
template <class Tag>
struct Index {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(Index, Index) = default;
};

struct UserTag;
struct AntennaTag;
using UserId = Index<UserTag>;
using AntennaId = Index<AntennaTag>;

/// Immutable sorted set of opaque identifiers. Index order equals byte-wise
/// lexicographic order of the names, so sorting by index sorts by name.
template <class Tag>
class NameTable {
 public:
  using id_type = Index<Tag>;

  NameTable() = default;

  /// Sorts and deduplicates.
  static NameTable from_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    NameTable t;
    t.names_ = std::move(names);
    return t;
  }

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  const std::string& name(id_type id) const { return names_.at(id.value); }

  std::optional<id_type> find(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name,
                               [](const std::string& a, std::string_view b) {
                                 return std::string_view{a} < b;
                               });
    if (it == names_.end() || *it != name) return std::nullopt;
    return id_type{static_cast<std::uint32_t>(it - names_.begin())};
  }

  std::span<const std::string> names() const noexcept { return names_; }

  friend bool operator==(const NameTable&, const NameTable&) = default;

 private:
  std::vector<std::string> names_;
};

using UserTable = NameTable<UserTag>;

/// Membership set over a dense index space.
template <class Tag>
class IdSet {
 public:
  using id_type = Index<Tag>;

  IdSet() = default;
  explicit IdSet(std::size_t universe) : bits_(universe, 0) {}

  std::size_t universe() const noexcept { return bits_.size(); }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  bool contains(id_type id) const noexcept {
    return id.value < bits_.size() && bits_[id.value] != 0;
  }

  bool insert(id_type id) {
    if (id.value >= bits_.size()) bits_.resize(id.value + 1, 0);
    if (bits_[id.value]) return false;
    bits_[id.value] = 1;
    ++count_;
    return true;
  }

  std::vector<id_type> members() const {
    std::vector<id_type> out;
    out.reserve(count_);
    for (std::uint32_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(id_type{i});
    return out;
  }

  friend bool operator==(const IdSet& a, const IdSet& b) {
    return a.members() == b.members();
  }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

using UserSet = IdSet<UserTag>;

}  // namespace riskmap
