#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treediff/errors.hpp"

namespace treediff {

// A vertex of an infinite rooted tree is its address word: the sequence of
// child indices along the path from the root. The root is the empty word.
class Vertex {
public:
  Vertex() = default;
  explicit Vertex(std::vector<std::uint32_t> address) : addr_(std::move(address)) {}

  static Vertex root() { return Vertex{}; }

  std::size_t length() const noexcept { return addr_.size(); }
  bool is_root() const noexcept { return addr_.empty(); }
  std::uint32_t operator[](std::size_t i) const { return addr_[i]; }
  const std::vector<std::uint32_t>& address() const noexcept { return addr_; }

  // The root is its own parent, so the backward shift is total.
  Vertex parent() const;
  Vertex child(std::uint32_t i) const;

  bool operator==(const Vertex&) const = default;

  // Level-lexicographic order: first by length, then by address word.
  std::strong_ordering operator<=>(const Vertex& other) const {
    if (auto c = addr_.size() <=> other.addr_.size(); c != 0) return c;
    for (std::size_t i = 0; i < addr_.size(); ++i)
      if (auto c = addr_[i] <=> other.addr_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::string to_string() const;           // "o" for the root, else "[0,1,2]"
  static Vertex parse(std::string_view);   // accepts "o", "[]", "[0,1]", "0,1"

private:
  friend class LevelCursor;
  std::vector<std::uint32_t> addr_;
};

inline Vertex backward_shift(const Vertex& v) { return v.parent(); }

// Branching law of the tree. The child count depends only on the level, so
// every level is a mixed-radix digit space and can be enumerated lazily.
class TreeShape {
public:
  enum class Kind { Homogeneous, ConstantChildren, PerLevel };

  // Homogeneous tree of degree q+1: the root has q+1 children, every other
  // vertex has q.
  static TreeShape homogeneous(std::uint32_t q);
  // Every vertex, the root included, has exactly k children.
  static TreeShape constant_children(std::uint32_t k);
  // Child count by level; the last entry repeats beyond the table.
  static TreeShape per_level(std::vector<std::uint32_t> table);

  // Text forms: "homogeneous:2", "constant:3", "perlevel:2,3,1".
  static TreeShape parse(std::string_view text);
  std::string to_string() const;

  Kind kind() const noexcept { return kind_; }
  std::uint32_t homogeneous_q() const;

  // Child count of any vertex at the given level.
  std::uint32_t branching_at_level(std::size_t level) const;
  std::uint32_t branching(const Vertex& parent) const { return branching_at_level(parent.length()); }

  bool valid(const Vertex& v) const noexcept;
  void require_valid(const Vertex& v) const;

  bool is_path() const;                 // every vertex has exactly one child
  bool has_branching_vertex() const;    // some vertex has at least two children

  // Number of vertices at level n. Throws RangeError when the count exceeds
  // the 64-bit budget; the message names the largest representable depth.
  std::uint64_t level_size(std::size_t n) const;
  // Largest depth whose level size is representable, or nullopt when level
  // sizes stay bounded (a path beyond some level).
  std::optional<std::size_t> max_safe_depth() const;

  bool operator==(const TreeShape&) const = default;

private:
  TreeShape(Kind k, std::uint32_t p, std::vector<std::uint32_t> t)
      : kind_(k), param_(p), table_(std::move(t)) {}

  Kind kind_;
  std::uint32_t param_;
  std::vector<std::uint32_t> table_;
};

std::vector<Vertex> children(const TreeShape& shape, const Vertex& v);

// Edge-count distance between two valid vertices: |v| + |w| minus twice the
// length of the longest common prefix.
std::size_t distance(const TreeShape& shape, const Vertex& v, const Vertex& w);

// True when w lies in the sector rooted at v, i.e. v is a prefix of w.
bool in_sector(const Vertex& v, const Vertex& w);

bool in_open_ball(const TreeShape& shape, const Vertex& center, std::size_t radius,
                  const Vertex& w);
bool in_closed_ball(const TreeShape& shape, const Vertex& center, std::size_t radius,
                    const Vertex& w);

// Position of v within its level under lexicographic order.
std::uint64_t level_rank(const TreeShape& shape, const Vertex& v);
// Inverse of level_rank: the vertex of level n at the given position.
Vertex level_vertex(const TreeShape& shape, std::size_t n, std::uint64_t rank);

// Lazy lexicographic walk over one level. The vertex object is updated in
// place, so no allocation happens per step once the address has its length.
class LevelCursor {
public:
  LevelCursor(const TreeShape& shape, std::size_t n, std::uint64_t start_rank = 0);

  const Vertex& vertex() const noexcept { return v_; }
  std::uint64_t rank() const noexcept { return rank_; }
  bool exhausted() const noexcept { return rank_ >= size_; }
  void advance();

private:
  const TreeShape* shape_;
  Vertex v_;
  std::uint64_t rank_;
  std::uint64_t size_;
};

template <typename F>
void for_each_level_vertex(const TreeShape& shape, std::size_t n, F&& f) {
  for (LevelCursor c(shape, n); !c.exhausted(); c.advance()) f(c.vertex(), c.rank());
}

// Materialized level, for tests and small depths.
std::vector<Vertex> level_vertices(const TreeShape& shape, std::size_t n);

}  // namespace treediff
