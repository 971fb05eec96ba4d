#include "treediff/tree.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace treediff {

Vertex Vertex::parent() const {
  if (addr_.empty()) return *this;
  std::vector<std::uint32_t> a(addr_.begin(), addr_.end() - 1);
  return Vertex(std::move(a));
}

Vertex Vertex::child(std::uint32_t i) const {
  std::vector<std::uint32_t> a = addr_;
  a.push_back(i);
  return Vertex(std::move(a));
}

std::string Vertex::to_string() const {
  if (addr_.empty()) return "o";
  std::string s = "[";
  for (std::size_t i = 0; i < addr_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(addr_[i]);
  }
  s += ']';
  return s;
}

Vertex Vertex::parse(std::string_view text) {
  std::string_view body = text;
  if (body == "o" || body == "" || body == "[]") return Vertex::root();
  if (body.front() == '[') {
    if (body.back() != ']')
      throw ParseError("vertex address missing closing ']'", text.size() - 1);
    body = body.substr(1, body.size() - 2);
    if (body.empty()) return Vertex::root();
  }
  std::vector<std::uint32_t> digits;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string_view tok = body.substr(pos, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - pos);
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ParseError("bad child index '" + std::string(tok) + "' in vertex address",
                       static_cast<std::size_t>(tok.data() - text.data()));
    digits.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return Vertex(std::move(digits));
}

TreeShape TreeShape::homogeneous(std::uint32_t q) {
  if (q == 0) throw ConfigError("homogeneous shape needs q >= 1");
  return TreeShape(Kind::Homogeneous, q, {});
}

TreeShape TreeShape::constant_children(std::uint32_t k) {
  if (k == 0) throw ConfigError("constant-children shape needs k >= 1");
  return TreeShape(Kind::ConstantChildren, k, {});
}

TreeShape TreeShape::per_level(std::vector<std::uint32_t> table) {
  if (table.empty()) throw ConfigError("per-level shape needs a non-empty table");
  for (auto k : table)
    if (k == 0) throw ConfigError("per-level shape entries must be >= 1");
  return TreeShape(Kind::PerLevel, 0, std::move(table));
}

TreeShape TreeShape::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string_view head = text.substr(0, colon);
  std::string_view tail = colon == std::string_view::npos ? std::string_view{}
                                                          : text.substr(colon + 1);
  auto parse_u32 = [&](std::string_view tok, std::size_t at) {
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ParseError("bad number '" + std::string(tok) + "' in shape", at);
    return value;
  };
  if (head == "homogeneous")
    return homogeneous(parse_u32(tail, colon + 1));
  if (head == "constant")
    return constant_children(parse_u32(tail, colon + 1));
  if (head == "perlevel") {
    std::vector<std::uint32_t> table;
    std::size_t pos = 0;
    while (pos <= tail.size()) {
      std::size_t comma = tail.find(',', pos);
      std::string_view tok = tail.substr(pos, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - pos);
      table.push_back(parse_u32(tok, colon + 1 + pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return per_level(std::move(table));
  }
  throw ParseError("unknown shape '" + std::string(head) +
                       "' (expected homogeneous:q, constant:k or perlevel:a,b,...)",
                   0);
}

std::string TreeShape::to_string() const {
  switch (kind_) {
    case Kind::Homogeneous:
      return "homogeneous:" + std::to_string(param_);
    case Kind::ConstantChildren:
      return "constant:" + std::to_string(param_);
    case Kind::PerLevel: {
      std::string s = "perlevel:";
      for (std::size_t i = 0; i < table_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(table_[i]);
      }
      return s;
    }
  }
  return {};
}

std::uint32_t TreeShape::homogeneous_q() const {
  if (kind_ != Kind::Homogeneous)
    throw ConfigError("shape " + to_string() + " is not homogeneous");
  return param_;
}

std::uint32_t TreeShape::branching_at_level(std::size_t level) const {
  switch (kind_) {
    case Kind::Homogeneous:
      return level == 0 ? param_ + 1 : param_;
    case Kind::ConstantChildren:
      return param_;
    case Kind::PerLevel:
      return table_[std::min(level, table_.size() - 1)];
  }
  return 0;
}

bool TreeShape::valid(const Vertex& v) const noexcept {
  for (std::size_t i = 0; i < v.length(); ++i)
    if (v[i] >= branching_at_level(i)) return false;
  return true;
}

void TreeShape::require_valid(const Vertex& v) const {
  for (std::size_t i = 0; i < v.length(); ++i)
    if (v[i] >= branching_at_level(i))
      throw AddressError("vertex " + v.to_string() + " is not in shape " + to_string() +
                         ": child index " + std::to_string(v[i]) + " at position " +
                         std::to_string(i) + " exceeds branching " +
                         std::to_string(branching_at_level(i)));
}

bool TreeShape::is_path() const {
  switch (kind_) {
    case Kind::Homogeneous:
      return false;  // the root always has q+1 >= 2 children
    case Kind::ConstantChildren:
      return param_ == 1;
    case Kind::PerLevel:
      return std::all_of(table_.begin(), table_.end(),
                         [](std::uint32_t k) { return k == 1; });
  }
  return false;
}

bool TreeShape::has_branching_vertex() const { return !is_path(); }

std::uint64_t TreeShape::level_size(std::size_t n) const {
  std::uint64_t size = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t b = branching_at_level(i);
    if (__builtin_mul_overflow(size, b, &size)) {
      auto safe = max_safe_depth();
      throw RangeError("level size overflows 64 bits at depth " + std::to_string(n) +
                       " for shape " + to_string() +
                       (safe ? " (largest representable depth is " + std::to_string(*safe) + ")"
                             : ""));
    }
  }
  return size;
}

std::optional<std::size_t> TreeShape::max_safe_depth() const {
  // Level sizes grow only while branching exceeds 1, so either the product
  // overflows within 64 doublings of a factor >= 2 or it stays bounded.
  std::uint64_t size = 1;
  std::size_t stable_from = kind_ == Kind::PerLevel ? table_.size() : 1;
  for (std::size_t n = 0;; ++n) {
    std::uint64_t b = branching_at_level(n);
    if (n >= stable_from && b == 1) return std::nullopt;  // path from here on
    std::uint64_t next;
    if (__builtin_mul_overflow(size, b, &next)) return n;
    size = next;
  }
}

std::vector<Vertex> children(const TreeShape& shape, const Vertex& v) {
  shape.require_valid(v);
  std::uint32_t k = shape.branching(v);
  std::vector<Vertex> out;
  out.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) out.push_back(v.child(i));
  return out;
}

std::size_t distance(const TreeShape& shape, const Vertex& v, const Vertex& w) {
  shape.require_valid(v);
  shape.require_valid(w);
  std::size_t lcp = 0;
  std::size_t m = std::min(v.length(), w.length());
  while (lcp < m && v[lcp] == w[lcp]) ++lcp;
  return v.length() + w.length() - 2 * lcp;
}

bool in_sector(const Vertex& v, const Vertex& w) {
  if (v.length() > w.length()) return false;
  for (std::size_t i = 0; i < v.length(); ++i)
    if (v[i] != w[i]) return false;
  return true;
}

bool in_open_ball(const TreeShape& shape, const Vertex& center, std::size_t radius,
                  const Vertex& w) {
  return distance(shape, center, w) < radius;
}

bool in_closed_ball(const TreeShape& shape, const Vertex& center, std::size_t radius,
                    const Vertex& w) {
  return distance(shape, center, w) <= radius;
}

std::uint64_t level_rank(const TreeShape& shape, const Vertex& v) {
  shape.require_valid(v);
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < v.length(); ++i) {
    // rank = ((d0 * r1 + d1) * r2 + d2) ... in mixed radix
    rank = rank * shape.branching_at_level(i) + v[i];
  }
  return rank;
}

Vertex level_vertex(const TreeShape& shape, std::size_t n, std::uint64_t rank) {
  std::uint64_t size = shape.level_size(n);
  if (rank >= size)
    throw RangeError("rank " + std::to_string(rank) + " out of range for level " +
                     std::to_string(n) + " of size " + std::to_string(size));
  std::vector<std::uint32_t> digits(n);
  for (std::size_t i = n; i-- > 0;) {
    std::uint64_t b = shape.branching_at_level(i);
    digits[i] = static_cast<std::uint32_t>(rank % b);
    rank /= b;
  }
  return Vertex(std::move(digits));
}

LevelCursor::LevelCursor(const TreeShape& shape, std::size_t n, std::uint64_t start_rank)
    : shape_(&shape), rank_(start_rank), size_(shape.level_size(n)) {
  if (rank_ < size_) v_ = level_vertex(shape, n, rank_);
}

void LevelCursor::advance() {
  ++rank_;
  if (rank_ >= size_) return;
  // Mixed-radix odometer step on the address word, in place.
  auto& a = v_.addr_;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (++a[i] < shape_->branching_at_level(i)) return;
    a[i] = 0;
  }
}

std::vector<Vertex> level_vertices(const TreeShape& shape, std::size_t n) {
  std::vector<Vertex> out;
  out.reserve(shape.level_size(n));
  for_each_level_vertex(shape, n, [&](const Vertex& v, std::uint64_t) { out.push_back(v); });
  return out;
}

}  // namespace treediff
