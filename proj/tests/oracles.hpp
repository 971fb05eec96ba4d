#pragma once

// Reference implementations written along different lines than the library:
// upward walks and dense recursion instead of arithmetic shortcuts. The unit
// tests compare library results against these.

#include <bit>
#include <cstddef>
#include <vector>

#include "treediff/tree.hpp"

namespace oracle {

// Distance by walking both vertices up to their common ancestor.
inline std::size_t tree_distance(treediff::Vertex a, treediff::Vertex b) {
  std::size_t steps = 0;
  while (a.length() > b.length()) {
    a = a.parent();
    ++steps;
  }
  while (b.length() > a.length()) {
    b = b.parent();
    ++steps;
  }
  while (!(a == b)) {
    a = a.parent();
    b = b.parent();
    steps += 2;
  }
  return steps;
}

// Canonical pairwise sum: the full binary tree over the next power of two,
// with absent right subtrees skipped rather than added as zeros.
inline double padded_sum(const std::vector<double>& xs, std::size_t lo,
                         std::size_t width) {
  if (width == 1) return xs[lo];
  std::size_t half = width / 2;
  if (lo + half >= xs.size()) return padded_sum(xs, lo, half);
  return padded_sum(xs, lo, half) + padded_sum(xs, lo + half, half);
}

inline double pairwise_reference(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return padded_sum(xs, 0, std::bit_ceil(xs.size()));
}

}  // namespace oracle
