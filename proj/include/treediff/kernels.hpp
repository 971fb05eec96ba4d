#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "treediff/tree.hpp"

namespace treediff::kernels {

enum class Exec { Serial, Parallel, Auto };

// Deterministic pairwise summation. Terms are leaves of the complete binary
// tree over their index order, zero-padded up to the next power of two;
// since x + 0.0 == x exactly, the padding never changes a bit and empty
// subtrees can be skipped. Every entry point below evaluates this one tree,
// so serial, blocked and parallel runs agree bit for bit.
class PairwiseAccumulator {
public:
  void push(double x) {
    std::size_t h = 0;
    while (count_ >> h & 1) {
      x = slot_[h] + x;
      ++h;
    }
    slot_[h] = x;
    ++count_;
  }

  // Folds the pending partials from the lowest height upward. This equals
  // the padded-tree total over everything pushed so far.
  double total() const {
    double acc = 0.0;
    bool first = true;
    for (std::size_t h = 0; h < 64; ++h) {
      if (!(count_ >> h & 1)) continue;
      acc = first ? slot_[h] : slot_[h] + acc;
      first = false;
    }
    return acc;
  }

  std::uint64_t count() const noexcept { return count_; }

  void reset() { count_ = 0; }

private:
  std::array<double, 64> slot_{};
  std::uint64_t count_ = 0;
};

double pairwise_total(std::span<const double> xs);

struct MaxResult {
  double value = 0.0;
  std::uint64_t rank = 0;  // lexicographic position of the first maximizer
};

inline constexpr std::uint64_t default_block = 1u << 14;

using LevelTerm = std::function<double(const Vertex&, std::uint64_t)>;

// Pairwise sum of term(v, rank) over level n in lexicographic order. The
// term must be pure; it may throw, and the first failure in index order is
// the one reported. block_size must be a power of two.
double level_sum(const TreeShape& shape, std::size_t n, const LevelTerm& term,
                 Exec exec = Exec::Auto, std::uint64_t block_size = default_block);

// Maximum of term(v, rank) over level n; ties resolve to the lowest rank,
// so the witness is the lexicographically least maximizer.
MaxResult level_max(const TreeShape& shape, std::size_t n, const LevelTerm& term,
                    Exec exec = Exec::Auto, std::uint64_t block_size = default_block);

// Same value as the dense pairwise sum over a level of the given width in
// which only `entries` (sorted by rank, ranks < width) are nonzero.
double sparse_level_sum(std::uint64_t width,
                        std::span<const std::pair<std::uint64_t, double>> entries);

}  // namespace treediff::kernels
