#include "treediff/kernels.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace treediff::kernels {

double pairwise_total(std::span<const double> xs) {
  PairwiseAccumulator acc;
  for (double x : xs) acc.push(x);
  return acc.total();
}

namespace {

void check_block_size(std::uint64_t block_size) {
  if (block_size == 0 || !std::has_single_bit(block_size))
    throw ConfigError("kernel block size must be a power of two");
}

bool go_parallel(Exec exec, std::uint64_t width, std::uint64_t block_size) {
#ifdef _OPENMP
  switch (exec) {
    case Exec::Serial:
      return false;
    case Exec::Parallel:
      return width > block_size;
    case Exec::Auto:
      return width > block_size;
  }
  return false;
#else
  (void)exec;
  (void)width;
  (void)block_size;
  return false;
#endif
}

// Runs fn(b) for every block index, possibly in parallel, and rethrows the
// lowest-indexed failure so error reporting stays deterministic.
template <typename Fn>
void run_blocks(std::uint64_t num_blocks, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> errs(num_blocks);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#else
  (void)parallel;
#endif
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(num_blocks); ++b) {
    try {
      fn(static_cast<std::uint64_t>(b));
    } catch (...) {
      errs[b] = std::current_exception();
    }
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double level_sum(const TreeShape& shape, std::size_t n, const LevelTerm& term,
                 Exec exec, std::uint64_t block_size) {
  check_block_size(block_size);
  std::uint64_t width = shape.level_size(n);
  std::uint64_t num_blocks = (width + block_size - 1) / block_size;
  bool parallel = go_parallel(exec, width, block_size);

  // Aligned power-of-two blocks are whole subtrees of the summation tree,
  // so per-block accumulators followed by a block-level accumulator build
  // exactly the tree a single pass would.
  std::vector<double> block_totals(num_blocks);
  run_blocks(num_blocks, parallel, [&](std::uint64_t b) {
    std::uint64_t lo = b * block_size;
    std::uint64_t hi = std::min(width, lo + block_size);
    PairwiseAccumulator acc;
    for (LevelCursor c(shape, n, lo); c.rank() < hi; c.advance())
      acc.push(term(c.vertex(), c.rank()));
    block_totals[b] = acc.total();
  });

  return pairwise_total(block_totals);
}

MaxResult level_max(const TreeShape& shape, std::size_t n, const LevelTerm& term,
                    Exec exec, std::uint64_t block_size) {
  check_block_size(block_size);
  std::uint64_t width = shape.level_size(n);
  std::uint64_t num_blocks = (width + block_size - 1) / block_size;
  bool parallel = go_parallel(exec, width, block_size);

  std::vector<MaxResult> block_best(num_blocks);
  run_blocks(num_blocks, parallel, [&](std::uint64_t b) {
    std::uint64_t lo = b * block_size;
    std::uint64_t hi = std::min(width, lo + block_size);
    LevelCursor c(shape, n, lo);
    MaxResult best{term(c.vertex(), c.rank()), c.rank()};
    for (c.advance(); c.rank() < hi; c.advance()) {
      double x = term(c.vertex(), c.rank());
      if (x > best.value) best = {x, c.rank()};
    }
    block_best[b] = best;
  });

  // Combining in block order with a strict comparison keeps the lowest rank
  // among maximizers, whatever the partition was.
  MaxResult best = block_best[0];
  for (std::uint64_t b = 1; b < num_blocks; ++b)
    if (block_best[b].value > best.value) best = block_best[b];
  return best;
}

namespace {

double sparse_sum_rec(std::uint64_t lo, std::uint64_t w,
                      std::span<const std::pair<std::uint64_t, double>> entries) {
  if (w == 1) return entries.front().second;
  std::uint64_t half = w / 2;
  auto mid = std::partition_point(entries.begin(), entries.end(),
                                  [&](const auto& e) { return e.first < lo + half; });
  std::size_t nl = static_cast<std::size_t>(mid - entries.begin());
  auto left = entries.first(nl);
  auto right = entries.subspan(nl);
  // An all-zero subtree contributes an exact 0.0, so adding it is the
  // identity and the branch can be skipped without changing a bit.
  if (left.empty()) return sparse_sum_rec(lo + half, half, right);
  if (right.empty()) return sparse_sum_rec(lo, half, left);
  return sparse_sum_rec(lo, half, left) + sparse_sum_rec(lo + half, half, right);
}

}  // namespace

double sparse_level_sum(std::uint64_t width,
                        std::span<const std::pair<std::uint64_t, double>> entries) {
  if (entries.empty()) return 0.0;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i)
    if (entries[i].first >= entries[i + 1].first)
      throw ConfigError("sparse level entries must have strictly increasing ranks");
  if (entries.back().first >= width)
    throw RangeError("sparse level entry rank " + std::to_string(entries.back().first) +
                     " exceeds level width " + std::to_string(width));
  return sparse_sum_rec(0, std::bit_ceil(width), entries);
}

}  // namespace treediff::kernels
