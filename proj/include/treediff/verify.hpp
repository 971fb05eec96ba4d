#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "treediff/operators.hpp"

namespace treediff {

// One comparison inside a check. Expected and computed are kept as strings
// so numbers, flags and verdicts all render the same way in reports.
struct Assertion {
  std::string what;
  std::string expected;
  std::string computed;
  double tolerance = 0.0;
  bool pass = false;
};

struct CheckResult {
  enum class Status { Pass, Fail, Skip };
  std::string id;
  std::string title;
  Status status = Status::Pass;
  std::string note;  // skip reason or scope remark
  std::vector<Assertion> assertions;
};

struct VerifyOptions {
  // When set, shape-parameterized checks run on this shape alone; checks
  // pinned to an incompatible shape are reported as skipped.
  std::optional<TreeShape> shape;
  int depth = 8;
  std::uint64_t seed = 0;
};

struct VerifySummary {
  std::vector<CheckResult> checks;
  int passed = 0;
  int failed = 0;
  int skipped = 0;
  bool all_passed() const { return failed == 0; }
};

VerifySummary run_verification(const VerifyOptions& options);

// Deterministic uniform double in [0, 1); the standard distributions are
// implementation-defined, this is not.
inline double rnd01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

// Finitely supported function with `count` draws of random vertices up to
// max_depth and values bounded away from zero.
TreeFunction random_sparse_function(const TreeShape& shape, int max_depth, int count,
                                    std::mt19937_64& rng);

// Random expression whose evaluation stays finite for levels n <= 20.
// Parameters, when drawn, are named a and M.
Expr::Ptr random_expression(std::mt19937_64& rng, int depth);

}  // namespace treediff
