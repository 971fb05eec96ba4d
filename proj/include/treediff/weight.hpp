#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treediff/expr.hpp"
#include "treediff/tree.hpp"

namespace treediff {

// Radial weight: a positive value per level. Backed either by a finite
// table (the last entry repeats) or by an expression in the level variable.
class Weight {
public:
  static Weight from_table(std::vector<double> values);
  static Weight from_expr(Expr::Ptr expr, ParamEnv env);
  // Text forms: "table:1,2,1" or "expr:pow(M-1,n)".
  static Weight parse(std::string_view form, const ParamEnv& env);

  // Throws WeightDomainError unless the value is strictly positive.
  double at_level(std::uint64_t n) const;
  double at(const Vertex& v) const { return at_level(v.length()); }

  // Exact tail knowledge when the backing form gives it away: the ratio
  // at_level(n) / at_level(n-1) equals `ratio` for every n >= from_level.
  struct TailGeometry {
    double ratio;
    std::uint64_t from_level;
  };
  std::optional<TailGeometry> tail_geometry() const { return tail_; }

  // Whether sup over all levels is finite. `exact` is true when the answer
  // follows from tail geometry; otherwise the verdict comes from probing
  // levels up to probe_depth against the cap and is only a heuristic.
  struct Boundedness {
    bool bounded;
    bool exact;
    std::string note;
  };
  Boundedness boundedness(std::uint64_t probe_depth = 512, double cap = 1e6) const;

  bool same_as(const Weight& other) const;
  std::string to_string() const;

private:
  Weight() = default;

  bool table_backed_ = false;
  std::vector<double> table_;
  Expr::Ptr expr_;
  ParamEnv env_;
  std::optional<TailGeometry> tail_;
};

}  // namespace treediff
