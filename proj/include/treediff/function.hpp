#pragma once

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treediff/tree.hpp"
#include "treediff/weight.hpp"

namespace treediff {

using Cplx = std::complex<double>;

inline bool finite(Cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// A vertex substitution map, used by the generic composition operator.
struct VertexMap {
  std::function<Vertex(const Vertex&)> map;
  std::string name;
};

inline VertexMap backward_shift_map() {
  return {[](const Vertex& v) { return backward_shift(v); }, "b"};
}

// Complex-valued function on the tree, in one of three representations:
//   Sparse  - finitely supported, zero entries dropped
//   Radial  - value per level plus a constant tail, trailing tail values
//             stripped
//   Rule    - arbitrary evaluator; flagged radial when the value depends
//             only on the level
// Derivative and backward composition keep Sparse and Radial closed; mixed
// combinations and generic compositions fall back to Rule.
class TreeFunction {
public:
  enum class Kind { Sparse, Radial, Rule };

  // Rules built by named constructions carry a tag so norm code can attach
  // the matching exactness certificate.
  enum class RuleTag { Generic, AltWitness, AltWitnessDerivative };

  using RuleFn = std::function<Cplx(const Vertex&)>;

  static TreeFunction sparse(std::map<Vertex, Cplx> entries);
  static TreeFunction radial(std::vector<Cplx> values, Cplx tail = 0.0);
  static TreeFunction rule(RuleFn fn, std::string description, bool radial_values);
  static TreeFunction zero() { return sparse({}); }
  static TreeFunction constant(Cplx c) { return radial({}, c); }
  static TreeFunction characteristic(const Vertex& w) { return sparse({{w, 1.0}}); }
  // Radial rule from an expression in the level variable.
  static TreeFunction from_expr(Expr::Ptr expr, ParamEnv env, std::string text);

  // g(v) = (-1)^|v| / mu(v), the norm-one sign-alternating function of the
  // weighted space with weight mu.
  static TreeFunction alternating_witness(const Weight& mu);
  // Radial (-1, 1, 0, 0, ...): the standard extremal input for the
  // derivative on Hardy-type spaces.
  static TreeFunction hardy_witness() { return radial({-1.0, 1.0}, 0.0); }

  Kind kind() const noexcept { return kind_; }
  bool is_radial() const noexcept { return kind_ == Kind::Radial || rule_radial_; }
  const std::string& description() const noexcept { return description_; }

  Cplx evaluate(const Vertex& v) const;
  // Radial representations only: the common value on level n.
  Cplx value_at_level(std::uint64_t n) const;

  const std::map<Vertex, Cplx>& sparse_entries() const;
  const std::vector<Cplx>& radial_values() const;
  Cplx radial_tail() const;

  RuleTag rule_tag() const noexcept { return tag_; }
  const std::shared_ptr<const Weight>& tagged_weight() const noexcept { return weight_; }
  // Re-tags a rule function; the derivative uses this to certify images of
  // tagged witnesses.
  static TreeFunction with_tag(TreeFunction f, RuleTag tag,
                               std::shared_ptr<const Weight> weight);

  // Largest level carrying support (Sparse) or an explicit value (Radial);
  // 0 for empty support, nullopt for rules.
  std::optional<std::uint64_t> explicit_depth() const;

  // Sparse support addresses must fit the shape; other kinds are always
  // valid.
  void require_valid(const TreeShape& shape) const;

private:
  TreeFunction() = default;

  Kind kind_ = Kind::Sparse;
  std::map<Vertex, Cplx> entries_;      // Sparse
  std::vector<Cplx> values_;            // Radial
  Cplx tail_ = 0.0;                     // Radial
  RuleFn fn_;                           // Rule
  bool rule_radial_ = false;            // Rule
  std::string description_;
  RuleTag tag_ = RuleTag::Generic;
  std::shared_ptr<const Weight> weight_;  // for tagged rules
};

// (Df)(v) = f(v) - f(b(v)); the root derivative is 0 since b fixes o. The
// shape is needed to materialize sparse results, whose support spreads to
// the children of the input support.
TreeFunction derivative(const TreeFunction& f, const TreeShape& shape);

// (C_b f)(v) = f(b(v)).
TreeFunction compose_backward(const TreeFunction& f, const TreeShape& shape);

// (C_phi f)(v) = f(phi(v)); always a generic rule.
TreeFunction compose(const TreeFunction& f, const VertexMap& phi);

// a*f + b*g. A zero coefficient short-circuits to scaling the other side,
// preserving its representation.
TreeFunction linear_combine(Cplx a, const TreeFunction& f, Cplx b, const TreeFunction& g);

TreeFunction scale(Cplx a, const TreeFunction& f);

}  // namespace treediff
