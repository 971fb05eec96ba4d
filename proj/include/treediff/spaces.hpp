#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "treediff/function.hpp"
#include "treediff/kernels.hpp"

namespace treediff {

// Hardy-type space parameters: the space lives on the homogeneous tree of
// degree q+1 and averages p-th powers over levels.
struct HardyParams {
  std::uint32_t q = 2;
  double p = 2.0;
  bool operator==(const HardyParams&) const = default;
};

// Where a truncated supremum is attained: a vertex for norms taken vertex
// by vertex, or a level for Hardy norms.
using NormWitness = std::variant<Vertex, std::uint64_t>;

struct NormReport {
  struct Partial {
    int depth;
    double value;
  };
  // One entry per depth, nondecreasing: each is a certified lower bound for
  // the true norm.
  std::vector<Partial> partials;
  // Lexicographically least maximizer at the smallest attaining depth (or
  // the smallest maximizing level for Hardy norms).
  NormWitness witness;
  // True when the truncated value provably equals the full supremum: the
  // support is exhausted, the radial tail is reached, or a witness
  // construction certifies it.
  bool attained_exactly = false;

  double value() const { return partials.empty() ? 0.0 : partials.back().value; }
};

// sup over |v| <= depth of |f(v) - f(b(v))|, plus |f(o)|. depth >= 1.
NormReport lipschitz_partial_norm(const TreeFunction& f, const TreeShape& shape,
                                  int depth);

// sup over |v| <= depth of mu(v) |f(v)|. depth >= 0.
NormReport weighted_partial_norm(const TreeFunction& f, const Weight& mu,
                                 const TreeShape& shape, int depth);

// sup over n <= depth of the level means M_p(n, f). depth >= 0.
NormReport hardy_partial_norm(const TreeFunction& f, const HardyParams& par, int depth);

// Level mean M_p(n, f) on the homogeneous tree of degree q+1:
//   M_p(0, f) = |f(o)|,
//   M_p(n, f) = ((1/c_n) sum over |v|=n of |f(v)|^p)^(1/p)
// with c_n the level count. The production entry point short-circuits for
// radial functions (the mean of a constant level is its modulus); the
// enumeration entry point always folds the level pairwise in lexicographic
// order and stays available as the reference route.
double hardy_level_mean(const TreeFunction& f, const HardyParams& par, std::size_t n,
                        kernels::Exec exec = kernels::Exec::Auto);
double hardy_level_mean_by_enumeration(const TreeFunction& f, const HardyParams& par,
                                       std::size_t n,
                                       kernels::Exec exec = kernels::Exec::Auto);

struct PointEvalCheck {
  double observed;      // |f(v)|
  double bound;         // cap implied by the truncated norm
  double slack;         // bound - observed
  bool holds;           // slack >= -1e-12
  bool norm_attained;   // whether the norm behind the bound was exact
};

class SpaceDesc {
public:
  enum class Kind { Lipschitz, Weighted, Hardy };

  static SpaceDesc lipschitz();
  static SpaceDesc weighted(Weight mu);
  static SpaceDesc hardy(HardyParams par);
  // Text forms: "lipschitz", "weighted:expr:pow(2,n)", "weighted:table:1,2",
  // "hardy:q=2,p=2".
  static SpaceDesc parse(std::string_view text, const ParamEnv& env);
  std::string to_string() const;

  Kind kind() const noexcept { return kind_; }
  const Weight& weight() const;
  const HardyParams& hardy_params() const;

  // Hardy norms are pinned to homogeneous:q; the configured shape must
  // match. Other spaces use the configured shape as is.
  TreeShape norm_shape(const TreeShape& configured) const;

  NormReport norm(const TreeFunction& f, const TreeShape& shape, int depth) const;

  // Whether constant functions belong to the space. Exact except for
  // weights whose tail defies analysis, where a probe decides.
  struct ConstantsMembership {
    bool contains;
    bool exact;
    std::string note;
  };
  ConstantsMembership contains_constants() const;

private:
  SpaceDesc() = default;
  Kind kind_ = Kind::Lipschitz;
  std::optional<Weight> weight_;
  HardyParams hardy_{};
};

// Checks the growth cap the truncated norm puts on |f(v)|:
//   Lipschitz:  |f(v)| <= |f(o)| + |v| * sup |f'|
//   weighted:   |f(v)| <= norm / mu(v)
//   Hardy:      |f(v)| <= c_{|v|}^(1/p) * norm
// Requires |v| <= depth so the truncated norm covers the vertex.
PointEvalCheck point_eval_bound_check(const SpaceDesc& space, const TreeFunction& f,
                                      const Vertex& v, const TreeShape& shape, int depth);

}  // namespace treediff
