#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treediff/spaces.hpp"

namespace treediff {

// Symbolic operator built from the identity, the differentiation D, the
// backward composition C_b, generic compositions, and affine combinations.
// D is definitionally I - C_b; both views are available.
class OperatorDescriptor {
public:
  enum class Kind { Identity, Differentiation, BackwardComposition, Composition, Affine };

  static OperatorDescriptor identity();
  static OperatorDescriptor differentiation();
  static OperatorDescriptor backward_composition();
  static OperatorDescriptor composition(VertexMap phi);
  // Flattens nested affine terms into one list.
  static OperatorDescriptor affine(std::vector<std::pair<Cplx, OperatorDescriptor>> terms);
  // Text forms: "I", "D", "Cb".
  static OperatorDescriptor parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const VertexMap& phi() const;
  const std::vector<std::pair<Cplx, OperatorDescriptor>>& terms() const;
  std::string to_string() const;

private:
  OperatorDescriptor() = default;
  Kind kind_ = Kind::Identity;
  std::optional<VertexMap> phi_;
  std::vector<std::pair<Cplx, OperatorDescriptor>> terms_;
};

TreeFunction apply(const OperatorDescriptor& op, const TreeFunction& f,
                   const TreeShape& shape);

// max over 1 <= |v| <= depth of d(b(v), b(b(v))). The value at each level
// is shared by all its vertices (parent and grandparent sit at fixed
// levels), so one representative per level is evaluated. 0 at depth 1, 1
// from depth 2 on, for every shape.
double lipschitz_shift_bound(const TreeShape& shape, int depth);

// sup over 1 <= n <= depth of mu(n)/mu(n-1), reported like a norm: partial
// sups per depth, the first maximizing level as witness, exactness from
// tail geometry. A ratio above `cap` raises UnboundedOperatorError, the
// divergence signal.
NormReport weighted_ratio_sup(const Weight& mu, const TreeShape& shape, int depth,
                              double cap = 1e6);

// Hardy backward-composition level factor alpha_n and its running sup.
// alpha_n = (1/c_n) sum over m of N_{m,n} c_m, where N_{m,n} counts the
// largest b-preimage a level-m vertex has inside level n; identically 1 on
// homogeneous trees.
double hardy_alpha(std::uint32_t q, std::uint64_t n);
double hardy_alpha_sup(std::uint32_t q, std::uint64_t max_n);
// The count N_{m,n} in closed form (1, q+1, or q; 0 off the band).
std::uint64_t hardy_preimage_count(std::uint32_t q, std::uint64_t m, std::uint64_t n);

struct NormBounds {
  double lower = 0.0;  // certified by a concrete function pair
  double upper = 0.0;  // from the triangle inequality through C_b
  std::string source;
};

// Bounds for the operator norm of D on the given space:
//   upper = 1 + bound for ||C_b||, lower always 0 without witnesses.
NormBounds operator_norm_bounds(const SpaceDesc& space, const TreeShape& shape,
                                int depth, double cap = 1e6);

struct WitnessMember {
  std::string id;
  double input_norm = 0.0;
  double image_norm = 0.0;
  double ratio = 0.0;
  bool certified = false;   // both norms were attained exactly
  bool rejected = false;    // zero input norm: ratio undefined
  std::string note;
};

struct WitnessResult {
  double value = 0.0;       // best ratio: a certified-or-partial lower bound
  std::size_t best_index = 0;
  bool certified = false;
  std::vector<WitnessMember> members;
};

// Largest ratio ||op f|| / ||f|| over a finite family of candidate inputs.
WitnessResult operator_norm_lower_witness(
    const OperatorDescriptor& op,
    const std::vector<std::pair<std::string, TreeFunction>>& family,
    const SpaceDesc& space, const TreeShape& shape, int depth);

struct EigenClassification {
  Cplx lambda;
  enum class Verdict { OnlyZeroFunction, ConstantsOnly } verdict;
  // Forced values along representative vertices (leftmost per level). The
  // eigen equation propagates exactly, so the verdict at finite depth is
  // conclusive, not heuristic.
  std::vector<std::pair<Vertex, Cplx>> trace;
  std::string rationale;
};

// Solves lambda g = g - g∘b by forced propagation from the root:
//   lambda = 0: eigenfunctions are the constants (when the space has them)
//   lambda = 1: g(b(w)) = 0 for every w, so g = 0
//   otherwise:  g(o) = 0 and g(v) = g(b(v)) / (1 - lambda), so g = 0
EigenClassification eigen_classify(Cplx lambda, const TreeShape& shape, int depth,
                                   bool space_has_constants);

struct DiskRegion {
  Cplx center;
  double radius = 0.0;
  bool contains(Cplx z, double tol = 1e-12) const {
    return std::abs(z - center) <= radius + tol;
  }
};

struct SpectrumReport {
  // The spectrum sits inside every listed disk.
  std::vector<DiskRegion> bounding;
  // Exact description when available (the closed disk at 1 of radius 1 for
  // the Lipschitz space); carried as a known analytic fact, not recomputed.
  std::optional<DiskRegion> exact;
  std::vector<Cplx> known_members;  // 1 whenever C_b misses a characteristic function
  bool point_spectrum_zero = false; // sigma_p = {0} vs empty
  bool point_spectrum_exact = true; // false when a weight probe decided
  std::vector<std::string> notes;
};

SpectrumReport spectrum_bounds(const SpaceDesc& space, const TreeShape& shape, int depth,
                               double cap = 1e6);

struct SiblingMismatch {
  Vertex parent;
  Vertex first;
  Vertex second;
  Cplx first_value;
  Cplx second_value;
};

struct ConstantOnChildrenResult {
  bool constant_on_children = true;
  std::optional<SiblingMismatch> counterexample;  // first violating pair
};

// Scans parents up to depth-1 in level-lex order for sibling values that
// differ by more than 1e-12.
ConstantOnChildrenResult constant_on_children_check(const TreeFunction& f,
                                                    const TreeShape& shape, int depth);

struct TruncationMatrix {
  struct Entry {
    std::size_t row, col;
    Cplx value;
  };

  std::vector<Vertex> basis;   // levels 0..depth, level-lex order
  std::size_t dim = 0;
  std::vector<Entry> entries;  // sorted by (row, col), exact zeros dropped

  Cplx at(std::size_t row, std::size_t col) const;
  std::vector<Cplx> diagonal() const;
  bool lower_triangular() const;
  // Diagonal values grouped with multiplicities; the matrix is lower
  // triangular in the level-lex basis, so these are the eigenvalues.
  std::vector<std::pair<Cplx, std::size_t>> eigenvalues() const;
};

// Matrix of op on span{chi_v : |v| <= depth}: entry (i, j) is the
// coefficient of chi_{basis_i} in op(chi_{basis_j}). Characteristic
// functions map to equal-or-deeper levels, so the matrix is lower
// triangular. Throws RangeError when the dimension exceeds dim_cap.
TruncationMatrix truncation_matrix(const OperatorDescriptor& op, const TreeShape& shape,
                                   int depth, std::size_t dim_cap = 20000);

}  // namespace treediff
