#include "treediff/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace treediff {

OperatorDescriptor OperatorDescriptor::identity() {
  OperatorDescriptor op;
  op.kind_ = Kind::Identity;
  return op;
}

OperatorDescriptor OperatorDescriptor::differentiation() {
  OperatorDescriptor op;
  op.kind_ = Kind::Differentiation;
  return op;
}

OperatorDescriptor OperatorDescriptor::backward_composition() {
  OperatorDescriptor op;
  op.kind_ = Kind::BackwardComposition;
  return op;
}

OperatorDescriptor OperatorDescriptor::composition(VertexMap phi) {
  if (!phi.map) throw ConfigError("composition operator needs a vertex map");
  OperatorDescriptor op;
  op.kind_ = Kind::Composition;
  op.phi_ = std::move(phi);
  return op;
}

OperatorDescriptor OperatorDescriptor::affine(
    std::vector<std::pair<Cplx, OperatorDescriptor>> terms) {
  OperatorDescriptor op;
  op.kind_ = Kind::Affine;
  for (auto& [c, t] : terms) {
    if (t.kind_ == Kind::Affine) {
      for (auto& [c2, t2] : t.terms_) op.terms_.emplace_back(c * c2, t2);
    } else {
      op.terms_.emplace_back(c, std::move(t));
    }
  }
  return op;
}

OperatorDescriptor OperatorDescriptor::parse(std::string_view text) {
  if (text == "I") return identity();
  if (text == "D") return differentiation();
  if (text == "Cb") return backward_composition();
  throw ConfigError("unknown operator '" + std::string(text) + "' (expected I, D or Cb)");
}

const VertexMap& OperatorDescriptor::phi() const {
  if (kind_ != Kind::Composition)
    throw ConfigError("operator " + to_string() + " has no vertex map");
  return *phi_;
}

const std::vector<std::pair<Cplx, OperatorDescriptor>>& OperatorDescriptor::terms() const {
  if (kind_ != Kind::Affine)
    throw ConfigError("operator " + to_string() + " has no affine terms");
  return terms_;
}

std::string OperatorDescriptor::to_string() const {
  switch (kind_) {
    case Kind::Identity:
      return "I";
    case Kind::Differentiation:
      return "D";
    case Kind::BackwardComposition:
      return "Cb";
    case Kind::Composition:
      return "C_" + phi_->name;
    case Kind::Affine: {
      std::string s;
      for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i) s += " + ";
        char buf[48];
        std::snprintf(buf, sizeof buf, "(%g%+gi)", terms_[i].first.real(),
                      terms_[i].first.imag());
        s += buf;
        s += terms_[i].second.to_string();
      }
      return s.empty() ? "0" : s;
    }
  }
  return {};
}

TreeFunction apply(const OperatorDescriptor& op, const TreeFunction& f,
                   const TreeShape& shape) {
  switch (op.kind()) {
    case OperatorDescriptor::Kind::Identity:
      return f;
    case OperatorDescriptor::Kind::Differentiation:
      return derivative(f, shape);
    case OperatorDescriptor::Kind::BackwardComposition:
      return compose_backward(f, shape);
    case OperatorDescriptor::Kind::Composition:
      return compose(f, op.phi());
    case OperatorDescriptor::Kind::Affine: {
      TreeFunction acc = TreeFunction::zero();
      for (const auto& [c, term] : op.terms())
        acc = linear_combine(1.0, acc, c, apply(term, f, shape));
      return acc;
    }
  }
  return TreeFunction::zero();
}

double lipschitz_shift_bound(const TreeShape& shape, int depth) {
  if (depth < 1) throw ConfigError("shift bound needs depth >= 1");
  double best = 0.0;
  for (int d = 1; d <= depth; ++d) {
    // d(b(v), b(b(v))) only depends on |v|, so the leftmost vertex stands
    // in for its whole level.
    Vertex v = level_vertex(shape, d, 0);
    Vertex p = backward_shift(v);
    double val = static_cast<double>(distance(shape, p, backward_shift(p)));
    best = std::max(best, val);
  }
  return best;
}

NormReport weighted_ratio_sup(const Weight& mu, const TreeShape& shape, int depth,
                              double cap) {
  if (depth < 1) throw ConfigError("ratio sup needs depth >= 1");
  NormReport report;
  double best = -1.0;
  std::size_t best_level = 1;
  for (int n = 1; n <= depth; ++n) {
    double r = mu.at_level(n) / mu.at_level(n - 1);
    if (r > cap)
      throw UnboundedOperatorError(
          "weight ratio " + std::to_string(r) + " exceeds the divergence cap " +
              std::to_string(cap) + " at depth " + std::to_string(n) +
              ": the operator is unbounded on this space",
          n, r);
    if (r > best) {
      best = r;
      best_level = n;
    }
    report.partials.push_back({n, best});
  }
  report.witness = level_vertex(shape, best_level, 0);
  auto geom = mu.tail_geometry();
  report.attained_exactly =
      geom && static_cast<std::uint64_t>(depth) >= std::max<std::uint64_t>(geom->from_level, 1);
  return report;
}

std::uint64_t hardy_preimage_count(std::uint32_t q, std::uint64_t m, std::uint64_t n) {
  if (m == 0 && n == 0) return 1;        // b(o) = o
  if (m == 0 && n == 1) return q + 1;    // the root also absorbs its children
  if (m >= 1 && n == m + 1) return q;    // inner vertices absorb their children
  return 0;
}

double hardy_alpha(std::uint32_t q, std::uint64_t n) {
  TreeShape shape = TreeShape::homogeneous(q);
  std::uint64_t c_n = shape.level_size(n);
  double sum = 0.0;
  for (std::uint64_t m = 0; m <= n; ++m) {
    std::uint64_t count = hardy_preimage_count(q, m, n);
    if (count == 0) continue;
    sum += static_cast<double>(count) * static_cast<double>(shape.level_size(m));
  }
  return sum / static_cast<double>(c_n);
}

double hardy_alpha_sup(std::uint32_t q, std::uint64_t max_n) {
  double best = 0.0;
  for (std::uint64_t n = 0; n <= max_n; ++n) best = std::max(best, hardy_alpha(q, n));
  return best;
}

NormBounds operator_norm_bounds(const SpaceDesc& space, const TreeShape& shape, int depth,
                                double cap) {
  NormBounds out;
  std::vector<std::pair<std::string, TreeFunction>> family;
  switch (space.kind()) {
    case SpaceDesc::Kind::Lipschitz: {
      double cb = lipschitz_shift_bound(shape, std::max(depth, 1));
      out.upper = 1.0 + cb;
      out.source = "upper: 1 + shift displacement bound " + std::to_string(cb);
      family.emplace_back("chi:" + level_vertex(shape, 1, 0).to_string(),
                          TreeFunction::characteristic(level_vertex(shape, 1, 0)));
      break;
    }
    case SpaceDesc::Kind::Weighted: {
      NormReport r = weighted_ratio_sup(space.weight(), shape, std::max(depth, 1), cap);
      out.upper = 1.0 + r.value();
      out.source = std::string("upper: 1 + weight ratio sup (") +
                   (r.attained_exactly ? "exact" : "truncated") + ")";
      family.emplace_back("alt-witness",
                          TreeFunction::alternating_witness(space.weight()));
      break;
    }
    case SpaceDesc::Kind::Hardy: {
      double a = hardy_alpha_sup(space.hardy_params().q,
                                 static_cast<std::uint64_t>(std::max(depth, 1)));
      out.upper = 1.0 + std::pow(a, 1.0 / space.hardy_params().p);
      out.source = "upper: 1 + (level factor sup)^(1/p), sup = " + std::to_string(a);
      family.emplace_back("hardy-witness", TreeFunction::hardy_witness());
      break;
    }
  }
  WitnessResult w = operator_norm_lower_witness(OperatorDescriptor::differentiation(),
                                                family, space, shape, depth);
  out.lower = w.value;
  out.source += "; lower: witnessed by " + family[w.best_index].first +
                (w.certified ? " (certified)" : " (truncated)");
  return out;
}

WitnessResult operator_norm_lower_witness(
    const OperatorDescriptor& op,
    const std::vector<std::pair<std::string, TreeFunction>>& family,
    const SpaceDesc& space, const TreeShape& shape, int depth) {
  if (family.empty()) throw ConfigError("witness family must be non-empty");
  WitnessResult out;
  bool any = false;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& [id, f] = family[i];
    WitnessMember member;
    member.id = id;
    NormReport in = space.norm(f, shape, depth);
    member.input_norm = in.value();
    if (member.input_norm == 0.0) {
      member.rejected = true;
      member.note = "input norm is zero at this depth; ratio undefined";
      out.members.push_back(std::move(member));
      continue;
    }
    NormReport image = space.norm(apply(op, f, shape), shape, depth);
    member.image_norm = image.value();
    member.ratio = member.image_norm / member.input_norm;
    member.certified = in.attained_exactly && image.attained_exactly;
    out.members.push_back(std::move(member));
    const WitnessMember& m = out.members.back();
    if (!any || m.ratio > out.value) {
      any = true;
      out.value = m.ratio;
      out.best_index = i;
      out.certified = m.certified;
    }
  }
  if (!any)
    throw ConfigError("every witness candidate had zero norm; no ratio available");
  return out;
}

EigenClassification eigen_classify(Cplx lambda, const TreeShape& shape, int depth,
                                   bool space_has_constants) {
  if (depth < 1) throw ConfigError("eigen classification needs depth >= 1");
  EigenClassification out;
  out.lambda = lambda;
  using Verdict = EigenClassification::Verdict;
  if (lambda == Cplx(0.0)) {
    // Dg = 0 forces g(v) = g(b(v)) everywhere: exactly the constants.
    out.verdict = space_has_constants ? Verdict::ConstantsOnly : Verdict::OnlyZeroFunction;
    out.rationale = space_has_constants
                        ? "derivative zero forces g constant along every ray, and the "
                          "space contains the constants"
                        : "derivative zero forces g constant, but the space contains "
                          "no nonzero constants";
    Cplx rep = space_has_constants ? Cplx(1.0) : Cplx(0.0);
    for (int d = 0; d <= depth; ++d)
      out.trace.emplace_back(level_vertex(shape, d, 0), rep);
    return out;
  }
  if (lambda == Cplx(1.0)) {
    out.verdict = Verdict::OnlyZeroFunction;
    out.rationale =
        "lambda = 1 forces g(b(w)) = 0 for every w; every vertex is a parent "
        "image, so g vanishes identically";
  } else {
    out.verdict = Verdict::OnlyZeroFunction;
    out.rationale =
        "the root equation gives g(o) = 0 and g(v) = g(b(v)) / (1 - lambda) "
        "propagates zero to every level";
  }
  // The forcing is level-uniform; record one representative per level. At
  // finite depth this is conclusive, not a truncation artifact.
  for (int d = 0; d <= depth; ++d)
    out.trace.emplace_back(level_vertex(shape, d, 0), Cplx(0.0));
  return out;
}

namespace {

// Leftmost vertex with at least two children within the depth, if any.
std::optional<Vertex> first_branching_parent(const TreeShape& shape, int depth) {
  for (int d = 0; d + 1 <= depth; ++d)
    if (shape.branching_at_level(d) >= 2) return level_vertex(shape, d, 0);
  return std::nullopt;
}

}  // namespace

SpectrumReport spectrum_bounds(const SpaceDesc& space, const TreeShape& shape, int depth,
                               double cap) {
  if (depth < 1) throw ConfigError("spectrum bounds need depth >= 1");
  SpectrumReport out;
  double cb = 0.0;
  switch (space.kind()) {
    case SpaceDesc::Kind::Lipschitz: {
      cb = lipschitz_shift_bound(shape, depth);
      out.exact = DiskRegion{Cplx(1.0), 1.0};
      out.notes.push_back(
          "the spectrum on the Lipschitz space equals the closed disk at 1 of "
          "radius 1 (known analytic fact, carried not recomputed)");
      out.point_spectrum_zero = true;
      break;
    }
    case SpaceDesc::Kind::Weighted: {
      NormReport r = weighted_ratio_sup(space.weight(), shape, depth, cap);
      cb = r.value();
      if (!r.attained_exactly)
        out.notes.push_back("composition bound uses the truncated weight ratio sup");
      auto cm = space.contains_constants();
      out.point_spectrum_zero = cm.contains;
      out.point_spectrum_exact = cm.exact;
      out.notes.push_back(cm.note);
      break;
    }
    case SpaceDesc::Kind::Hardy: {
      space.norm_shape(shape);
      double a = hardy_alpha_sup(space.hardy_params().q,
                                 static_cast<std::uint64_t>(depth));
      cb = std::pow(a, 1.0 / space.hardy_params().p);
      out.point_spectrum_zero = true;
      break;
    }
  }
  out.bounding.push_back({Cplx(0.0), 1.0 + cb});  // spectral radius <= ||D||
  out.bounding.push_back({Cplx(1.0), cb});        // D = I - C_b, so sigma(D) sits in 1 - sigma(C_b)
  out.known_members.push_back(Cplx(1.0));
  out.notes.push_back(
      "1 belongs to the spectrum: no function has backward composition equal to "
      "chi_o, because such images take the same value at the root and its children");
  if (auto parent = first_branching_parent(shape, depth)) {
    Vertex w = parent->child(0);
    auto check = constant_on_children_check(TreeFunction::characteristic(w), shape, depth);
    if (check.counterexample) {
      const auto& ce = *check.counterexample;
      out.notes.push_back("differentiation is not compact here: chi_" + w.to_string() +
                          " separates the siblings " + ce.first.to_string() + " and " +
                          ce.second.to_string());
    }
  }
  return out;
}

ConstantOnChildrenResult constant_on_children_check(const TreeFunction& f,
                                                    const TreeShape& shape, int depth) {
  if (depth < 1) throw ConfigError("constant-on-children check needs depth >= 1");
  f.require_valid(shape);
  ConstantOnChildrenResult out;

  auto scan_parent = [&](const Vertex& parent) -> bool {
    std::uint32_t k = shape.branching(parent);
    if (k < 2) return false;
    Vertex first = parent.child(0);
    Cplx v0 = f.evaluate(first);
    for (std::uint32_t i = 1; i < k; ++i) {
      Vertex other = parent.child(i);
      Cplx vi = f.evaluate(other);
      if (std::abs(vi - v0) > 1e-12) {
        out.constant_on_children = false;
        out.counterexample = SiblingMismatch{parent, first, other, v0, vi};
        return true;
      }
    }
    return false;
  };

  if (f.is_radial()) return out;  // siblings share a level, hence a value

  if (f.kind() == TreeFunction::Kind::Sparse) {
    // Only parents of support vertices can expose unequal siblings; all
    // other sibling sets are identically zero. Scanning them in level-lex
    // order still finds the globally first violation.
    std::set<Vertex> parents;
    for (const auto& [v, z] : f.sparse_entries()) {
      if (v.is_root()) continue;
      Vertex parent = backward_shift(v);
      if (parent.length() + 1 <= static_cast<std::size_t>(depth)) parents.insert(parent);
    }
    for (const Vertex& parent : parents)
      if (scan_parent(parent)) return out;
    return out;
  }

  for (int d = 0; d + 1 <= depth; ++d) {
    bool found = false;
    for_each_level_vertex(shape, d, [&](const Vertex& v, std::uint64_t) {
      if (!found && scan_parent(v)) found = true;
    });
    if (found) return out;
  }
  return out;
}

Cplx TruncationMatrix::at(std::size_t row, std::size_t col) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair(row, col),
                             [](const Entry& e, const std::pair<std::size_t, std::size_t>& k) {
                               return std::pair(e.row, e.col) < k;
                             });
  if (it != entries.end() && it->row == row && it->col == col) return it->value;
  return Cplx(0.0);
}

std::vector<Cplx> TruncationMatrix::diagonal() const {
  std::vector<Cplx> out(dim, Cplx(0.0));
  for (const auto& e : entries)
    if (e.row == e.col) out[e.row] = e.value;
  return out;
}

bool TruncationMatrix::lower_triangular() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const Entry& e) { return e.row >= e.col; });
}

std::vector<std::pair<Cplx, std::size_t>> TruncationMatrix::eigenvalues() const {
  std::vector<Cplx> diag = diagonal();
  std::sort(diag.begin(), diag.end(), [](Cplx a, Cplx b) {
    return std::pair(a.real(), a.imag()) < std::pair(b.real(), b.imag());
  });
  std::vector<std::pair<Cplx, std::size_t>> out;
  for (Cplx z : diag) {
    if (!out.empty() && out.back().first == z)
      ++out.back().second;
    else
      out.emplace_back(z, 1);
  }
  return out;
}

namespace {

void add_matrix_terms(const OperatorDescriptor& op, Cplx coeff, const TreeShape& shape,
                      const std::vector<std::uint64_t>& level_offset, int depth,
                      std::size_t col, const Vertex& w,
                      std::map<std::pair<std::size_t, std::size_t>, Cplx>& acc) {
  auto index_of = [&](const Vertex& v) -> std::size_t {
    return static_cast<std::size_t>(level_offset[v.length()] + level_rank(shape, v));
  };
  switch (op.kind()) {
    case OperatorDescriptor::Kind::Identity:
      acc[{col, col}] += coeff;
      return;
    case OperatorDescriptor::Kind::Differentiation:
      add_matrix_terms(OperatorDescriptor::identity(), coeff, shape, level_offset, depth,
                       col, w, acc);
      add_matrix_terms(OperatorDescriptor::backward_composition(), -coeff, shape,
                       level_offset, depth, col, w, acc);
      return;
    case OperatorDescriptor::Kind::BackwardComposition:
      // C_b chi_w = sum of chi over the b-preimage of w: its children, and
      // w itself when w is the root.
      if (w.is_root()) acc[{col, col}] += coeff;
      if (w.length() + 1 <= static_cast<std::size_t>(depth))
        for (const Vertex& u : children(shape, w)) acc[{index_of(u), col}] += coeff;
      return;
    case OperatorDescriptor::Kind::Composition:
      throw ConfigError(
          "truncation matrices cover I, D, Cb and their affine combinations only");
    case OperatorDescriptor::Kind::Affine:
      for (const auto& [c, term] : op.terms())
        add_matrix_terms(term, coeff * c, shape, level_offset, depth, col, w, acc);
      return;
  }
}

}  // namespace

TruncationMatrix truncation_matrix(const OperatorDescriptor& op, const TreeShape& shape,
                                   int depth, std::size_t dim_cap) {
  if (depth < 0) throw ConfigError("truncation depth must be >= 0");
  std::vector<std::uint64_t> level_offset(depth + 2, 0);
  for (int d = 0; d <= depth; ++d) {
    std::uint64_t size = shape.level_size(d);
    std::uint64_t next;
    if (__builtin_add_overflow(level_offset[d], size, &next))
      throw RangeError("truncation dimension overflows 64 bits");
    level_offset[d + 1] = next;
  }
  std::uint64_t dim = level_offset[depth + 1];
  if (dim > dim_cap)
    throw RangeError("truncation dimension " + std::to_string(dim) +
                     " exceeds the cap " + std::to_string(dim_cap) +
                     "; lower the depth or raise the cap");

  TruncationMatrix out;
  out.dim = static_cast<std::size_t>(dim);
  out.basis.reserve(out.dim);
  for (int d = 0; d <= depth; ++d)
    for_each_level_vertex(shape, d,
                          [&](const Vertex& v, std::uint64_t) { out.basis.push_back(v); });

  std::map<std::pair<std::size_t, std::size_t>, Cplx> acc;
  for (std::size_t col = 0; col < out.dim; ++col)
    add_matrix_terms(op, Cplx(1.0), shape, level_offset, depth, col, out.basis[col], acc);

  out.entries.reserve(acc.size());
  for (const auto& [rc, value] : acc)
    if (value != Cplx(0.0)) out.entries.push_back({rc.first, rc.second, value});
  return out;
}

}  // namespace treediff
