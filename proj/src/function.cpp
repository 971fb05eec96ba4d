#include "treediff/function.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace treediff {

TreeFunction TreeFunction::sparse(std::map<Vertex, Cplx> entries) {
  TreeFunction f;
  f.kind_ = Kind::Sparse;
  for (auto it = entries.begin(); it != entries.end();) {
    if (!finite(it->second))
      throw EvalError("sparse entry at " + it->first.to_string() + " is not finite");
    if (it->second == Cplx(0.0))
      it = entries.erase(it);
    else
      ++it;
  }
  f.entries_ = std::move(entries);
  f.description_ = "sparse(" + std::to_string(f.entries_.size()) + " entries)";
  return f;
}

TreeFunction TreeFunction::radial(std::vector<Cplx> values, Cplx tail) {
  TreeFunction f;
  f.kind_ = Kind::Radial;
  if (!finite(tail)) throw EvalError("radial tail is not finite");
  for (Cplx v : values)
    if (!finite(v)) throw EvalError("radial value is not finite");
  while (!values.empty() && values.back() == tail) values.pop_back();
  f.values_ = std::move(values);
  f.tail_ = tail;
  f.description_ = "radial(" + std::to_string(f.values_.size()) + " levels)";
  return f;
}

TreeFunction TreeFunction::rule(RuleFn fn, std::string description, bool radial_values) {
  TreeFunction f;
  f.kind_ = Kind::Rule;
  f.fn_ = std::move(fn);
  f.rule_radial_ = radial_values;
  f.description_ = std::move(description);
  return f;
}

TreeFunction TreeFunction::from_expr(Expr::Ptr expr, ParamEnv env, std::string text) {
  auto fn = [expr, env = std::move(env)](const Vertex& v) -> Cplx {
    return eval_radial(*expr, v.length(), env);
  };
  return rule(std::move(fn), std::move(text), true);
}

TreeFunction TreeFunction::with_tag(TreeFunction f, RuleTag tag,
                                    std::shared_ptr<const Weight> weight) {
  if (f.kind_ != Kind::Rule) throw ConfigError("only rule functions carry tags");
  f.tag_ = tag;
  f.weight_ = std::move(weight);
  return f;
}

TreeFunction TreeFunction::alternating_witness(const Weight& mu) {
  auto shared = std::make_shared<const Weight>(mu);
  auto fn = [shared](const Vertex& v) -> Cplx {
    double sign = v.length() % 2 == 0 ? 1.0 : -1.0;
    return sign / shared->at_level(v.length());
  };
  TreeFunction f = rule(std::move(fn), "alt-witness(" + mu.to_string() + ")", true);
  f.tag_ = RuleTag::AltWitness;
  f.weight_ = std::move(shared);
  return f;
}

Cplx TreeFunction::evaluate(const Vertex& v) const {
  switch (kind_) {
    case Kind::Sparse: {
      auto it = entries_.find(v);
      return it == entries_.end() ? Cplx(0.0) : it->second;
    }
    case Kind::Radial:
      return v.length() < values_.size() ? values_[v.length()] : tail_;
    case Kind::Rule: {
      Cplx z;
      try {
        z = fn_(v);
      } catch (const std::exception& e) {
        throw EvalError("rule '" + description_ + "' failed at " + v.to_string() + ": " +
                        e.what());
      }
      if (!finite(z))
        throw EvalError("rule '" + description_ + "' produced a non-finite value at " +
                        v.to_string());
      return z;
    }
  }
  return 0.0;
}

Cplx TreeFunction::value_at_level(std::uint64_t n) const {
  if (kind_ == Kind::Radial)
    return n < values_.size() ? values_[n] : tail_;
  if (kind_ == Kind::Rule && rule_radial_) {
    // Any representative of the level works; the leftmost path is cheap.
    return evaluate(Vertex(std::vector<std::uint32_t>(n, 0u)));
  }
  throw ConfigError("value_at_level needs a radial function (got " + description_ + ")");
}

const std::map<Vertex, Cplx>& TreeFunction::sparse_entries() const {
  if (kind_ != Kind::Sparse)
    throw ConfigError("sparse_entries on a non-sparse function");
  return entries_;
}

const std::vector<Cplx>& TreeFunction::radial_values() const {
  if (kind_ != Kind::Radial)
    throw ConfigError("radial_values on a non-radial representation");
  return values_;
}

Cplx TreeFunction::radial_tail() const {
  if (kind_ != Kind::Radial)
    throw ConfigError("radial_tail on a non-radial representation");
  return tail_;
}

std::optional<std::uint64_t> TreeFunction::explicit_depth() const {
  switch (kind_) {
    case Kind::Sparse:
      return entries_.empty() ? 0 : entries_.rbegin()->first.length();
    case Kind::Radial:
      return values_.size();
    case Kind::Rule:
      return std::nullopt;
  }
  return std::nullopt;
}

void TreeFunction::require_valid(const TreeShape& shape) const {
  if (kind_ == Kind::Sparse)
    for (const auto& [v, z] : entries_) shape.require_valid(v);
}

TreeFunction derivative(const TreeFunction& f, const TreeShape& shape) {
  f.require_valid(shape);
  switch (f.kind()) {
    case TreeFunction::Kind::Sparse: {
      std::map<Vertex, Cplx> out;
      for (const auto& [w, c] : f.sparse_entries()) {
        if (!w.is_root()) out[w] += c;  // the root derivative is always 0
        for (const Vertex& u : children(shape, w)) out[u] -= c;
      }
      return TreeFunction::sparse(std::move(out));
    }
    case TreeFunction::Kind::Radial: {
      const auto& vals = f.radial_values();
      Cplx tail = f.radial_tail();
      std::vector<Cplx> out(vals.size() + 1, Cplx(0.0));
      for (std::size_t n = 0; n < out.size(); ++n) {
        if (n == 0) continue;
        Cplx here = n < vals.size() ? vals[n] : tail;
        Cplx up = n - 1 < vals.size() ? vals[n - 1] : tail;
        out[n] = here - up;
      }
      return TreeFunction::radial(std::move(out), 0.0);
    }
    case TreeFunction::Kind::Rule: {
      TreeFunction copy = f;
      auto fn = [copy](const Vertex& v) -> Cplx {
        return copy.evaluate(v) - copy.evaluate(backward_shift(v));
      };
      TreeFunction out =
          TreeFunction::rule(std::move(fn), "D(" + f.description() + ")", f.is_radial());
      if (f.rule_tag() == TreeFunction::RuleTag::AltWitness)
        out = TreeFunction::with_tag(std::move(out),
                                     TreeFunction::RuleTag::AltWitnessDerivative,
                                     f.tagged_weight());
      return out;
    }
  }
  return TreeFunction::zero();
}

TreeFunction compose_backward(const TreeFunction& f, const TreeShape& shape) {
  f.require_valid(shape);
  switch (f.kind()) {
    case TreeFunction::Kind::Sparse: {
      std::map<Vertex, Cplx> out;
      for (const auto& [w, c] : f.sparse_entries()) {
        // Preimages of w under b: its children, plus the root when w is o.
        if (w.is_root()) out[w] += c;
        for (const Vertex& u : children(shape, w)) out[u] += c;
      }
      return TreeFunction::sparse(std::move(out));
    }
    case TreeFunction::Kind::Radial: {
      const auto& vals = f.radial_values();
      Cplx tail = f.radial_tail();
      std::vector<Cplx> out(vals.size() + 1, Cplx(0.0));
      for (std::size_t n = 0; n < out.size(); ++n) {
        std::size_t up = n == 0 ? 0 : n - 1;
        out[n] = up < vals.size() ? vals[up] : tail;
      }
      return TreeFunction::radial(std::move(out), tail);
    }
    case TreeFunction::Kind::Rule: {
      TreeFunction copy = f;
      auto fn = [copy](const Vertex& v) -> Cplx {
        return copy.evaluate(backward_shift(v));
      };
      return TreeFunction::rule(std::move(fn), "Cb(" + f.description() + ")",
                                f.is_radial());
    }
  }
  return TreeFunction::zero();
}

TreeFunction compose(const TreeFunction& f, const VertexMap& phi) {
  TreeFunction copy = f;
  auto map = phi.map;
  auto fn = [copy, map](const Vertex& v) -> Cplx { return copy.evaluate(map(v)); };
  return TreeFunction::rule(std::move(fn),
                            "C_" + phi.name + "(" + f.description() + ")", false);
}

TreeFunction scale(Cplx a, const TreeFunction& f) {
  if (a == Cplx(1.0)) return f;
  switch (f.kind()) {
    case TreeFunction::Kind::Sparse: {
      std::map<Vertex, Cplx> out;
      if (a != Cplx(0.0))
        for (const auto& [v, c] : f.sparse_entries()) out[v] = a * c;
      return TreeFunction::sparse(std::move(out));
    }
    case TreeFunction::Kind::Radial: {
      std::vector<Cplx> vals = f.radial_values();
      for (Cplx& v : vals) v *= a;
      return TreeFunction::radial(std::move(vals), a * f.radial_tail());
    }
    case TreeFunction::Kind::Rule: {
      if (a == Cplx(0.0)) return TreeFunction::zero();
      TreeFunction copy = f;
      auto fn = [a, copy](const Vertex& v) -> Cplx { return a * copy.evaluate(v); };
      char buf[64];
      std::snprintf(buf, sizeof buf, "(%g%+gi)*", a.real(), a.imag());
      return TreeFunction::rule(std::move(fn), buf + f.description(), f.is_radial());
    }
  }
  return TreeFunction::zero();
}

TreeFunction linear_combine(Cplx a, const TreeFunction& f, Cplx b, const TreeFunction& g) {
  if (b == Cplx(0.0)) return scale(a, f);
  if (a == Cplx(0.0)) return scale(b, g);
  using Kind = TreeFunction::Kind;
  if (f.kind() == Kind::Sparse && g.kind() == Kind::Sparse) {
    std::map<Vertex, Cplx> out;
    for (const auto& [v, c] : f.sparse_entries()) out[v] += a * c;
    for (const auto& [v, c] : g.sparse_entries()) out[v] += b * c;
    return TreeFunction::sparse(std::move(out));
  }
  if (f.kind() == Kind::Radial && g.kind() == Kind::Radial) {
    std::size_t len = std::max(f.radial_values().size(), g.radial_values().size());
    std::vector<Cplx> out(len);
    for (std::size_t n = 0; n < len; ++n)
      out[n] = a * f.value_at_level(n) + b * g.value_at_level(n);
    return TreeFunction::radial(std::move(out), a * f.radial_tail() + b * g.radial_tail());
  }
  TreeFunction fc = f, gc = g;
  auto fn = [a, fc, b, gc](const Vertex& v) -> Cplx {
    return a * fc.evaluate(v) + b * gc.evaluate(v);
  };
  return TreeFunction::rule(std::move(fn),
                            "combine(" + f.description() + "," + g.description() + ")",
                            f.is_radial() && g.is_radial());
}

}  // namespace treediff
