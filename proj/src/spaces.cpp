#include "treediff/spaces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace treediff {

namespace {

struct LevelMax {
  double value;
  std::uint64_t rank;
};

// Largest |f| over one level with the rank of its first attaining vertex.
LevelMax level_abs_max(const TreeFunction& f, const TreeShape& shape, std::size_t n,
                       kernels::Exec exec) {
  if (f.kind() == TreeFunction::Kind::Sparse) {
    // Zero is always a candidate unless the support covers the level, and
    // when it does every support value beats it anyway.
    LevelMax best{0.0, 0};
    for (const auto& [v, z] : f.sparse_entries()) {
      if (v.length() != n) continue;
      double m = std::abs(z);
      if (m > best.value) best = {m, level_rank(shape, v)};
    }
    return best;
  }
  if (f.is_radial()) return {std::abs(f.value_at_level(n)), 0};
  auto res = kernels::level_max(
      shape, n, [&](const Vertex& v, std::uint64_t) { return std::abs(f.evaluate(v)); },
      exec);
  return {res.value, res.rank};
}

// Truncation exactness of sup over levels of mu(n)*|f(n)| style norms, per
// representation. For radial functions with a nonzero tail the weight's
// tail geometry decides: a ratio <= 1 makes tail terms nonincreasing, so
// the first of them already witnesses their sup.
bool sup_attained(const TreeFunction& f, const Weight* mu, int depth) {
  switch (f.kind()) {
    case TreeFunction::Kind::Sparse:
      return static_cast<std::uint64_t>(depth) >= *f.explicit_depth();
    case TreeFunction::Kind::Radial: {
      std::uint64_t len = *f.explicit_depth();
      if (f.radial_tail() == Cplx(0.0)) return static_cast<std::uint64_t>(depth) >= len;
      if (!mu) return false;
      auto geom = mu->tail_geometry();
      if (!geom || geom->ratio > 1.0) return false;
      return static_cast<std::uint64_t>(depth) >= std::max(len, geom->from_level);
    }
    case TreeFunction::Kind::Rule:
      return false;
  }
  return false;
}

void require_depth_at_least(int depth, int min, const char* what) {
  if (depth < min)
    throw ConfigError(std::string(what) + " needs depth >= " + std::to_string(min) +
                      " (got " + std::to_string(depth) + ")");
}

}  // namespace

NormReport lipschitz_partial_norm(const TreeFunction& f, const TreeShape& shape,
                                  int depth) {
  require_depth_at_least(depth, 1, "Lipschitz norm");
  f.require_valid(shape);
  TreeFunction df = derivative(f, shape);
  double base = std::abs(f.evaluate(Vertex::root()));

  NormReport report;
  double best = -1.0;
  std::size_t best_level = 1;
  std::uint64_t best_rank = 0;
  for (int d = 1; d <= depth; ++d) {
    LevelMax m = level_abs_max(df, shape, d, kernels::Exec::Auto);
    if (m.value > best) {
      best = m.value;
      best_level = d;
      best_rank = m.rank;
    }
    report.partials.push_back({d, base + best});
  }
  report.witness = level_vertex(shape, best_level, best_rank);
  // The derivative kills radial tails, so a radial df certifies itself; a
  // sparse df certifies once its support is exhausted.
  report.attained_exactly = sup_attained(df, nullptr, depth);
  return report;
}

NormReport weighted_partial_norm(const TreeFunction& f, const Weight& mu,
                                 const TreeShape& shape, int depth) {
  require_depth_at_least(depth, 0, "weighted norm");
  f.require_valid(shape);

  NormReport report;
  double best = -1.0;
  std::size_t best_level = 0;
  std::uint64_t best_rank = 0;
  for (int d = 0; d <= depth; ++d) {
    double w = mu.at_level(d);
    LevelMax m = level_abs_max(f, shape, d, kernels::Exec::Auto);
    double term = w * m.value;
    if (term > best) {
      best = term;
      best_level = d;
      best_rank = m.rank;
    }
    report.partials.push_back({d, best});
  }
  report.witness = level_vertex(shape, best_level, best_rank);

  using Tag = TreeFunction::RuleTag;
  if (f.rule_tag() == Tag::AltWitness && f.tagged_weight() &&
      mu.same_as(*f.tagged_weight())) {
    // mu(v) * |(-1)^|v| / mu(v)| is identically 1: every level attains.
    report.attained_exactly = true;
  } else if (f.rule_tag() == Tag::AltWitnessDerivative && f.tagged_weight() &&
             mu.same_as(*f.tagged_weight())) {
    // Level terms are 1 + mu(n)/mu(n-1); with tail geometry from level F
    // every distinct term has appeared once depth reaches F.
    auto geom = mu.tail_geometry();
    report.attained_exactly =
        geom && static_cast<std::uint64_t>(depth) >= std::max<std::uint64_t>(
                                                         geom->from_level, 1);
  } else {
    report.attained_exactly = sup_attained(f, &mu, depth);
  }
  return report;
}

double hardy_level_mean(const TreeFunction& f, const HardyParams& par, std::size_t n,
                        kernels::Exec exec) {
  if (!(par.p >= 1.0)) throw ConfigError("Hardy exponent p must be at least 1");
  if (n == 0) return std::abs(f.evaluate(Vertex::root()));
  // A radial function is constant on the level, and the p-mean of a
  // constant is its modulus.
  if (f.is_radial()) return std::abs(f.value_at_level(n));
  return hardy_level_mean_by_enumeration(f, par, n, exec);
}

double hardy_level_mean_by_enumeration(const TreeFunction& f, const HardyParams& par,
                                       std::size_t n, kernels::Exec exec) {
  if (!(par.p >= 1.0)) throw ConfigError("Hardy exponent p must be at least 1");
  TreeShape shape = TreeShape::homogeneous(par.q);
  f.require_valid(shape);
  if (n == 0) return std::abs(f.evaluate(Vertex::root()));
  std::uint64_t c_n = shape.level_size(n);
  double sum;
  if (f.kind() == TreeFunction::Kind::Sparse) {
    // Only support vertices contribute; skipping the zero terms reproduces
    // the dense pairwise tree bit for bit.
    std::vector<std::pair<std::uint64_t, double>> entries;
    for (const auto& [v, z] : f.sparse_entries())
      if (v.length() == n)
        entries.emplace_back(level_rank(shape, v), std::pow(std::abs(z), par.p));
    sum = kernels::sparse_level_sum(c_n, entries);
  } else {
    sum = kernels::level_sum(
        shape, n,
        [&](const Vertex& v, std::uint64_t) { return std::pow(std::abs(f.evaluate(v)), par.p); },
        exec);
  }
  return std::pow(sum / static_cast<double>(c_n), 1.0 / par.p);
}

NormReport hardy_partial_norm(const TreeFunction& f, const HardyParams& par, int depth) {
  require_depth_at_least(depth, 0, "Hardy norm");
  NormReport report;
  double best = -1.0;
  std::uint64_t best_level = 0;
  for (int n = 0; n <= depth; ++n) {
    double m = hardy_level_mean(f, par, n);
    if (m > best) {
      best = m;
      best_level = n;
    }
    report.partials.push_back({n, best});
  }
  report.witness = best_level;
  // Beyond the explicit depth every level mean repeats the tail modulus
  // (radial) or vanishes (sparse), so the sup is already on the table.
  auto ed = f.explicit_depth();
  report.attained_exactly = ed && static_cast<std::uint64_t>(depth) >= *ed;
  return report;
}

SpaceDesc SpaceDesc::lipschitz() {
  SpaceDesc s;
  s.kind_ = Kind::Lipschitz;
  return s;
}

SpaceDesc SpaceDesc::weighted(Weight mu) {
  SpaceDesc s;
  s.kind_ = Kind::Weighted;
  s.weight_ = std::move(mu);
  return s;
}

SpaceDesc SpaceDesc::hardy(HardyParams par) {
  if (par.q == 0) throw ConfigError("Hardy space needs q >= 1");
  if (!(par.p >= 1.0)) throw ConfigError("Hardy exponent p must be at least 1");
  SpaceDesc s;
  s.kind_ = Kind::Hardy;
  s.hardy_ = par;
  return s;
}

SpaceDesc SpaceDesc::parse(std::string_view text, const ParamEnv& env) {
  if (text == "lipschitz") return lipschitz();
  if (text.starts_with("weighted:")) return weighted(Weight::parse(text.substr(9), env));
  if (text.starts_with("hardy:")) {
    std::string_view body = text.substr(6);
    HardyParams par;
    bool saw_q = false, saw_p = false;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      std::size_t comma = body.find(',', pos);
      std::string_view item = body.substr(pos, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - pos);
      auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("Hardy parameter must look like q=2 or p=2", 6 + pos);
      std::string_view key = item.substr(0, eq);
      std::string_view val = item.substr(eq + 1);
      if (key == "q") {
        auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), par.q);
        if (ec != std::errc() || ptr != val.data() + val.size())
          throw ParseError("bad Hardy q '" + std::string(val) + "'", 6 + pos + eq + 1);
        saw_q = true;
      } else if (key == "p") {
        auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), par.p);
        if (ec != std::errc() || ptr != val.data() + val.size())
          throw ParseError("bad Hardy p '" + std::string(val) + "'", 6 + pos + eq + 1);
        saw_p = true;
      } else {
        throw ParseError("unknown Hardy parameter '" + std::string(key) + "'", 6 + pos);
      }
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!saw_q || !saw_p) throw ConfigError("Hardy space needs both q= and p=");
    return hardy(par);
  }
  throw ConfigError("unknown space '" + std::string(text) +
                    "' (expected lipschitz, weighted:..., or hardy:q=..,p=..)");
}

std::string SpaceDesc::to_string() const {
  switch (kind_) {
    case Kind::Lipschitz:
      return "lipschitz";
    case Kind::Weighted:
      return "weighted:" + weight_->to_string();
    case Kind::Hardy: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "hardy:q=%u,p=%g", hardy_.q, hardy_.p);
      return buf;
    }
  }
  return {};
}

const Weight& SpaceDesc::weight() const {
  if (kind_ != Kind::Weighted) throw ConfigError("space " + to_string() + " has no weight");
  return *weight_;
}

const HardyParams& SpaceDesc::hardy_params() const {
  if (kind_ != Kind::Hardy)
    throw ConfigError("space " + to_string() + " has no Hardy parameters");
  return hardy_;
}

TreeShape SpaceDesc::norm_shape(const TreeShape& configured) const {
  if (kind_ != Kind::Hardy) return configured;
  TreeShape required = TreeShape::homogeneous(hardy_.q);
  if (!(configured == required))
    throw ConfigError("space " + to_string() + " lives on " + required.to_string() +
                      ", not " + configured.to_string());
  return required;
}

NormReport SpaceDesc::norm(const TreeFunction& f, const TreeShape& shape,
                           int depth) const {
  switch (kind_) {
    case Kind::Lipschitz:
      return lipschitz_partial_norm(f, shape, depth);
    case Kind::Weighted:
      return weighted_partial_norm(f, *weight_, shape, depth);
    case Kind::Hardy:
      norm_shape(shape);
      return hardy_partial_norm(f, hardy_, depth);
  }
  return {};
}

SpaceDesc::ConstantsMembership SpaceDesc::contains_constants() const {
  switch (kind_) {
    case Kind::Lipschitz:
      return {true, true, "constants have zero derivative"};
    case Kind::Weighted: {
      auto b = weight_->boundedness();
      return {b.bounded, b.exact,
              "constants lie in the space iff the weight stays bounded; " + b.note};
    }
    case Kind::Hardy:
      return {true, true, "every level mean of a constant is its modulus"};
  }
  return {true, true, ""};
}

PointEvalCheck point_eval_bound_check(const SpaceDesc& space, const TreeFunction& f,
                                      const Vertex& v, const TreeShape& shape,
                                      int depth) {
  if (v.length() > static_cast<std::size_t>(std::max(depth, 0)))
    throw ConfigError("point bound at " + v.to_string() +
                      " needs depth >= " + std::to_string(v.length()));
  shape.require_valid(v);
  double observed = std::abs(f.evaluate(v));
  double bound = 0.0;
  bool attained = false;
  switch (space.kind()) {
    case SpaceDesc::Kind::Lipschitz: {
      // |f(v)| <= |f(o)| + |v| sup|f'|: telescope f along the ray to v.
      f.require_valid(shape);
      TreeFunction df = derivative(f, shape);
      double base = std::abs(f.evaluate(Vertex::root()));
      double sup = 0.0;
      for (int d = 1; d <= std::max(depth, 1); ++d)
        sup = std::max(sup, level_abs_max(df, shape, d, kernels::Exec::Auto).value);
      bound = base + static_cast<double>(v.length()) * sup;
      attained = sup_attained(df, nullptr, std::max(depth, 1));
      break;
    }
    case SpaceDesc::Kind::Weighted: {
      NormReport r = weighted_partial_norm(f, space.weight(), shape, depth);
      bound = r.value() / space.weight().at(v);
      attained = r.attained_exactly;
      break;
    }
    case SpaceDesc::Kind::Hardy: {
      space.norm_shape(shape);
      NormReport r = hardy_partial_norm(f, space.hardy_params(), depth);
      double c = static_cast<double>(shape.level_size(v.length()));
      bound = std::pow(c, 1.0 / space.hardy_params().p) * r.value();
      attained = r.attained_exactly;
      break;
    }
  }
  double slack = bound - observed;
  return {observed, bound, slack, slack >= -1e-12, attained};
}

}  // namespace treediff
