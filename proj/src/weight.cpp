#include "treediff/weight.hpp"

#include <charconv>
#include <cmath>

namespace treediff {

namespace {

// Syntactic tail analysis. Recognized forms, with c and k level-free:
//   level-free expression        -> ratio 1 from level 1
//   pow(c, n), c^n               -> ratio c from level 1
//   k * g, g * k, g / k          -> ratio of g
//   k / g                        -> inverse ratio of g
// Everything else reports no geometry and downstream code treats the tail
// as unknown.
std::optional<Weight::TailGeometry> analyze(const Expr& e, const ParamEnv& env) {
  if (is_level_free(e)) return Weight::TailGeometry{1.0, 1};
  auto geometric_base = [&](const Expr& base, const Expr& exponent)
      -> std::optional<double> {
    if (!is_level_free(base)) return std::nullopt;
    if (!std::holds_alternative<Expr::LevelVar>(exponent.node())) return std::nullopt;
    double c = eval_radial(base, 0, env);
    if (!(c > 0)) return std::nullopt;
    return c;
  };
  if (const auto* call = std::get_if<Expr::Call>(&e.node())) {
    if (call->fn == Expr::Builtin::Pow)
      if (auto c = geometric_base(*call->a, *call->b))
        return Weight::TailGeometry{*c, 1};
    return std::nullopt;
  }
  if (const auto* bin = std::get_if<Expr::Binary>(&e.node())) {
    if (bin->op == Expr::BinOp::Pow)
      if (auto c = geometric_base(*bin->lhs, *bin->rhs))
        return Weight::TailGeometry{*c, 1};
    if (bin->op == Expr::BinOp::Mul || bin->op == Expr::BinOp::Div) {
      bool lfree = is_level_free(*bin->lhs);
      bool rfree = is_level_free(*bin->rhs);
      if (lfree && !rfree) {
        auto g = analyze(*bin->rhs, env);
        if (g && bin->op == Expr::BinOp::Div)
          return g->ratio != 0 ? std::optional(Weight::TailGeometry{1.0 / g->ratio, g->from_level})
                               : std::nullopt;
        return g;
      }
      if (rfree && !lfree)
        return analyze(*bin->lhs, env);
    }
  }
  return std::nullopt;
}

}  // namespace

Weight Weight::from_table(std::vector<double> values) {
  if (values.empty()) throw ConfigError("weight table must be non-empty");
  for (double v : values)
    if (!std::isfinite(v) || !(v > 0))
      throw WeightDomainError("weight table entries must be positive and finite");
  Weight w;
  w.table_backed_ = true;
  w.table_ = std::move(values);
  // The value is constant from level size-1 on, so consecutive levels agree
  // (ratio exactly 1) for every n >= size.
  w.tail_ = TailGeometry{1.0, w.table_.size()};
  return w;
}

Weight Weight::from_expr(Expr::Ptr expr, ParamEnv env) {
  if (!expr) throw ConfigError("weight expression must be non-null");
  Weight w;
  w.expr_ = std::move(expr);
  w.env_ = std::move(env);
  w.tail_ = analyze(*w.expr_, w.env_);
  return w;
}

Weight Weight::parse(std::string_view form, const ParamEnv& env) {
  if (form.starts_with("expr:")) return from_expr(parse_expr(form.substr(5)), env);
  if (form.starts_with("table:")) {
    std::string_view body = form.substr(6);
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      std::size_t comma = body.find(',', pos);
      std::string_view tok = body.substr(pos, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - pos);
      double v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("bad weight table entry '" + std::string(tok) + "'", 6 + pos);
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return from_table(std::move(values));
  }
  throw ConfigError("weight form must start with 'expr:' or 'table:' (got '" +
                    std::string(form) + "')");
}

double Weight::at_level(std::uint64_t n) const {
  double v;
  if (table_backed_) {
    v = table_[std::min<std::uint64_t>(n, table_.size() - 1)];
  } else {
    v = eval_radial(*expr_, n, env_);
  }
  if (!std::isfinite(v) || !(v > 0))
    throw WeightDomainError("weight " + to_string() + " is not positive at level " +
                            std::to_string(n) + " (value " + std::to_string(v) + ")");
  return v;
}

Weight::Boundedness Weight::boundedness(std::uint64_t probe_depth, double cap) const {
  if (tail_) {
    if (tail_->ratio > 1.0)
      return {false, true, "tail ratio " + std::to_string(tail_->ratio) +
                               " exceeds 1, values grow without bound"};
    // Ratio <= 1 beyond a fixed level: the sup is over finitely many values
    // and the constant-or-shrinking tail.
    return {true, true, "tail ratio " + std::to_string(tail_->ratio) +
                            " at most 1 beyond level " + std::to_string(tail_->from_level)};
  }
  for (std::uint64_t n = 0; n <= probe_depth; ++n) {
    if (at_level(n) > cap)
      return {false, false, "probe: value exceeds " + std::to_string(cap) +
                                " at level " + std::to_string(n) +
                                " (heuristic, no tail analysis available)"};
  }
  return {true, false, "probe: bounded by " + std::to_string(cap) + " through level " +
                           std::to_string(probe_depth) +
                           " (heuristic, no tail analysis available)"};
}

bool Weight::same_as(const Weight& other) const {
  if (table_backed_ != other.table_backed_) return false;
  if (table_backed_) return table_ == other.table_;
  return format_expr(expr_) == format_expr(other.expr_) && env_ == other.env_;
}

std::string Weight::to_string() const {
  if (table_backed_) {
    std::string s = "table:";
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if (i) s += ',';
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, table_[i]);
      (void)ec;
      s.append(buf, ptr);
    }
    return s;
  }
  return "expr:" + format_expr(expr_);
}

}  // namespace treediff
