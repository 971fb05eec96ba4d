#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "treediff/errors.hpp"

namespace treediff {

using ParamEnv = std::map<std::string, double>;

// Immutable AST for the radial expression language over the level variable
// n. Children are shared pointers so copies are cheap and evaluation is
// reentrant.
class Expr {
public:
  using Ptr = std::shared_ptr<const Expr>;

  enum class BinOp { Add, Sub, Mul, Div, Pow };
  enum class Builtin { Pow, IfOdd, IfZero, Min, Max };

  struct Number {
    double value;
    std::string lexeme;  // source spelling, kept so formatting round-trips
  };
  struct LevelVar {};
  struct Param {
    std::string name;
  };
  struct Neg {
    Ptr arg;
  };
  struct Binary {
    BinOp op;
    Ptr lhs, rhs;
  };
  struct Call {
    Builtin fn;
    Ptr a, b;
  };

  using Node = std::variant<Number, LevelVar, Param, Neg, Binary, Call>;

  explicit Expr(Node n) : node_(std::move(n)) {}
  const Node& node() const noexcept { return node_; }

  static Ptr number(double value);
  static Ptr number(double value, std::string lexeme);
  static Ptr level_var();
  static Ptr param(std::string name);
  static Ptr neg(Ptr arg);
  static Ptr binary(BinOp op, Ptr lhs, Ptr rhs);
  static Ptr call(Builtin fn, Ptr a, Ptr b);

private:
  Node node_;
};

// Grammar, with ^ binding tightest and right-associative:
//   expr  := term (("+" | "-") term)*
//   term  := unary (("*" | "/") unary)*
//   unary := "-" unary | power
//   power := atom ("^" unary)?
//   atom  := NUMBER | "n" | IDENT | IDENT "(" expr "," expr ")" | "(" expr ")"
// Failures throw ParseError carrying the byte offset of the offending token.
Expr::Ptr parse_expr(std::string_view text);

// Evaluates at level n. ifodd/ifzero only evaluate the branch they select;
// division by zero and non-finite results throw EvalError; a parameter
// missing from the environment throws ConfigError.
double eval_radial(const Expr& e, std::uint64_t n, const ParamEnv& env);
inline double eval_radial(const Expr::Ptr& e, std::uint64_t n, const ParamEnv& env) {
  return eval_radial(*e, n, env);
}

// Canonical fully parenthesized form; parses back to an identical tree.
std::string format_expr(const Expr& e);
inline std::string format_expr(const Expr::Ptr& e) { return format_expr(*e); }

// True when the expression never mentions the level variable.
bool is_level_free(const Expr& e);

}  // namespace treediff
