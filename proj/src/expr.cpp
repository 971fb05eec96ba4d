#include "treediff/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace treediff {

namespace {

std::string default_lexeme(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Expr::Ptr Expr::number(double value) { return number(value, default_lexeme(value)); }

Expr::Ptr Expr::number(double value, std::string lexeme) {
  return std::make_shared<const Expr>(Node{Number{value, std::move(lexeme)}});
}

Expr::Ptr Expr::level_var() { return std::make_shared<const Expr>(Node{LevelVar{}}); }

Expr::Ptr Expr::param(std::string name) {
  return std::make_shared<const Expr>(Node{Param{std::move(name)}});
}

Expr::Ptr Expr::neg(Ptr arg) { return std::make_shared<const Expr>(Node{Neg{std::move(arg)}}); }

Expr::Ptr Expr::binary(BinOp op, Ptr lhs, Ptr rhs) {
  return std::make_shared<const Expr>(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}

Expr::Ptr Expr::call(Builtin fn, Ptr a, Ptr b) {
  return std::make_shared<const Expr>(Node{Call{fn, std::move(a), std::move(b)}});
}

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr::Ptr run() {
    auto e = parse_sum();
    skip_space();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool eat(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!eat(c)) throw ParseError(std::string("expected ") + what, pos_);
  }

  Expr::Ptr parse_sum() {
    auto lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = Expr::binary(Expr::BinOp::Add, lhs, parse_term());
      else if (eat('-'))
        lhs = Expr::binary(Expr::BinOp::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  Expr::Ptr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = Expr::binary(Expr::BinOp::Mul, lhs, parse_unary());
      else if (eat('/'))
        lhs = Expr::binary(Expr::BinOp::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  Expr::Ptr parse_unary() {
    if (eat('-')) return Expr::neg(parse_unary());
    return parse_power();
  }

  Expr::Ptr parse_power() {
    auto base = parse_atom();
    if (eat('^')) return Expr::binary(Expr::BinOp::Pow, base, parse_unary());
    return base;
  }

  Expr::Ptr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      auto e = parse_sum();
      expect(')', "')'");
      return e;
    }
    if (c >= '0' && c <= '9') return parse_number();
    if (is_ident_start(c)) return parse_ident();
    throw ParseError(pos_ >= text_.size() ? "unexpected end of input"
                                          : std::string("unexpected character '") + c + "'",
                     pos_);
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  Expr::Ptr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      if (pos_ >= text_.size() || text_[pos_] < '0' || text_[pos_] > '9')
        throw ParseError("digits required after decimal point", pos_);
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    }
    std::string_view lexeme = text_.substr(start, pos_ - start);
    double value = 0;
    auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (ec != std::errc() || ptr != lexeme.data() + lexeme.size())
      throw ParseError("bad number '" + std::string(lexeme) + "'", start);
    return Expr::number(value, std::string(lexeme));
  }

  Expr::Ptr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (peek() != '(') {
      if (name == "n") return Expr::level_var();
      return Expr::param(std::move(name));
    }
    Expr::Builtin fn;
    if (name == "pow")
      fn = Expr::Builtin::Pow;
    else if (name == "ifodd")
      fn = Expr::Builtin::IfOdd;
    else if (name == "ifzero")
      fn = Expr::Builtin::IfZero;
    else if (name == "min")
      fn = Expr::Builtin::Min;
    else if (name == "max")
      fn = Expr::Builtin::Max;
    else
      throw ParseError("unknown function '" + name + "'", start);
    expect('(', "'('");
    auto a = parse_sum();
    if (peek() == ')')
      throw ParseError("function '" + name + "' takes two arguments", pos_);
    expect(',', "','");
    auto b = parse_sum();
    if (peek() == ',')
      throw ParseError("function '" + name + "' takes two arguments", pos_);
    expect(')', "')'");
    return Expr::call(fn, a, b);
  }
};

double checked(double x, const char* what) {
  if (!std::isfinite(x)) throw EvalError(std::string("non-finite result from ") + what);
  return x;
}

}  // namespace

Expr::Ptr parse_expr(std::string_view text) { return Parser(text).run(); }

double eval_radial(const Expr& e, std::uint64_t n, const ParamEnv& env) {
  struct Visitor {
    std::uint64_t n;
    const ParamEnv& env;

    double operator()(const Expr::Number& x) const { return x.value; }
    double operator()(const Expr::LevelVar&) const { return static_cast<double>(n); }
    double operator()(const Expr::Param& p) const {
      auto it = env.find(p.name);
      if (it == env.end())
        throw ConfigError("parameter '" + p.name + "' is not bound (use --param " +
                          p.name + "=VALUE)");
      return it->second;
    }
    double operator()(const Expr::Neg& x) const { return -eval(*x.arg); }
    double operator()(const Expr::Binary& x) const {
      double a = eval(*x.lhs);
      switch (x.op) {
        case Expr::BinOp::Add:
          return checked(a + eval(*x.rhs), "addition");
        case Expr::BinOp::Sub:
          return checked(a - eval(*x.rhs), "subtraction");
        case Expr::BinOp::Mul:
          return checked(a * eval(*x.rhs), "multiplication");
        case Expr::BinOp::Div: {
          double b = eval(*x.rhs);
          if (b == 0.0) throw EvalError("division by zero");
          return checked(a / b, "division");
        }
        case Expr::BinOp::Pow:
          return checked(std::pow(a, eval(*x.rhs)), "power");
      }
      return 0;
    }
    double operator()(const Expr::Call& x) const {
      switch (x.fn) {
        case Expr::Builtin::Pow:
          return checked(std::pow(eval(*x.a), eval(*x.b)), "pow");
        case Expr::Builtin::IfOdd:
          return n % 2 == 1 ? eval(*x.a) : eval(*x.b);
        case Expr::Builtin::IfZero:
          return n == 0 ? eval(*x.a) : eval(*x.b);
        case Expr::Builtin::Min:
          return std::min(eval(*x.a), eval(*x.b));
        case Expr::Builtin::Max:
          return std::max(eval(*x.a), eval(*x.b));
      }
      return 0;
    }

    double eval(const Expr& e) const { return std::visit(*this, e.node()); }
  };
  return Visitor{n, env}.eval(e);
}

std::string format_expr(const Expr& e) {
  struct Visitor {
    std::string operator()(const Expr::Number& x) const { return x.lexeme; }
    std::string operator()(const Expr::LevelVar&) const { return "n"; }
    std::string operator()(const Expr::Param& p) const { return p.name; }
    std::string operator()(const Expr::Neg& x) const { return "(-" + fmt(*x.arg) + ")"; }
    std::string operator()(const Expr::Binary& x) const {
      const char* op = "";
      switch (x.op) {
        case Expr::BinOp::Add: op = "+"; break;
        case Expr::BinOp::Sub: op = "-"; break;
        case Expr::BinOp::Mul: op = "*"; break;
        case Expr::BinOp::Div: op = "/"; break;
        case Expr::BinOp::Pow: op = "^"; break;
      }
      return "(" + fmt(*x.lhs) + op + fmt(*x.rhs) + ")";
    }
    std::string operator()(const Expr::Call& x) const {
      const char* name = "";
      switch (x.fn) {
        case Expr::Builtin::Pow: name = "pow"; break;
        case Expr::Builtin::IfOdd: name = "ifodd"; break;
        case Expr::Builtin::IfZero: name = "ifzero"; break;
        case Expr::Builtin::Min: name = "min"; break;
        case Expr::Builtin::Max: name = "max"; break;
      }
      return std::string(name) + "(" + fmt(*x.a) + "," + fmt(*x.b) + ")";
    }

    std::string fmt(const Expr& e) const { return std::visit(*this, e.node()); }
  };
  return Visitor{}.fmt(e);
}

bool is_level_free(const Expr& e) {
  struct Visitor {
    bool operator()(const Expr::Number&) const { return true; }
    bool operator()(const Expr::LevelVar&) const { return false; }
    bool operator()(const Expr::Param&) const { return true; }
    bool operator()(const Expr::Neg& x) const { return free(*x.arg); }
    bool operator()(const Expr::Binary& x) const { return free(*x.lhs) && free(*x.rhs); }
    bool operator()(const Expr::Call& x) const { return free(*x.a) && free(*x.b); }
    bool free(const Expr& e) const { return std::visit(*this, e.node()); }
  };
  return Visitor{}.free(e);
}

}  // namespace treediff
