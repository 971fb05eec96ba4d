#include "doctest.h"

#include <random>

#include "treediff/expr.hpp"
#include "treediff/verify.hpp"

using namespace treediff;

namespace {

double value(const char* text, std::uint64_t n = 0, ParamEnv env = {}) {
  return eval_radial(parse_expr(text), n, env);
}

std::size_t error_offset(const char* text) {
  try {
    parse_expr(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  FAIL("expected ParseError for " << text);
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("precedence and associativity") {
  CHECK(value("2+3*4") == 14.0);
  CHECK(value("2*3^2") == 18.0);
  CHECK(value("-2^2") == -4.0);
  CHECK(value("(2+3)*4") == 20.0);
  CHECK(value("2^3^2") == 512.0);
  CHECK(value("10-4-3") == 3.0);
  CHECK(value("12/4/3") == 1.0);
  CHECK(value("2^-1") == 0.5);
  CHECK(value("-n + 1", 3) == -2.0);
}

TEST_CASE("level variable and parameters") {
  CHECK(value("n", 7) == 7.0);
  CHECK(value("n*n+1", 3) == 10.0);
  CHECK(value("M-1", 0, {{"M", 3.0}}) == 2.0);
  CHECK(value("pow(M-1,n)", 2, {{"M", 3.0}}) == 4.0);
  CHECK_THROWS_AS(value("x+1"), ConfigError);
}

TEST_CASE("builtins") {
  CHECK(value("pow(2,10)") == 1024.0);
  CHECK(value("min(3,n)", 5) == 3.0);
  CHECK(value("max(3,n)", 5) == 5.0);
  CHECK(value("ifodd(n,1)", 3) == 3.0);
  CHECK(value("ifodd(n,1)", 4) == 1.0);
  CHECK(value("ifzero(5,1/n)", 0) == 5.0);  // untaken branch never evaluates
  CHECK(value("ifzero(5,1/n)", 2) == 0.5);
  CHECK(value("ifodd(1/n,2)", 4) == 2.0);
}

TEST_CASE("evaluation failures") {
  CHECK_THROWS_AS(value("1/0"), EvalError);
  CHECK_THROWS_AS(value("1/n", 0), EvalError);
  CHECK_THROWS_AS(value("pow(10,400)"), EvalError);
  CHECK_THROWS_AS(value("0^-1"), EvalError);
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK(error_offset("2 + $") == 4);
  CHECK(error_offset("foo(1,2)") == 0);
  CHECK(error_offset("pow(1)") == 5);
  CHECK(error_offset("min(1,2,3)") == 7);
  CHECK(error_offset("1 2") == 2);
  CHECK(error_offset("(1+2") == 4);
  CHECK(error_offset("") == 0);
  CHECK(error_offset("1+") == 2);
}

TEST_CASE("canonical formatting") {
  CHECK(format_expr(parse_expr("2+3*4")) == "(2+(3*4))");
  CHECK(format_expr(parse_expr("-2^2")) == "(-(2^2))");
  CHECK(format_expr(parse_expr("pow( M - 1 , n )")) == "pow((M-1),n)");
  CHECK(format_expr(parse_expr("2.50")) == "2.50");  // source spelling kept
  CHECK(format_expr(parse_expr("ifodd(n,1)")) == "ifodd(n,1)");
}

TEST_CASE("level freedom") {
  CHECK(is_level_free(*parse_expr("1+M*2")));
  CHECK_FALSE(is_level_free(*parse_expr("pow(2,n)")));
  CHECK_FALSE(is_level_free(*parse_expr("ifzero(1,n)")));
}

TEST_CASE("random expressions round trip through the formatter") {
  std::mt19937_64 rng(99);
  ParamEnv env = {{"a", 2.5}, {"M", 3.0}};
  for (int trial = 0; trial < 200; ++trial) {
    Expr::Ptr e = random_expression(rng, 3);
    std::string text = format_expr(e);
    Expr::Ptr back = parse_expr(text);
    CHECK(format_expr(back) == text);
    for (std::uint64_t n : {0ull, 1ull, 7ull, 20ull})
      CHECK(eval_radial(e, n, env) == eval_radial(back, n, env));
  }
}
