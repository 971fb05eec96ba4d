#include "doctest.h"

#include <limits>
#include <random>

#include "treediff/function.hpp"
#include "treediff/verify.hpp"

using namespace treediff;

namespace {
const TreeShape hom2 = TreeShape::homogeneous(2);
}

TEST_CASE("sparse functions drop exact zeros") {
  TreeFunction f = TreeFunction::sparse({{Vertex({0}), 1.0}, {Vertex({1}), 0.0}});
  CHECK(f.kind() == TreeFunction::Kind::Sparse);
  CHECK(f.sparse_entries().size() == 1);
  CHECK(f.evaluate(Vertex({0})) == Cplx(1.0));
  CHECK(f.evaluate(Vertex({1})) == Cplx(0.0));
  CHECK(f.evaluate(Vertex({0, 1, 0})) == Cplx(0.0));
  CHECK(f.explicit_depth() == 1);
  CHECK(TreeFunction::zero().explicit_depth() == 0);
}

TEST_CASE("radial functions strip trailing tail values") {
  TreeFunction f = TreeFunction::radial({2.0, 5.0, 1.0, 1.0}, 1.0);
  CHECK(f.radial_values().size() == 2);
  CHECK(f.radial_tail() == Cplx(1.0));
  CHECK(f.value_at_level(0) == Cplx(2.0));
  CHECK(f.value_at_level(1) == Cplx(5.0));
  CHECK(f.value_at_level(9) == Cplx(1.0));
  CHECK(f.evaluate(Vertex({2, 1, 0})) == Cplx(1.0));
  CHECK(f.is_radial());

  TreeFunction c = TreeFunction::constant(Cplx(0.0, 2.0));
  CHECK(c.value_at_level(17) == Cplx(0.0, 2.0));
}

TEST_CASE("sparse functions have no common level value") {
  TreeFunction f = TreeFunction::characteristic(Vertex({0}));
  CHECK_THROWS_AS(f.value_at_level(1), ConfigError);
}

TEST_CASE("expression-backed rules are radial") {
  TreeFunction f = TreeFunction::from_expr(parse_expr("pow(2,n)"), {}, "expr:pow(2,n)");
  CHECK(f.kind() == TreeFunction::Kind::Rule);
  CHECK(f.is_radial());
  CHECK(f.evaluate(Vertex({1, 1, 1})) == Cplx(8.0));
  CHECK(f.value_at_level(3) == Cplx(8.0));
  CHECK(f.description() == "expr:pow(2,n)");
}

TEST_CASE("rule evaluation failures name the rule and the vertex") {
  TreeFunction f = TreeFunction::rule(
      [](const Vertex& v) -> Cplx {
        if (v.length() == 2) throw EvalError("boom");
        return 1.0;
      },
      "fragile", false);
  CHECK(f.evaluate(Vertex({0})) == Cplx(1.0));
  try {
    f.evaluate(Vertex({0, 1}));
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    std::string msg = e.what();
    CHECK(msg.find("fragile") != std::string::npos);
    CHECK(msg.find("[0,1]") != std::string::npos);
  }
}

TEST_CASE("derivative of sparse functions") {
  TreeFunction d = derivative(TreeFunction::characteristic(Vertex::root()), hom2);
  CHECK(d.kind() == TreeFunction::Kind::Sparse);
  // The root derivative vanishes; the children each lose the root value.
  CHECK(d.evaluate(Vertex::root()) == Cplx(0.0));
  CHECK(d.sparse_entries().size() == 3);
  for (const Vertex& u : children(hom2, Vertex::root()))
    CHECK(d.evaluate(u) == Cplx(-1.0));

  TreeFunction d2 = derivative(TreeFunction::characteristic(Vertex({1, 0})), hom2);
  CHECK(d2.evaluate(Vertex({1, 0})) == Cplx(1.0));
  CHECK(d2.evaluate(Vertex({1, 0, 0})) == Cplx(-1.0));
  CHECK(d2.evaluate(Vertex({1, 0, 1})) == Cplx(-1.0));
  CHECK(d2.evaluate(Vertex({1})) == Cplx(0.0));
  CHECK(d2.sparse_entries().size() == 3);
}

TEST_CASE("derivative of radial functions") {
  TreeFunction d = derivative(TreeFunction::hardy_witness(), hom2);
  CHECK(d.kind() == TreeFunction::Kind::Radial);
  CHECK(d.value_at_level(0) == Cplx(0.0));
  CHECK(d.value_at_level(1) == Cplx(2.0));
  CHECK(d.value_at_level(2) == Cplx(-1.0));
  CHECK(d.value_at_level(3) == Cplx(0.0));

  CHECK(derivative(TreeFunction::constant(4.0), hom2).value_at_level(5) == Cplx(0.0));
}

TEST_CASE("derivative of rules agrees with the pointwise formula") {
  TreeFunction f = TreeFunction::rule(
      [](const Vertex& v) {
        double x = 1.0;
        for (std::size_t i = 0; i < v.length(); ++i) x = x * 0.5 + v[i];
        return Cplx(x, -x);
      },
      "mix", false);
  TreeFunction df = derivative(f, hom2);
  CHECK(df.kind() == TreeFunction::Kind::Rule);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t len = static_cast<std::size_t>(rnd01(rng) * 5);
    std::vector<std::uint32_t> a(len);
    for (auto& dgt : a) dgt = static_cast<std::uint32_t>(rnd01(rng) * 2);
    Vertex v(a);
    Cplx want = v.is_root() ? Cplx(0.0) : f.evaluate(v) - f.evaluate(v.parent());
    CHECK(df.evaluate(v) == want);
  }
}

TEST_CASE("backward composition") {
  TreeFunction cb = compose_backward(TreeFunction::characteristic(Vertex({0})), hom2);
  CHECK(cb.kind() == TreeFunction::Kind::Sparse);
  CHECK(cb.evaluate(Vertex({0, 0})) == Cplx(1.0));
  CHECK(cb.evaluate(Vertex({0, 1})) == Cplx(1.0));
  CHECK(cb.evaluate(Vertex({0})) == Cplx(0.0));
  CHECK(cb.sparse_entries().size() == 2);

  // The root is a fixed point of b, so chi_o survives at the root.
  TreeFunction cbo = compose_backward(TreeFunction::characteristic(Vertex::root()), hom2);
  CHECK(cbo.evaluate(Vertex::root()) == Cplx(1.0));
  CHECK(cbo.evaluate(Vertex({2})) == Cplx(1.0));
  CHECK(cbo.sparse_entries().size() == 4);

  TreeFunction r = compose_backward(TreeFunction::radial({1.0, 2.0, 3.0}, 0.0), hom2);
  CHECK(r.kind() == TreeFunction::Kind::Radial);
  CHECK(r.value_at_level(0) == Cplx(1.0));
  CHECK(r.value_at_level(1) == Cplx(1.0));
  CHECK(r.value_at_level(2) == Cplx(2.0));
  CHECK(r.value_at_level(3) == Cplx(3.0));
  CHECK(r.value_at_level(4) == Cplx(0.0));
}

TEST_CASE("generic composition falls back to rules") {
  TreeFunction f = TreeFunction::characteristic(Vertex({1}));
  TreeFunction g = compose(f, backward_shift_map());
  CHECK(g.kind() == TreeFunction::Kind::Rule);
  CHECK(g.evaluate(Vertex({1, 0})) == Cplx(1.0));
  CHECK(g.evaluate(Vertex({1})) == Cplx(0.0));
}

TEST_CASE("linear combinations") {
  TreeFunction a = TreeFunction::sparse({{Vertex({0}), 2.0}, {Vertex({1}), 1.0}});
  TreeFunction b = TreeFunction::sparse({{Vertex({0}), -2.0}, {Vertex({2}), 5.0}});
  TreeFunction sum = linear_combine(1.0, a, 1.0, b);
  CHECK(sum.kind() == TreeFunction::Kind::Sparse);
  CHECK(sum.sparse_entries().size() == 2);  // the [0] entries cancel exactly
  CHECK(sum.evaluate(Vertex({1})) == Cplx(1.0));
  CHECK(sum.evaluate(Vertex({2})) == Cplx(5.0));

  TreeFunction r = linear_combine(2.0, TreeFunction::radial({1.0}, 3.0), -1.0,
                                  TreeFunction::radial({0.0, 4.0}, 6.0));
  CHECK(r.kind() == TreeFunction::Kind::Radial);
  CHECK(r.value_at_level(0) == Cplx(2.0));
  CHECK(r.value_at_level(1) == Cplx(2.0));
  CHECK(r.value_at_level(7) == Cplx(0.0));

  // A zero coefficient keeps the other side's representation.
  TreeFunction kept = linear_combine(0.0, TreeFunction::from_expr(parse_expr("n"), {}, "n"),
                                     3.0, a);
  CHECK(kept.kind() == TreeFunction::Kind::Sparse);
  CHECK(kept.evaluate(Vertex({0})) == Cplx(6.0));

  TreeFunction mixed = linear_combine(1.0, a, 1.0, TreeFunction::constant(1.0));
  CHECK(mixed.kind() == TreeFunction::Kind::Rule);
  CHECK(mixed.evaluate(Vertex({0})) == Cplx(3.0));
  CHECK(mixed.evaluate(Vertex({2, 0})) == Cplx(1.0));
}

TEST_CASE("scaling preserves representations") {
  TreeFunction a = TreeFunction::characteristic(Vertex({1}));
  CHECK(scale(Cplx(0.0, 1.0), a).kind() == TreeFunction::Kind::Sparse);
  CHECK(scale(Cplx(0.0, 1.0), a).evaluate(Vertex({1})) == Cplx(0.0, 1.0));
  CHECK(scale(0.0, a).sparse_entries().empty());
  CHECK(scale(2.0, TreeFunction::constant(3.0)).value_at_level(4) == Cplx(6.0));
}

TEST_CASE("alternating witness values and tags") {
  Weight mu = Weight::parse("table:1,2", {});
  TreeFunction g = TreeFunction::alternating_witness(mu);
  CHECK(g.kind() == TreeFunction::Kind::Rule);
  CHECK(g.is_radial());
  CHECK(g.rule_tag() == TreeFunction::RuleTag::AltWitness);
  CHECK(g.evaluate(Vertex::root()) == Cplx(1.0));
  CHECK(g.evaluate(Vertex({1})) == Cplx(-0.5));
  CHECK(g.evaluate(Vertex({1, 0})) == Cplx(0.5));

  TreeFunction dg = derivative(g, hom2);
  CHECK(dg.rule_tag() == TreeFunction::RuleTag::AltWitnessDerivative);
  CHECK(dg.evaluate(Vertex({1})) == Cplx(-1.5));

  // Scaling is representation-preserving but drops the certificate tag.
  CHECK(scale(2.0, g).rule_tag() == TreeFunction::RuleTag::Generic);
}

TEST_CASE("support validation against a shape") {
  TreeFunction bad = TreeFunction::sparse({{Vertex({0, 5}), 1.0}});
  CHECK_THROWS_AS(bad.require_valid(hom2), AddressError);
  CHECK_NOTHROW(TreeFunction::characteristic(Vertex({2})).require_valid(hom2));
  CHECK_NOTHROW(TreeFunction::constant(1.0).require_valid(hom2));
}

TEST_CASE("non-finite inputs are rejected") {
  CHECK_THROWS_AS(TreeFunction::sparse({{Vertex({0}), Cplx(1.0 / 0.0, 0.0)}}), EvalError);
  TreeFunction f = TreeFunction::rule(
      [](const Vertex&) { return Cplx(std::numeric_limits<double>::quiet_NaN(), 0.0); },
      "nan rule", true);
  CHECK_THROWS_AS(f.evaluate(Vertex({0})), EvalError);
}
