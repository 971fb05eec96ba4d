#include "doctest.h"

#include <map>
#include <random>

#include "treediff/operators.hpp"
#include "treediff/verify.hpp"

using namespace treediff;

namespace {
const TreeShape hom2 = TreeShape::homogeneous(2);
}

TEST_CASE("operator descriptors parse and print") {
  CHECK(OperatorDescriptor::parse("I").kind() == OperatorDescriptor::Kind::Identity);
  CHECK(OperatorDescriptor::parse("D").kind() ==
        OperatorDescriptor::Kind::Differentiation);
  CHECK(OperatorDescriptor::parse("Cb").kind() ==
        OperatorDescriptor::Kind::BackwardComposition);
  CHECK_THROWS_AS(OperatorDescriptor::parse("Q"), ConfigError);
  CHECK(OperatorDescriptor::differentiation().to_string() == "D");
}

TEST_CASE("differentiation equals identity minus backward composition") {
  OperatorDescriptor diff = OperatorDescriptor::affine(
      {{1.0, OperatorDescriptor::identity()},
       {-1.0, OperatorDescriptor::backward_composition()}});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    TreeFunction f = random_sparse_function(hom2, 3, 4, rng);
    TreeFunction a = apply(diff, f, hom2);
    TreeFunction b = apply(OperatorDescriptor::differentiation(), f, hom2);
    for (int d = 0; d <= 4; ++d)
      for_each_level_vertex(hom2, d, [&](const Vertex& v, std::uint64_t) {
        CHECK(a.evaluate(v) == b.evaluate(v));
        Cplx want = v.is_root() ? Cplx(0.0) : f.evaluate(v) - f.evaluate(v.parent());
        CHECK(b.evaluate(v) == want);
      });
  }
}

TEST_CASE("affine flattening multiplies coefficients through") {
  OperatorDescriptor inner = OperatorDescriptor::affine(
      {{2.0, OperatorDescriptor::identity()}});
  OperatorDescriptor outer = OperatorDescriptor::affine({{3.0, inner}});
  CHECK(outer.terms().size() == 1);
  CHECK(outer.terms()[0].first == Cplx(6.0));
  TreeFunction f = TreeFunction::characteristic(Vertex({0}));
  CHECK(apply(outer, f, hom2).evaluate(Vertex({0})) == Cplx(6.0));
}

TEST_CASE("shift displacement bound") {
  for (const TreeShape& shape :
       {hom2, TreeShape::homogeneous(1), TreeShape::constant_children(4),
        TreeShape::per_level({2, 3, 1})}) {
    CHECK(lipschitz_shift_bound(shape, 1) == 0.0);
    for (int depth = 2; depth <= 6; ++depth)
      CHECK(lipschitz_shift_bound(shape, depth) == 1.0);
  }
}

TEST_CASE("weighted ratio sup reports and diverges") {
  Weight mu = Weight::parse("table:1,2,6", {});
  NormReport r = weighted_ratio_sup(mu, hom2, 5);
  CHECK(r.value() == 3.0);  // 2/1, 6/2, then 1 forever
  CHECK(std::get<Vertex>(r.witness).length() == 2);
  CHECK(r.attained_exactly);
  CHECK(r.partials.size() == 5);
  CHECK(r.partials[0].value == 2.0);

  CHECK_THROWS_AS(weighted_ratio_sup(mu, hom2, 5, 2.5), UnboundedOperatorError);
  try {
    weighted_ratio_sup(Weight::parse("expr:ifodd(n,1)", {}), hom2, 12, 10.0);
    FAIL("expected the divergence signal");
  } catch (const UnboundedOperatorError& e) {
    CHECK(e.depth() == 11);
    CHECK(e.value() == 11.0);
  }
}

TEST_CASE("hardy level factors and preimage counts") {
  for (std::uint32_t q : {1u, 2u, 3u}) {
    for (std::uint64_t n = 0; n <= 8; ++n) CHECK(hardy_alpha(q, n) == 1.0);
    CHECK(hardy_alpha_sup(q, 8) == 1.0);

    // Census oracle: bucket level-n vertices by their parent.
    TreeShape shape = TreeShape::homogeneous(q);
    for (std::uint64_t n = 0; n <= 4; ++n) {
      std::map<Vertex, std::uint64_t> census;
      for_each_level_vertex(shape, n, [&](const Vertex& v, std::uint64_t) {
        census[backward_shift(v)] += 1;
      });
      for (std::uint64_t m = 0; m <= 4; ++m) {
        std::uint64_t biggest = 0;
        for (const auto& [parent, count] : census)
          if (parent.length() == m && count > biggest) biggest = count;
        CHECK(hardy_preimage_count(q, m, n) == biggest);
      }
    }
  }
}

TEST_CASE("operator norm bounds per space") {
  NormBounds lip = operator_norm_bounds(SpaceDesc::lipschitz(), hom2, 4);
  CHECK(lip.upper == 2.0);
  CHECK(lip.lower == doctest::Approx(2.0).epsilon(1e-14));

  NormBounds weighted = operator_norm_bounds(
      SpaceDesc::parse("weighted:expr:pow(M-1,n)", {{"M", 1.5}}), hom2, 6);
  CHECK(weighted.upper == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(weighted.lower == doctest::Approx(1.5).epsilon(1e-14));

  NormBounds hardy = operator_norm_bounds(SpaceDesc::hardy({2, 1.0}), hom2, 4);
  CHECK(hardy.upper == 2.0);
  CHECK(hardy.lower == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("witness families reject zero-norm members and certify the best") {
  WitnessResult wr = operator_norm_lower_witness(
      OperatorDescriptor::differentiation(),
      {{"zero", TreeFunction::zero()},
       {"chi-root", TreeFunction::characteristic(Vertex::root())}},
      SpaceDesc::lipschitz(), hom2, 3);
  REQUIRE(wr.members.size() == 2);
  CHECK(wr.members[0].rejected);
  CHECK_FALSE(wr.members[1].rejected);
  CHECK(wr.best_index == 1);
  // |chi_o| = 2 while |D chi_o| = 1: all second differences of chi_o are 1.
  CHECK(wr.value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(wr.certified);

  CHECK_THROWS_AS(operator_norm_lower_witness(OperatorDescriptor::differentiation(),
                                              {{"zero", TreeFunction::zero()}},
                                              SpaceDesc::lipschitz(), hom2, 3),
                  ConfigError);
}

TEST_CASE("eigenvalue classification") {
  using Verdict = EigenClassification::Verdict;
  EigenClassification zero_with = eigen_classify(Cplx(0.0), hom2, 4, true);
  CHECK(zero_with.verdict == Verdict::ConstantsOnly);
  REQUIRE_FALSE(zero_with.trace.empty());
  for (const auto& [v, value] : zero_with.trace) CHECK(value == Cplx(1.0));

  EigenClassification zero_without = eigen_classify(Cplx(0.0), hom2, 4, false);
  CHECK(zero_without.verdict == Verdict::OnlyZeroFunction);

  for (Cplx lambda : {Cplx(1.0), Cplx(2.0), Cplx(-0.5, 0.25), Cplx(0.0, 1.0)}) {
    EigenClassification c = eigen_classify(lambda, hom2, 4, true);
    CHECK(c.verdict == Verdict::OnlyZeroFunction);
    for (const auto& [v, value] : c.trace) CHECK(value == Cplx(0.0));
  }

  CHECK_THROWS_AS(eigen_classify(Cplx(2.0), hom2, 0, true), ConfigError);
}

TEST_CASE("spectrum reports") {
  SpectrumReport lip = spectrum_bounds(SpaceDesc::lipschitz(), hom2, 4);
  REQUIRE(lip.exact.has_value());
  CHECK(lip.exact->center == Cplx(1.0));
  CHECK(lip.exact->radius == 1.0);
  CHECK(lip.point_spectrum_zero);
  CHECK(lip.point_spectrum_exact);
  REQUIRE(lip.known_members.size() == 1);
  CHECK(lip.known_members[0] == Cplx(1.0));
  REQUIRE(lip.bounding.size() == 2);
  CHECK(lip.bounding[0].center == Cplx(0.0));
  CHECK(lip.bounding[0].radius == 2.0);
  CHECK(lip.bounding[1].center == Cplx(1.0));
  CHECK(lip.bounding[1].radius == 1.0);
  for (const DiskRegion& disk : lip.bounding) CHECK(disk.contains(Cplx(1.0)));

  SpectrumReport w = spectrum_bounds(
      SpaceDesc::parse("weighted:expr:pow(M-1,n)", {{"M", 3.0}}), hom2, 6);
  CHECK_FALSE(w.exact.has_value());
  REQUIRE(w.bounding.size() == 2);
  CHECK(w.bounding[0].radius == 3.0);  // 1 + ratio sup 2
  CHECK(w.bounding[1].center == Cplx(1.0));
  CHECK(w.bounding[1].radius == 2.0);
  CHECK_FALSE(w.point_spectrum_zero);  // constants fall out of this space
  CHECK(w.point_spectrum_exact);

  SpectrumReport h = spectrum_bounds(SpaceDesc::hardy({2, 2.0}), hom2, 4);
  CHECK(h.bounding[0].radius == 2.0);
  CHECK(h.point_spectrum_zero);

  CHECK_THROWS_AS(
      spectrum_bounds(SpaceDesc::parse("weighted:expr:ifodd(n,1)", {}), hom2, 12, 10.0),
      UnboundedOperatorError);
}

TEST_CASE("constant-on-children scans") {
  ConstantOnChildrenResult ok =
      constant_on_children_check(TreeFunction::constant(2.0), hom2, 4);
  CHECK(ok.constant_on_children);

  ConstantOnChildrenResult bad =
      constant_on_children_check(TreeFunction::characteristic(Vertex({0})), hom2, 3);
  CHECK_FALSE(bad.constant_on_children);
  REQUIRE(bad.counterexample.has_value());
  CHECK(bad.counterexample->parent == Vertex::root());
  CHECK(bad.counterexample->first == Vertex({0}));
  CHECK(bad.counterexample->second == Vertex({1}));
  CHECK(bad.counterexample->first_value == Cplx(1.0));
  CHECK(bad.counterexample->second_value == Cplx(0.0));
}

TEST_CASE("truncation matrices") {
  TruncationMatrix m = truncation_matrix(OperatorDescriptor::differentiation(), hom2, 2);
  CHECK(m.dim == 10);  // 1 + 3 + 6
  CHECK(m.basis.front() == Vertex::root());
  CHECK(m.basis.back() == Vertex({2, 1}));
  CHECK(m.lower_triangular());
  CHECK(m.at(0, 0) == Cplx(0.0));
  CHECK(m.at(1, 1) == Cplx(1.0));
  // D chi_[0] = chi_[0] - chi_[0,0] - chi_[0,1]; [0] is index 1, [0,0] is 4.
  CHECK(m.at(4, 1) == Cplx(-1.0));
  CHECK(m.at(5, 1) == Cplx(-1.0));
  CHECK(m.at(6, 1) == Cplx(0.0));

  auto eig = m.eigenvalues();
  REQUIRE(eig.size() == 2);
  CHECK(eig[0] == std::pair(Cplx(0.0), std::size_t(1)));
  CHECK(eig[1] == std::pair(Cplx(1.0), std::size_t(9)));

  // Every matrix column equals the coefficients of the operator applied to
  // that basis function.
  for (const char* name : {"I", "D", "Cb"}) {
    OperatorDescriptor op = OperatorDescriptor::parse(name);
    TruncationMatrix t = truncation_matrix(op, hom2, 2);
    std::map<Vertex, std::size_t> index;
    for (std::size_t i = 0; i < t.dim; ++i) index[t.basis[i]] = i;
    for (std::size_t j = 0; j < t.dim; ++j) {
      TreeFunction image = apply(op, TreeFunction::characteristic(t.basis[j]), hom2);
      std::map<std::size_t, Cplx> expect;
      for (const auto& [v, c] : image.sparse_entries())
        if (index.count(v)) expect[index[v]] = c;
      for (std::size_t i = 0; i < t.dim; ++i)
        CHECK(t.at(i, j) == (expect.count(i) ? expect[i] : Cplx(0.0)));
    }
  }

  CHECK_THROWS_AS(truncation_matrix(OperatorDescriptor::differentiation(), hom2, 2, 5),
                  RangeError);
  CHECK_THROWS_AS(truncation_matrix(
                      OperatorDescriptor::composition(backward_shift_map()), hom2, 2),
                  ConfigError);
}
