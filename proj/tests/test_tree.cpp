#include "doctest.h"

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "treediff/tree.hpp"
#include "treediff/verify.hpp"

using namespace treediff;

TEST_CASE("vertex text round trips") {
  CHECK(Vertex::root().to_string() == "o");
  CHECK(Vertex({0, 1, 2}).to_string() == "[0,1,2]");
  CHECK(Vertex::parse("o") == Vertex::root());
  CHECK(Vertex::parse("") == Vertex::root());
  CHECK(Vertex::parse("[]") == Vertex::root());
  CHECK(Vertex::parse("[0,1]") == Vertex({0, 1}));
  CHECK(Vertex::parse("0,1") == Vertex({0, 1}));
  CHECK(Vertex::parse(Vertex({3, 0, 7}).to_string()) == Vertex({3, 0, 7}));
  CHECK_THROWS_AS(Vertex::parse("[0,x]"), ParseError);
  CHECK_THROWS_AS(Vertex::parse("[0,1"), ParseError);
}

TEST_CASE("vertex order is level first, then lexicographic") {
  std::vector<Vertex> vs = {Vertex({1}), Vertex::root(), Vertex({0, 2}), Vertex({0}),
                            Vertex({0, 1})};
  std::sort(vs.begin(), vs.end());
  CHECK(vs[0] == Vertex::root());
  CHECK(vs[1] == Vertex({0}));
  CHECK(vs[2] == Vertex({1}));
  CHECK(vs[3] == Vertex({0, 1}));
  CHECK(vs[4] == Vertex({0, 2}));
}

TEST_CASE("parent and child") {
  Vertex v({2, 5});
  CHECK(v.parent() == Vertex({2}));
  CHECK(Vertex::root().parent() == Vertex::root());
  CHECK(v.child(3) == Vertex({2, 5, 3}));
  CHECK(backward_shift(v) == v.parent());
}

TEST_CASE("shape text round trips and validation") {
  for (const char* text : {"homogeneous:2", "constant:3", "perlevel:2,3,1"}) {
    TreeShape s = TreeShape::parse(text);
    CHECK(s.to_string() == text);
    CHECK(TreeShape::parse(s.to_string()) == s);
  }
  CHECK_THROWS_AS(TreeShape::parse("homogeneous:0"), ConfigError);
  CHECK_THROWS_AS(TreeShape::parse("perlevel:"), ParseError);
  CHECK_THROWS_AS(TreeShape::parse("perlevel:2,0"), ConfigError);
  CHECK_THROWS_AS(TreeShape::parse("ternary:2"), ParseError);
  CHECK_THROWS_AS(TreeShape::parse("homogeneous:x"), ParseError);
}

TEST_CASE("branching laws") {
  TreeShape hom = TreeShape::homogeneous(2);
  CHECK(hom.branching_at_level(0) == 3);
  CHECK(hom.branching_at_level(1) == 2);
  CHECK(hom.branching_at_level(9) == 2);
  CHECK(hom.homogeneous_q() == 2);

  TreeShape con = TreeShape::constant_children(3);
  CHECK(con.branching_at_level(0) == 3);
  CHECK(con.branching_at_level(5) == 3);
  CHECK_THROWS_AS(con.homogeneous_q(), ConfigError);

  TreeShape per = TreeShape::per_level({2, 3, 1});
  CHECK(per.branching_at_level(0) == 2);
  CHECK(per.branching_at_level(1) == 3);
  CHECK(per.branching_at_level(2) == 1);
  CHECK(per.branching_at_level(10) == 1);  // last entry repeats
}

TEST_CASE("level sizes") {
  TreeShape hom = TreeShape::homogeneous(2);
  CHECK(hom.level_size(0) == 1);
  CHECK(hom.level_size(1) == 3);
  CHECK(hom.level_size(2) == 6);
  CHECK(hom.level_size(3) == 12);

  TreeShape per = TreeShape::per_level({2, 3, 1});
  CHECK(per.level_size(0) == 1);
  CHECK(per.level_size(1) == 2);
  CHECK(per.level_size(2) == 6);
  CHECK(per.level_size(3) == 6);
  CHECK(per.level_size(9) == 6);
}

TEST_CASE("level size overflow reporting") {
  TreeShape hom = TreeShape::homogeneous(2);
  auto max_depth = hom.max_safe_depth();
  REQUIRE(max_depth.has_value());
  CHECK_NOTHROW(hom.level_size(*max_depth));
  CHECK_THROWS_AS(hom.level_size(*max_depth + 1), RangeError);

  // Eventually-path shapes have bounded level sizes at every depth.
  CHECK_FALSE(TreeShape::constant_children(1).max_safe_depth().has_value());
  CHECK_FALSE(TreeShape::per_level({5, 1}).max_safe_depth().has_value());
  CHECK_NOTHROW(TreeShape::per_level({5, 1}).level_size(100000));
}

TEST_CASE("path and branching predicates") {
  CHECK(TreeShape::constant_children(1).is_path());
  CHECK_FALSE(TreeShape::constant_children(1).has_branching_vertex());
  CHECK_FALSE(TreeShape::homogeneous(1).is_path());  // the root has 2 children
  CHECK(TreeShape::homogeneous(1).has_branching_vertex());
  CHECK(TreeShape::per_level({1, 1, 3, 1}).has_branching_vertex());
  CHECK_FALSE(TreeShape::per_level({1, 1, 3, 1}).is_path());
}

TEST_CASE("vertex validity against a shape") {
  TreeShape hom = TreeShape::homogeneous(2);
  CHECK(hom.valid(Vertex({2})));       // root has 3 children
  CHECK_FALSE(hom.valid(Vertex({3})));
  CHECK(hom.valid(Vertex({2, 1})));
  CHECK_FALSE(hom.valid(Vertex({2, 2})));
  CHECK_THROWS_AS(hom.require_valid(Vertex({0, 5})), AddressError);
}

TEST_CASE("children enumeration") {
  TreeShape hom = TreeShape::homogeneous(2);
  auto kids = children(hom, Vertex::root());
  REQUIRE(kids.size() == 3);
  CHECK(kids[0] == Vertex({0}));
  CHECK(kids[2] == Vertex({2}));
  auto grand = children(hom, Vertex({1}));
  REQUIRE(grand.size() == 2);
  CHECK(grand[1] == Vertex({1, 1}));
}

TEST_CASE("distance matches the upward-walk oracle") {
  TreeShape hom = TreeShape::homogeneous(3);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto draw = [&] {
      std::size_t len = static_cast<std::size_t>(rnd01(rng) * 6);
      std::vector<std::uint32_t> a(len);
      for (auto& d : a)
        d = static_cast<std::uint32_t>(rnd01(rng) * 3);
      return Vertex(a);
    };
    Vertex v = draw(), w = draw();
    CHECK(distance(hom, v, w) == oracle::tree_distance(v, w));
  }
  CHECK(distance(hom, Vertex({0, 1}), Vertex({0, 1})) == 0);
  CHECK(distance(hom, Vertex::root(), Vertex({0, 1})) == 2);
  CHECK(distance(hom, Vertex({0, 0}), Vertex({1})) == 3);
}

TEST_CASE("sectors and balls") {
  TreeShape hom = TreeShape::homogeneous(2);
  CHECK(in_sector(Vertex({0}), Vertex({0, 1})));
  CHECK(in_sector(Vertex::root(), Vertex({2, 1})));
  CHECK_FALSE(in_sector(Vertex({1}), Vertex({0, 1})));
  CHECK(in_closed_ball(hom, Vertex({0}), 1, Vertex::root()));
  CHECK_FALSE(in_open_ball(hom, Vertex({0}), 1, Vertex::root()));
  CHECK(in_open_ball(hom, Vertex({0}), 2, Vertex({0, 1})));
}

TEST_CASE("rank and unrank invert each other") {
  for (const TreeShape& shape :
       {TreeShape::homogeneous(2), TreeShape::constant_children(3),
        TreeShape::per_level({2, 3, 1})}) {
    for (std::size_t n = 0; n <= 4; ++n) {
      std::uint64_t size = shape.level_size(n);
      for (std::uint64_t r = 0; r < size; ++r) {
        Vertex v = level_vertex(shape, n, r);
        CHECK(v.length() == n);
        CHECK(shape.valid(v));
        CHECK(level_rank(shape, v) == r);
      }
    }
  }
  CHECK_THROWS_AS(level_vertex(TreeShape::homogeneous(2), 2, 6), RangeError);
}

TEST_CASE("level cursor walks the level in order") {
  TreeShape shape = TreeShape::per_level({3, 2});
  std::vector<Vertex> seen;
  for_each_level_vertex(shape, 2, [&](const Vertex& v, std::uint64_t rank) {
    CHECK(rank == seen.size());
    seen.push_back(v);
  });
  CHECK(seen.size() == shape.level_size(2));
  CHECK(std::is_sorted(seen.begin(), seen.end()));
  CHECK(seen == level_vertices(shape, 2));
  CHECK(seen.front() == Vertex({0, 0}));
  CHECK(seen.back() == Vertex({2, 1}));

  LevelCursor tail(shape, 2, 4);
  CHECK(tail.vertex() == level_vertex(shape, 2, 4));
}
