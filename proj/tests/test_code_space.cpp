#include <doctest.h>

#include "gifs/code_space.hpp"
#include "reference_systems.hpp"

using namespace gifs;

TEST_CASE("tree_leaf_count and constant trees") {
  CHECK(tree_leaf_count(2, 1) == 1);
  CHECK(tree_leaf_count(2, 4) == 8);
  CHECK(tree_leaf_count(3, 3) == 9);
  CHECK(tree_leaf_count(1, 7) == 1);
  CHECK_THROWS_AS(tree_leaf_count(2, 0), UsageError);
  CHECK_THROWS_AS(tree_leaf_count(10, 50), ResourceError);
  SymbolTree t = constant_tree(2, 3, 2);
  CHECK(t.level == 3);
  CHECK(t.leaves == std::vector<int>(4, 2));
}

TEST_CASE("finite code validation") {
  FiniteCode c = constant_code(2, 2, 3, 1);
  CHECK(c.depth() == 3);
  CHECK_NOTHROW(c.validate());
  c.levels[2].leaves[0] = 3;  // symbol out of range for n=2
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.levels[2].leaves[0] = 1;
  c.levels[2].leaves.pop_back();  // wrong leaf count
  CHECK_THROWS_AS(c.validate(), UsageError);
  CHECK_THROWS_AS(FiniteCode{}.validate(), UsageError);
}

TEST_CASE("level_cardinality: small closed forms and the enumeration cross-check") {
  CHECK(level_cardinality(5, 2, 1) == "5");
  CHECK(level_cardinality(2, 2, 2) == "4");
  CHECK(level_cardinality(2, 2, 3) == "16");
  CHECK(level_cardinality(2, 2, 5) == "65536");
  CHECK(level_cardinality(3, 2, 3) == "81");
  CHECK(level_cardinality(10, 1, 9) == "10");  // m=1: every level is one symbol
  // 2^64 needs exact big-integer arithmetic
  CHECK(level_cardinality(2, 2, 7) == "18446744073709551616");
  for (std::size_t k = 1; k <= 3; ++k) {
    CHECK(level_cardinality(2, 2, k) == std::to_string(enumerate_trees(2, 2, k).size()));
  }
  CHECK_THROWS_AS(level_cardinality(2, 2, 0), UsageError);
  CHECK_THROWS_AS(level_cardinality(9, 3, 13), ResourceError);
}

TEST_CASE("tau_apply: level-1 symbol, hand interleave, guards") {
  CodeSpec two{constant_code(2, 2, 1, 2), 2};
  CodeSpec one{constant_code(2, 2, 1, 1), 1};
  FiniteCode r = tau_apply(1, std::vector<CodeSpec>{two, one}, 3);
  // expected (1, (2,1), ((2,2),(1,1)))
  CHECK(r.levels[0].leaves == std::vector<int>{1});
  CHECK(r.levels[1].leaves == std::vector<int>{2, 1});
  CHECK(r.levels[2].leaves == std::vector<int>{2, 2, 1, 1});
  CHECK_NOTHROW(r.validate());
  CHECK_THROWS_AS(tau_apply(3, std::vector<CodeSpec>{two, one}, 3), UsageError);
  CHECK_THROWS_AS(tau_apply(1, std::vector<CodeSpec>{two}, 3), UsageError);
  CHECK_THROWS_AS(tau_apply(1, std::vector<CodeSpec>{two, one}, 0), UsageError);
}

TEST_CASE("project recovers tau_apply arguments (round trip both ways)") {
  auto rng = make_rng(21, RngStream::tests);
  std::uniform_int_distribution<int> sym(1, 2);
  for (int t = 0; t < 20; ++t) {
    std::vector<FiniteCode> args;
    for (int j = 0; j < 2; ++j) {
      FiniteCode c{2, 2, {}};
      for (std::size_t lvl = 1; lvl <= 3; ++lvl) {
        SymbolTree tr{lvl, std::vector<int>(tree_leaf_count(2, lvl))};
        for (int& s : tr.leaves) s = sym(rng);
        c.levels.push_back(std::move(tr));
      }
      args.push_back(std::move(c));
    }
    int i = sym(rng);
    FiniteCode image = tau_apply(i, args, 4);
    for (std::size_t j = 1; j <= 2; ++j) {
      FiniteCode back = project(image, j);
      CHECK(back == args[j - 1]);
    }
    // re-interleave the projections under the level-1 symbol
    FiniteCode again = tau_apply(image.levels[0].leaves[0],
                                 std::vector<FiniteCode>{project(image, 1), project(image, 2)}, 4);
    CHECK(again == image);
  }
  CHECK_THROWS_AS(project(constant_code(2, 2, 1, 1), 1), UsageError);
  CHECK_THROWS_AS(project(constant_code(2, 2, 2, 1), 3), UsageError);
}

TEST_CASE("project of a constant code is the constant code one level shorter") {
  FiniteCode c = constant_code(2, 2, 4, 2);
  CHECK(project(c, 1) == constant_code(2, 2, 3, 2));
  CHECK(project(c, 2) == constant_code(2, 2, 3, 2));
}

TEST_CASE("code_distance: identity, single-level difference, series bound") {
  CodeSpec a{constant_code(2, 2, 2, 1), 1};
  CodeSpec b = a;
  CodeDistance same = code_distance(a, b, 10);
  CHECK(same.partial == 0.0);
  CHECK(same.tail == 0.0);  // settled: equal padding past both prefixes

  CodeSpec c{constant_code(2, 2, 2, 1), 1};
  c.prefix.levels[0].leaves[0] = 2;  // differ at level 1 only
  CodeDistance d = code_distance(a, c, 10);
  CHECK(d.partial == doctest::Approx(1.0 / 3.0));
  CHECK(d.tail == 0.0);

  // partial sums increase in the horizon and stay below 1/m
  CodeSpec e{constant_code(2, 2, 1, 1), 2};
  double prev = 0.0;
  for (std::size_t h = 1; h <= 12; ++h) {
    CodeDistance dh = code_distance(a, e, h);
    CHECK(dh.partial >= prev);
    CHECK(dh.partial + dh.tail <= 0.5 + 1e-15);
    prev = dh.partial;
  }
}

TEST_CASE("tau_alpha_apply: base case and the hand-unrolled double interleave") {
  CodeSpec one{constant_code(2, 2, 1, 1), 1};
  CodeSpec two{constant_code(2, 2, 1, 2), 2};

  FiniteCode alpha1 = constant_code(2, 2, 1, 1);
  CHECK(tau_alpha_apply(alpha1, {one, two}, 3) ==
        tau_apply(1, std::vector<CodeSpec>{one, two}, 3));

  // alpha = (2, (1,2)): tau_alpha(b11,b12,b21,b22)
  //   = tau_2(tau_1(b11,b12), tau_2(b21,b22))
  FiniteCode alpha{2, 2, {SymbolTree{1, {2}}, SymbolTree{2, {1, 2}}}};
  FiniteCode inner1 = tau_apply(1, std::vector<CodeSpec>{one, one}, 3);
  FiniteCode inner2 = tau_apply(2, std::vector<CodeSpec>{two, two}, 3);
  FiniteCode expect =
      tau_apply(2, std::vector<FiniteCode>{inner1, inner2}, 4);
  CHECK(tau_alpha_apply(alpha, {one, one, two, two}, 4) == expect);
  CHECK_THROWS_AS(tau_alpha_apply(alpha, {one, one, two}, 4), UsageError);
}

TEST_CASE("tau_alpha_apply prefix is determined by alpha alone") {
  auto rng = make_rng(23, RngStream::tests);
  std::uniform_int_distribution<int> sym(1, 2);
  FiniteCode alpha{2, 2, {SymbolTree{1, {1}}, SymbolTree{2, {2, 1}}}};
  auto random_args = [&] {
    std::vector<CodeSpec> args;
    for (int j = 0; j < 4; ++j)
      args.push_back(CodeSpec{constant_code(2, 2, 2, sym(rng)), sym(rng)});
    return args;
  };
  FiniteCode r1 = tau_alpha_apply(alpha, random_args(), 5);
  FiniteCode r2 = tau_alpha_apply(alpha, random_args(), 5);
  for (std::size_t j = 0; j < alpha.depth(); ++j) CHECK(r1.levels[j] == r2.levels[j]);
}

TEST_CASE("f_alpha_eval: base case, diagonal halving, unrolled recursion") {
  Gifs s = refsys::s_conn();
  PointTuple ones{{1.0}, {1.0}};
  // k=1: plain map application
  CHECK(f_alpha_eval(s, constant_code(2, 2, 1, 1), ReplicatedTuple{ones, 1})[0] == 0.5);
  // constant-1 diagonal halves per level: f_1 restricted to the diagonal is t/2
  for (std::size_t k = 1; k <= 6; ++k) {
    Point p = f_alpha_eval(s, constant_code(2, 2, k, 1), ReplicatedTuple{ones, k});
    CHECK(p[0] == doctest::Approx(std::pow(0.5, static_cast<double>(k))));
  }
  // depth-2 evaluation equals the recursion unrolled once
  FiniteCode alpha{2, 2, {SymbolTree{1, {2}}, SymbolTree{2, {1, 2}}}};
  PointTuple x{{0.3}, {0.7}};
  Point inner1 = s.maps[0].apply(x);
  Point inner2 = s.maps[1].apply(x);
  Point expect = s.maps[1].apply({inner1, inner2});
  CHECK(f_alpha_eval(s, alpha, ReplicatedTuple{x, 2})[0] ==
        doctest::Approx(expect[0]).epsilon(1e-15));
  CHECK_THROWS_AS(f_alpha_eval(s, alpha, ReplicatedTuple{x, 3}), UsageError);
}

TEST_CASE("coding_point: constant codes hit the diagonal fixed points") {
  Gifs s = refsys::s_conn();
  PointTuple origin{{0.0}, {0.0}};
  CodeSpec ones{constant_code(2, 2, 1, 1), 1};
  CodeSpec twos{constant_code(2, 2, 1, 2), 2};
  CodingPoint p0 = coding_point(s, ones, 20, origin);
  CodingPoint p1 = coding_point(s, twos, 20, origin);
  double envelope = std::pow(0.5, 20.0) * 2.0;
  CHECK(p0.bound == doctest::Approx(envelope));
  CHECK(std::fabs(p0.point[0] - 0.0) <= p0.bound);
  CHECK(std::fabs(p1.point[0] - 1.0) <= p1.bound);
  // limit independence at finite depth: two base tuples within summed bounds
  PointTuple other{{1.0}, {-1.0}};
  CodingPoint q0 = coding_point(s, ones, 20, other);
  CHECK(std::fabs(p0.point[0] - q0.point[0]) <= p0.bound + q0.bound);
  CHECK_THROWS_AS(coding_point(s, ones, 0, origin), UsageError);
}

TEST_CASE("cylinder_set: level-1 piece matches the interval oracle image") {
  Gifs s = refsys::s_conn();
  AttractorApprox a = refsys::run_attractor(s, 0.02);
  FiniteCode alpha = constant_code(2, 2, 1, 1);
  CompactSetApprox cyl = cylinder_set(s, a, alpha, 100000, 0);
  oracle::IntervalSet expect =
      oracle::hutchinson({refsys::oracle_conn()[0]}, {{{0.0, 1.0}}, {{0.0, 1.0}}});
  REQUIRE(expect.size() == 1);  // [0, 1/2]
  double slack = a.cloud.resolution + a.error_bound;
  for (const Point& p : cyl.points) {
    CHECK(p[0] >= expect[0].lo - slack);
    CHECK(p[0] <= expect[0].hi + slack);
  }
  // both ends of [0,1/2] are reached
  double lo = 1e9, hi = -1e9;
  for (const Point& p : cyl.points) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  CHECK(lo <= expect[0].lo + cyl.resolution);
  CHECK(hi >= expect[0].hi - cyl.resolution);
}

TEST_CASE("cylinder diameter obeys the phi^k envelope") {
  Gifs s = refsys::s_conn();
  AttractorApprox a = refsys::run_attractor(s, 0.02);
  auto rng = make_rng(31, RngStream::tests);
  std::uniform_int_distribution<int> sym(1, 2);
  for (std::size_t k = 1; k <= 5; ++k) {
    for (int t = 0; t < 5; ++t) {
      FiniteCode alpha{2, 2, {}};
      for (std::size_t j = 1; j <= k; ++j) {
        SymbolTree tr{j, std::vector<int>(tree_leaf_count(2, j))};
        for (int& sm : tr.leaves) sm = sym(rng);
        alpha.levels.push_back(std::move(tr));
      }
      CompactSetApprox cyl = cylinder_set(s, a, alpha, 500, 0);
      CHECK(diameter(cyl) <=
            a_priori_error(s.phi, diameter(a.cloud), k) + 2.0 * cyl.resolution + 1e-12);
    }
  }
}

TEST_CASE("children cylinders union to the parent within combined resolution") {
  Gifs s = refsys::s_conn();
  AttractorApprox a = refsys::run_attractor(s, 0.05);
  for (const SymbolTree& t : enumerate_trees(2, 2, 1)) {
    FiniteCode parent{2, 2, {t}};
    CompactSetApprox pc = cylinder_set(s, a, parent, 300000, 0);
    std::vector<Point> un;
    double child_res = 0.0;
    for (const FiniteCode& child : code_extensions(parent)) {
      CompactSetApprox cc = cylinder_set(s, a, child, 300000, 0);
      child_res = std::max(child_res, cc.resolution);
      un.insert(un.end(), cc.points.begin(), cc.points.end());
    }
    CompactSetApprox uc{un, child_res};
    CHECK(hausdorff(pc, uc) <= pc.resolution + child_res + 1e-12);
  }
}

TEST_CASE("enumerate_trees: counts, lexicographic order, budget refusal") {
  std::vector<SymbolTree> lvl2 = enumerate_trees(2, 2, 2);
  REQUIRE(lvl2.size() == 4);
  CHECK(lvl2.front().leaves == std::vector<int>{1, 1});
  CHECK(lvl2[1].leaves == std::vector<int>{1, 2});
  CHECK(lvl2.back().leaves == std::vector<int>{2, 2});
  CHECK(enumerate_trees(3, 2, 3).size() == 81);
  CHECK_THROWS_AS(enumerate_trees(2, 2, 6, 1000), ResourceError);
  FiniteCode c = constant_code(2, 2, 1, 1);
  CHECK(code_extensions(c).size() == 4);
  for (const FiniteCode& e : code_extensions(c)) {
    CHECK(e.depth() == 2);
    CHECK(e.levels[0] == c.levels[0]);
  }
}

TEST_CASE("code literals: canonical formatting and parser round trip") {
  FiniteCode c{2, 2, {SymbolTree{1, {1}}, SymbolTree{2, {2, 1}}, SymbolTree{3, {2, 2, 1, 1}}}};
  std::string text = format_code(c);
  CHECK(text == "1;(2,1);((2,2),(1,1))");
  CHECK(parse_code(text, 2, 2) == c);
  CHECK(parse_code(" 1 ; ( 2 , 1 ) ; ( ( 2 , 2 ) , ( 1 , 1 ) ) ", 2, 2) == c);

  CodeSpec spec{c, 2};
  CHECK(format_codespec(spec) == "1;(2,1);((2,2),(1,1))|pad=2");
  CodeSpec back = parse_codespec(format_codespec(spec), 2, 2);
  CHECK(back.prefix == spec.prefix);
  CHECK(back.padding == spec.padding);
}

TEST_CASE("parser round trip on random codes") {
  auto rng = make_rng(37, RngStream::tests);
  for (auto [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {3, 2}, {2, 3}}) {
    std::uniform_int_distribution<int> sym(1, static_cast<int>(n));
    for (int t = 0; t < 10; ++t) {
      FiniteCode c{n, m, {}};
      for (std::size_t j = 1; j <= 3; ++j) {
        SymbolTree tr{j, std::vector<int>(tree_leaf_count(m, j))};
        for (int& s : tr.leaves) s = sym(rng);
        c.levels.push_back(std::move(tr));
      }
      CHECK(parse_code(format_code(c), n, m) == c);
    }
  }
}

TEST_CASE("parser rejects malformed literals with positioned errors") {
  CHECK_THROWS_AS(parse_code("3", 2, 2), UsageError);            // symbol out of range
  CHECK_THROWS_AS(parse_code("1;(2", 2, 2), UsageError);         // missing paren
  CHECK_THROWS_AS(parse_code("1;(2;1)", 2, 2), UsageError);      // bad separator
  CHECK_THROWS_AS(parse_code("", 2, 2), UsageError);             // empty
  CHECK_THROWS_AS(parse_codespec("1", 2, 2), UsageError);        // no pad
  CHECK_THROWS_AS(parse_codespec("1|pad=3", 2, 2), UsageError);  // pad out of range
  CHECK_THROWS_AS(parse_codespec("1|lap=1", 2, 2), UsageError);  // wrong key
  try {
    parse_code("1;(2,", 2, 2);
    FAIL("expected a UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("greedy code recovery descends to a containing cylinder") {
  Gifs s = refsys::s_conn();
  AttractorApprox a = refsys::run_attractor(s, 0.02);
  double threshold = a.cloud.resolution + a.error_bound;
  FiniteCode code = recover_code(s, a, {0.1}, 2, threshold, 4000, 0);
  CHECK(code.depth() == 2);
  CompactSetApprox cyl = cylinder_set(s, a, code, 4000, 0);
  CompactSetApprox probe{{{0.1}}, 0.0};
  CHECK(min_set_distance(probe, cyl) <= threshold + cyl.resolution);
  // 0.1 lies in the left half, so the first symbol must be 1
  CHECK(code.levels[0].leaves == std::vector<int>{1});
  // a point far outside every cylinder is refused
  CHECK_THROWS_AS(recover_code(s, a, {5.0}, 1, 0.01, 4000, 0), DisconnectionError);
}
