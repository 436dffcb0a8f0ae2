#include <doctest.h>

#include "gifs/gifs_core.hpp"
#include "interval_oracle.hpp"
#include "reference_systems.hpp"

using namespace gifs;

namespace {

// Every cloud point inside the interval set inflated by slack, and every
// interval endpoint grid reachable within slack: an oracle-backed Hausdorff
// bound without trusting the library's own metric code.
void check_cloud_matches_intervals(const CompactSetApprox& cloud,
                                   const oracle::IntervalSet& target, double slack) {
  for (const Point& p : cloud.points) {
    bool inside = false;
    for (const oracle::Interval& iv : target)
      inside = inside || (p[0] >= iv.lo - slack && p[0] <= iv.hi + slack);
    CHECK(inside);
  }
  for (const oracle::Interval& iv : target) {
    for (double x = iv.lo; x <= iv.hi + 1e-12; x += std::max((iv.hi - iv.lo) / 64.0, 1e-9)) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& p : cloud.points) best = std::min(best, std::fabs(p[0] - x));
      CHECK(best <= slack);
    }
  }
}

}  // namespace

TEST_CASE("linear phi: formula, composition, tail sum, domain guards") {
  ComparisonFunction phi = ComparisonFunction::linear(0.5);
  CHECK(phi(1.0) == 0.5);
  CHECK(phi(0.0) == 0.0);
  CHECK(phi.iterate(1.0, 3) == doctest::Approx(0.125));
  CHECK(phi.iterate(2.0, 0) == 2.0);
  CHECK(phi.tail_sum(1.0) == doctest::Approx(1.0));  // sum 0.5 + 0.25 + ...
  CHECK_THROWS_AS(phi(-1.0), UsageError);
  CHECK_THROWS_AS(ComparisonFunction::linear(1.0), UsageError);
  CHECK_THROWS_AS(ComparisonFunction::linear(-0.1), UsageError);
}

TEST_CASE("tabulated phi: upper step envelope, nondecreasing, below identity") {
  ComparisonFunction phi =
      ComparisonFunction::tabulated({{0.5, 0.2}, {1.0, 0.4}, {2.0, 0.5}});
  CHECK(phi(0.3) == 0.2);   // first sample at or above t
  CHECK(phi(0.5) == 0.2);
  CHECK(phi(0.7) == 0.4);
  CHECK(phi(2.0) == 0.5);
  CHECK(phi(4.0) == doctest::Approx(1.0));  // linear continuation, slope 0.25
  CHECK(phi(0.0) == 0.0);
  // k-fold composition equals sequential evaluation
  double t = 1.7;
  for (std::size_t k = 0; k <= 5; ++k) {
    CHECK(phi.iterate(1.7, k) == doctest::Approx(t));
    t = phi(t);
  }
  CHECK_THROWS_AS(ComparisonFunction::tabulated({}), UsageError);
  CHECK_THROWS_AS(ComparisonFunction::tabulated({{1.0, 1.0}}), UsageError);
  CHECK_THROWS_AS(ComparisonFunction::tabulated({{0.0, 0.1}}), UsageError);
  CHECK_THROWS_AS(ComparisonFunction::tabulated({{0.5, 0.4}, {1.0, 0.3}}), UsageError);
}

TEST_CASE("opnorm: 1x1, diagonal, and rotation-scaling matrices") {
  CHECK(opnorm({{-3.0}}) == 3.0);
  CHECK(opnorm({{2.0, 0.0}, {0.0, 0.5}}) == doctest::Approx(2.0));
  double s = 0.7, c = std::cos(0.3), n = std::sin(0.3);
  CHECK(opnorm({{s * c, -s * n}, {s * n, s * c}}) == doctest::Approx(s));
  CHECK(opnorm({{0.0, 0.0}, {0.0, 0.0}}) == 0.0);
}

TEST_CASE("map_apply: reference formulas and shape guards") {
  Gifs s = refsys::s_conn();
  CHECK(s.maps[0].apply({{1.0}, {1.0}})[0] == 0.5);
  CHECK(s.maps[1].apply({{0.0}, {0.0}})[0] == 0.5);
  CHECK_THROWS_AS(s.maps[0].apply({{1.0}}), UsageError);
  CHECK_THROWS_AS(s.maps[0].apply({{1.0, 2.0}, {0.0, 0.0}}), UsageError);
}

TEST_CASE("map_apply matches a naive loop oracle on random 2x2 systems") {
  auto rng = make_rng(3, RngStream::tests);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Matrix a{{u(rng), u(rng)}, {u(rng), u(rng)}};
    Matrix b{{u(rng), u(rng)}, {u(rng), u(rng)}};
    Point off{u(rng), u(rng)};
    GifsMap f = GifsMap::make_affine({a, b}, off);
    Point x{u(rng), u(rng)}, y{u(rng), u(rng)};
    Point got = f.apply({x, y});
    for (int i = 0; i < 2; ++i) {
      double expect = off[i];
      for (int j = 0; j < 2; ++j) expect += a[i][j] * x[j] + b[i][j] * y[j];
      CHECK(got[i] == doctest::Approx(expect).epsilon(1e-14));
    }
  }
}

TEST_CASE("hutchinson on singleton seeds yields exactly the map images") {
  Gifs s = refsys::s_conn();
  CompactSetApprox zero{{{0.0}}, 0.0};
  CompactSetApprox img = hutchinson(s, {zero, zero});
  REQUIRE(img.points.size() == 2);
  CHECK(img.points[0][0] == 0.0);
  CHECK(img.points[1][0] == 0.5);
}

TEST_CASE("hutchinson image of [0,1] grids matches the interval oracle") {
  CompactSetApprox grid = grid_cloud({{0.0, 1.0}}, 0.01);
  SUBCASE("connected system maps onto [0,1]") {
    Gifs s = refsys::s_conn();
    CompactSetApprox img = hutchinson(s, {grid, grid});
    oracle::IntervalSet expect =
        oracle::hutchinson(refsys::oracle_conn(), {{{0.0, 1.0}}, {{0.0, 1.0}}});
    check_cloud_matches_intervals(img, expect, 0.02);
  }
  SUBCASE("disconnected system maps onto [0,1/3] u [2/3,1]") {
    Gifs s = refsys::s_disc();
    CompactSetApprox img = hutchinson(s, {grid, grid});
    oracle::IntervalSet expect =
        oracle::hutchinson(refsys::oracle_disc(), {{{0.0, 1.0}}, {{0.0, 1.0}}});
    REQUIRE(expect.size() == 2);
    check_cloud_matches_intervals(img, expect, 0.02);
  }
}

TEST_CASE("map_image propagates resolution through phi") {
  Gifs s = refsys::s_conn();
  CompactSetApprox in{{{0.0}, {1.0}}, 0.2};
  CompactSetApprox img = map_image(s, 0, {in, in}, {});
  CHECK(img.resolution == doctest::Approx(0.1));  // phi(0.2)
  CHECK_THROWS_AS(map_image(s, 2, {in, in}, {}), UsageError);
  CHECK_THROWS_AS(map_image(s, 0, {in}, {}), UsageError);
}

TEST_CASE("subsampled map_image charges cover slack; exhaustive_only refuses") {
  Gifs s = refsys::s_conn();
  CompactSetApprox big = grid_cloud({{0.0, 1.0}}, 1e-3);
  SamplingPolicy tight;
  tight.budget = 10000;
  tight.sample_count = 2500;
  CompactSetApprox img = map_image(s, 0, {big, big}, tight);
  CHECK(img.resolution > s.phi(big.resolution));  // slack strictly added
  CHECK(img.points.size() <= tight.budget);
  SamplingPolicy demand = tight;
  demand.exhaustive_only = true;
  CHECK_THROWS_AS(map_image(s, 0, {big, big}, demand), ResourceError);
}

TEST_CASE("decimation keeps one representative per cell and adds the cell term") {
  Gifs s = refsys::s_conn();
  CompactSetApprox grid = grid_cloud({{0.0, 1.0}}, 0.01);
  SamplingPolicy policy;
  policy.decimate_cell = 0.1;
  CompactSetApprox img = hutchinson(s, {grid, grid}, policy);
  CHECK(img.points.size() <= 12);  // [0,1] at 0.1 cells
  for (const Point& p : img.points) {
    double frac = p[0] / 0.1 - std::floor(p[0] / 0.1);
    CHECK(frac == doctest::Approx(0.5));  // cell centers
  }
}

TEST_CASE("attractor_iterate reaches the oracle-certified fixed sets") {
  SUBCASE("connected: [0,1]") {
    AttractorApprox a = refsys::run_attractor(refsys::s_conn(), 5e-3);
    CHECK(a.residual <= 1e-4);
    CHECK(a.iterations > 0);
    check_cloud_matches_intervals(a.cloud, refsys::conn_attractor_intervals(),
                                  a.cloud.resolution + a.error_bound);
  }
  SUBCASE("disconnected: [0,1/3] u [2/3,1]") {
    AttractorApprox a = refsys::run_attractor(refsys::s_disc(), 5e-3);
    CHECK(a.residual <= 1e-4);
    check_cloud_matches_intervals(a.cloud, refsys::disc_attractor_intervals(),
                                  a.cloud.resolution + a.error_bound);
  }
}

TEST_CASE("attractor_iterate from a fixed-point cloud stops immediately") {
  Gifs s = refsys::s_conn();
  SamplingPolicy policy;
  policy.decimate_cell = 5e-3;
  AttractorApprox a = refsys::run_attractor(s, 5e-3);
  std::vector<CompactSetApprox> seeds(2, a.cloud);
  AttractorApprox again = attractor_iterate(s, seeds, 1e-4, 100, policy);
  CHECK(again.iterations == 1);
  CHECK(again.residual <= 1e-4);
}

TEST_CASE("attractor_iterate with max_iter 0 returns the seed unchanged") {
  Gifs s = refsys::s_conn();
  CompactSetApprox seed{{{0.25}}, 0.0};
  AttractorApprox a = attractor_iterate(s, {seed, seed}, 1e-4, 0);
  CHECK(a.iterations == 0);
  REQUIRE(a.cloud.points.size() == 1);
  CHECK(a.cloud.points[0][0] == 0.25);
  CHECK(a.residual == fixed_point_residual(s, a.cloud));
}

TEST_CASE("non-contractive system triggers the divergence probation") {
  Gifs s;
  s.order = 1;
  s.dim = 1;
  s.phi = ComparisonFunction::linear(0.9);
  s.maps.push_back(GifsMap::make_affine({{{2.0}}}, {1.0}));  // expanding
  CompactSetApprox seed{{{1.0}}, 0.0};
  CHECK_THROWS_AS(attractor_iterate(s, {seed}, 1e-6, 50), DivergenceError);
}

TEST_CASE("fixed_point_residual: direct value on a singleton") {
  Gifs s = refsys::s_conn();
  CompactSetApprox zero{{{0.0}}, 0.0};
  CHECK(fixed_point_residual(s, zero) == 0.5);  // image {0, 0.5} vs {0}
}

TEST_CASE("seed independence within the stated bound") {
  Gifs s = refsys::s_conn();
  SamplingPolicy policy;
  policy.decimate_cell = 5e-3;
  double tol = 1e-4;
  AttractorApprox a = refsys::run_attractor(s, 5e-3, tol);
  CompactSetApprox alt = grid_cloud({{-1.0, 1.0}}, 0.05);
  AttractorApprox b = attractor_iterate(s, {alt, alt}, tol, 100, policy);
  CHECK(hausdorff(a.cloud, b.cloud) <=
        2.0 * (a.cloud.resolution + b.cloud.resolution) + 2.0 * tol);
}

TEST_CASE("operator contraction on sampled cloud pairs") {
  Gifs s = refsys::s_conn();
  auto rng = make_rng(5, RngStream::tests);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    CompactSetApprox a, b;
    for (int i = 0; i < 15; ++i) {
      a.points.push_back({u(rng)});
      b.points.push_back({u(rng)});
    }
    CompactSetApprox fa = hutchinson(s, {a, a});
    CompactSetApprox fb = hutchinson(s, {b, b});
    CHECK(hausdorff(fa, fb) <= s.phi(hausdorff(a, b)) + 1e-12);
  }
}

TEST_CASE("absorbing_ball: reference radii and guards") {
  auto [c1, r1] = absorbing_ball(refsys::s_conn());
  CHECK(c1 == Point{0.0});
  CHECK(r1 == doctest::Approx(1.0));  // (1/2)/(1 - 1/2)
  auto [c2, r2] = absorbing_ball(refsys::s_disc());
  CHECK(r2 == doctest::Approx(1.0));  // (2/3)/(1 - 1/3)
  Gifs zero_off = refsys::s_conn();
  zero_off.maps[1] = GifsMap::make_affine({{{0.25}}, {{0.25}}}, {0.0});
  CHECK(absorbing_ball(zero_off).second == 0.0);
  Gifs expanding;
  expanding.order = 1;
  expanding.dim = 1;
  expanding.maps.push_back(GifsMap::make_affine({{{2.0}}}, {0.0}));
  CHECK_THROWS_AS(absorbing_ball(expanding), UsageError);
}

TEST_CASE("absorbing ball containment by sampling") {
  for (const Gifs& s : {refsys::s_conn(), refsys::s_disc()}) {
    auto [center, r] = absorbing_ball(s);
    auto rng = make_rng(9, RngStream::tests);
    std::uniform_real_distribution<double> u(-r, r);
    for (int t = 0; t < 200; ++t) {
      PointTuple x{{u(rng)}, {u(rng)}};
      for (const GifsMap& f : s.maps) CHECK(std::fabs(f.apply(x)[0]) <= r + 1e-12);
    }
  }
}

TEST_CASE("contraction_check passes honest rates and fails understated ones") {
  ContractionReport ok = contraction_check(refsys::s_conn(), 500, 1);
  CHECK(ok.pass);
  for (double r : ok.max_ratio) CHECK(r <= 1.0 + 1e-9);

  Gifs lying = refsys::s_conn();
  lying.phi = ComparisonFunction::linear(0.25);  // true factor is 1/2
  ContractionReport bad = contraction_check(lying, 500, 1);
  CHECK_FALSE(bad.pass);

  Gifs constant;
  constant.order = 1;
  constant.dim = 1;
  constant.phi = ComparisonFunction::linear(0.5);
  constant.maps.push_back(GifsMap::make_affine({{{0.0}}}, {3.0}));
  ContractionReport c = contraction_check(constant, 100, 1);
  CHECK(c.pass);
  CHECK(c.max_ratio[0] == 0.0);
}

TEST_CASE("a_priori_error closed form and base cases") {
  ComparisonFunction phi = ComparisonFunction::linear(0.5);
  CHECK(a_priori_error(phi, 3.0, 0) == 3.0);
  CHECK(a_priori_error(phi, 3.0, 4) == doctest::Approx(3.0 / 16.0));
}

TEST_CASE("gifs validation rejects inconsistent shapes") {
  Gifs s = refsys::s_conn();
  s.maps.push_back(GifsMap::make_affine({{{0.5}}}, {0.0}));  // order-1 intruder
  CHECK_THROWS_AS(s.validate(), UsageError);
  Gifs empty;
  empty.order = 1;
  empty.dim = 1;
  CHECK_THROWS_AS(empty.validate(), UsageError);
}
