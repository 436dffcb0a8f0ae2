#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gifs/code_space.hpp"
#include "gifs/config.hpp"
#include "gifs/geometry.hpp"
#include "gifs/gifs_core.hpp"
#include "gifs/topology.hpp"

namespace gifs {

struct VerifyCheck {
  std::string id;
  bool pass = false;
  double observed = 0.0;
  double bound = 0.0;
};

inline std::string format_check(const VerifyCheck& c) {
  return std::string(c.pass ? "PASS" : "FAIL") + " " + c.id + " " + format_double(c.observed) +
         " " + format_double(c.bound);
}

namespace detail {

inline Point random_point(std::mt19937_64& rng, std::size_t dim, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Point p(dim);
  for (double& c : p) c = u(rng);
  return p;
}

inline CompactSetApprox random_cloud(std::mt19937_64& rng, std::size_t dim, double radius,
                                     std::size_t count) {
  CompactSetApprox c;
  for (std::size_t i = 0; i < count; ++i) c.points.push_back(random_point(rng, dim, radius));
  return c;
}

inline CodeSpec random_codespec(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                std::size_t prefix_depth) {
  std::uniform_int_distribution<int> sym(1, static_cast<int>(n));
  FiniteCode code{n, m, {}};
  for (std::size_t j = 1; j <= prefix_depth; ++j) {
    SymbolTree t{j, std::vector<int>(tree_leaf_count(m, j))};
    for (int& s : t.leaves) s = sym(rng);
    code.levels.push_back(std::move(t));
  }
  return CodeSpec{std::move(code), sym(rng)};
}

}  // namespace detail

// Runs the per-module invariant checks against the configured system and
// returns one machine-readable line per check.
inline std::vector<VerifyCheck> run_verify(const RunConfig& cfg) {
  std::vector<VerifyCheck> out;
  Gifs s = cfg.build_gifs();
  SamplingPolicy policy = cfg.policy();
  auto rng = make_rng(cfg.seed, RngStream::verify);

  double radius = 1.0;
  try {
    radius = std::max(absorbing_ball(s).second, 0.5);
  } catch (const UsageError&) {
  }

  {  // metric axioms on sampled inputs
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      PointTuple a, b, c;
      for (std::size_t j = 0; j < s.order; ++j) {
        a.push_back(detail::random_point(rng, s.dim, radius));
        b.push_back(detail::random_point(rng, s.dim, radius));
        c.push_back(detail::random_point(rng, s.dim, radius));
      }
      worst = std::max(worst, std::fabs(max_dist(a, b) - max_dist(b, a)));
      worst = std::max(worst, max_dist(a, c) - (max_dist(a, b) + max_dist(b, c)));
      CompactSetApprox ca = detail::random_cloud(rng, s.dim, radius, 8);
      CompactSetApprox cb = detail::random_cloud(rng, s.dim, radius, 8);
      CompactSetApprox cc = detail::random_cloud(rng, s.dim, radius, 8);
      worst = std::max(worst, std::fabs(hausdorff(ca, cb) - hausdorff(cb, ca)));
      worst = std::max(worst, hausdorff(ca, cc) - (hausdorff(ca, cb) + hausdorff(cb, cc)));
    }
    out.push_back({"geometry.metric_axioms", worst <= 1e-12, worst, 1e-12});
  }

  {  // phi-contraction of every map
    ContractionReport rep = contraction_check(s, 2000, cfg.seed);
    double worst = 0.0;
    for (double r : rep.max_ratio) worst = std::max(worst, r);
    out.push_back({"core.contraction_ratio", rep.pass, worst, rep.bound});
  }

  try {  // absorbing ball containment
    auto [center, r] = absorbing_ball(s);
    double worst = 0.0;
    std::uniform_real_distribution<double> u(-r, r);
    for (int t = 0; t < 500; ++t) {
      PointTuple x(s.order, Point(s.dim));
      for (auto& p : x)
        for (auto& c : p) c = u(rng);
      bool inside = true;
      for (const auto& p : x) inside = inside && norm(p) <= r;
      if (!inside) continue;
      for (const GifsMap& f : s.maps) worst = std::max(worst, norm(f.apply(x)) - r);
    }
    out.push_back({"core.absorbing_ball", worst <= 1e-9, worst, 1e-9});
  } catch (const UsageError&) {
  }

  AttractorApprox a = attractor_iterate(s, cfg.seed_clouds(), cfg.tolerance,
                                        cfg.max_iterations, policy);
  out.push_back({"core.fixed_point_residual", a.residual <= cfg.tolerance + a.cloud.resolution,
                 a.residual, cfg.tolerance + a.cloud.resolution});

  {  // seed independence: rerun from the grid over the absorbing box
    std::vector<std::pair<double, double>> box(s.dim, {-radius, radius});
    CompactSetApprox alt = grid_cloud(box, std::max(radius / 4.0, cfg.decimate_cell));
    AttractorApprox b = attractor_iterate(s, std::vector<CompactSetApprox>(s.order, alt),
                                          cfg.tolerance, cfg.max_iterations, policy);
    double h = hausdorff(a.cloud, b.cloud);
    double bound = 2.0 * (a.cloud.resolution + b.cloud.resolution) + 2.0 * cfg.tolerance +
                   a.error_bound + b.error_bound;
    out.push_back({"core.seed_independence", h <= bound, h, bound});
  }

  {  // operator contraction on sampled cloud pairs
    double worst = 0.0, worst_bound = 0.0;
    for (int t = 0; t < 10; ++t) {
      CompactSetApprox ca = detail::random_cloud(rng, s.dim, radius, 12);
      CompactSetApprox cb = detail::random_cloud(rng, s.dim, radius, 12);
      CompactSetApprox fa = hutchinson(s, std::vector<CompactSetApprox>(s.order, ca), policy);
      CompactSetApprox fb = hutchinson(s, std::vector<CompactSetApprox>(s.order, cb), policy);
      double lhs = hausdorff(fa, fb);
      double rhs = s.phi(hausdorff(ca, cb)) + 2.0 * std::max(fa.resolution, fb.resolution);
      worst = std::max(worst, lhs - rhs);
      worst_bound = std::max(worst_bound, rhs);
    }
    out.push_back({"core.operator_contraction", worst <= 1e-12, worst, 1e-12});
  }

  {  // hutchinson on singletons is exactly the n map images
    PointTuple x;
    for (std::size_t j = 0; j < s.order; ++j) x.push_back(detail::random_point(rng, s.dim, radius));
    std::vector<CompactSetApprox> singles;
    for (const Point& p : x) singles.push_back(CompactSetApprox{{p}, 0.0});
    SamplingPolicy exact = policy;
    exact.decimate_cell = 0.0;
    CompactSetApprox img = hutchinson(s, singles, exact);
    double worst = img.points.size() <= s.n() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < s.n(); ++i) {
      CompactSetApprox one{{s.maps[i].apply(x)}, 0.0};
      worst = std::max(worst, min_set_distance(one, img));
    }
    out.push_back({"core.singleton_image", worst == 0.0, worst, 0.0});
  }

  {  // Lip(tau_i) <= m/(m+1) through partial sums with tail brackets
    double worst = 0.0;
    double lip = static_cast<double>(s.order) / (static_cast<double>(s.order) + 1.0);
    std::uniform_int_distribution<int> sym(1, static_cast<int>(s.n()));
    for (int t = 0; t < 200; ++t) {
      std::vector<CodeSpec> as, bs;
      for (std::size_t j = 0; j < s.order; ++j) {
        as.push_back(detail::random_codespec(rng, s.n(), s.order, 3));
        bs.push_back(detail::random_codespec(rng, s.n(), s.order, 3));
      }
      int i = sym(rng);
      std::size_t horizon = 1;
      while (horizon < 20 && std::pow(static_cast<double>(s.order),
                                      static_cast<double>(horizon)) <= 100000.0)
        ++horizon;
      CodeSpec ta{tau_apply(i, as, horizon), 1};
      CodeSpec tb{tau_apply(i, bs, horizon), 1};
      CodeDistance lhs = code_distance(ta, tb, horizon);
      double rhs = 0.0;
      for (std::size_t j = 0; j < s.order; ++j) {
        CodeDistance d = code_distance(as[j], bs[j], horizon);
        rhs = std::max(rhs, d.partial + d.tail);
      }
      worst = std::max(worst, lhs.partial - (lip * rhs + lhs.tail));
    }
    out.push_back({"code.tau_lipschitz", worst <= 1e-12, worst, 1e-12});
  }

  {  // cylinder diameter decay against the phi^k envelope
    double worst = 0.0;
    double diam_a = diameter(a.cloud);
    for (std::size_t k = 1; k <= 4; ++k) {
      for (int t = 0; t < 5; ++t) {
        CodeSpec c = detail::random_codespec(rng, s.n(), s.order, k);
        CompactSetApprox cyl = cylinder_set(s, a, c.truncate(k), 200, cfg.seed + t);
        double bound = a_priori_error(s.phi, diam_a, k) + 2.0 * cyl.resolution;
        worst = std::max(worst, diameter(cyl) - bound);
      }
    }
    out.push_back({"code.diameter_decay", worst <= 1e-12, worst, 1e-12});
  }

  try {  // child-union decomposition, exhaustive when the level is tiny
    double worst = 0.0;
    for (FiniteCode& parent :
         [&] {
           std::vector<FiniteCode> roots;
           for (SymbolTree& t : enumerate_trees(s.n(), s.order, 1, 64))
             roots.push_back(FiniteCode{s.n(), s.order, {std::move(t)}});
           return roots;
         }()) {
      CompactSetApprox pc = cylinder_set(s, a, parent, 400, cfg.seed);
      std::vector<Point> un;
      double child_res = 0.0;
      for (const FiniteCode& child : code_extensions(parent, 64)) {
        CompactSetApprox cc = cylinder_set(s, a, child, 400, cfg.seed);
        child_res = std::max(child_res, cc.resolution);
        un.insert(un.end(), cc.points.begin(), cc.points.end());
      }
      CompactSetApprox uc{std::move(un), child_res};
      worst = std::max(worst, hausdorff(pc, uc) - (pc.resolution + child_res));
    }
    out.push_back({"code.decomposition", worst <= 1e-12, worst, 1e-12});
  } catch (const ResourceError&) {
  }

  {  // semiconjugacy f_i . g_m = g . tau_i at finite depth
    std::size_t depth = 1;
    while (depth < 10 &&
           std::pow(static_cast<double>(s.order), static_cast<double>(depth + 1)) <= 60000.0)
      ++depth;
    PointTuple x(s.order, Point(s.dim, 0.0));
    std::uniform_int_distribution<int> sym(1, static_cast<int>(s.n()));
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      std::vector<CodeSpec> args;
      for (std::size_t j = 0; j < s.order; ++j)
        args.push_back(detail::random_codespec(rng, s.n(), s.order, 3));
      int i = sym(rng);
      PointTuple gm;
      double comp_bound = 0.0;
      for (const CodeSpec& c : args) {
        CodingPoint cp = coding_point(s, c, depth, x);
        comp_bound = std::max(comp_bound, cp.bound);
        gm.push_back(cp.point);
      }
      Point lhs = s.maps[i - 1].apply(gm);
      CodeSpec tc{tau_apply(i, args, depth), args.front().padding};
      CodingPoint rhs = coding_point(s, tc, depth, x);
      double bound = s.phi(comp_bound) + rhs.bound;
      worst = std::max(worst, euclid(lhs, rhs.point) - bound);
    }
    out.push_back({"code.semiconjugacy", worst <= 1e-12, worst, 1e-12});
  }

  if (cfg.eps_connect > 0.0 && cfg.eps_separate >= cfg.eps_connect) {
    VerdictResult v = connectedness_verdict(s, a, cfg.eps_connect, cfg.eps_separate, policy);
    if (v.verdict == Verdict::Disconnected) {
      out.push_back({"topology.verdict_gap_sound", v.gap > cfg.eps_separate, v.gap,
                     cfg.eps_separate});
    } else {
      out.push_back({"topology.verdict_computed", true,
                     v.verdict == Verdict::Connected ? 1.0 : 0.0, 1.0});
    }
  }

  try {  // per-level max diameter nonincreasing and under the envelope
    ProperFamilyApprox fam = proper_family_build(s, a, 2, 300, cfg.seed, 5000);
    double worst = 0.0;
    double prev = diameter(a.cloud) + 2.0 * (a.cloud.resolution + a.error_bound);
    for (std::size_t k = 0; k < fam.levels.size(); ++k) {
      double env = a_priori_error(s.phi, diameter(a.cloud), k + 1) +
                   2.0 * fam.levels[k].front().second.resolution;
      worst = std::max(worst, fam.max_diameter[k] - std::min(prev, env));
      prev = fam.max_diameter[k];
    }
    out.push_back({"topology.family_diameter_decay", worst <= 1e-12, worst, 1e-12});
  } catch (const ResourceError&) {
  }

  return out;
}

}  // namespace gifs
