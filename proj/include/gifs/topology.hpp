#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gifs/code_space.hpp"
#include "gifs/errors.hpp"
#include "gifs/geometry.hpp"
#include "gifs/gifs_core.hpp"

namespace gifs {

// Pairwise overlap structure of a labeled family of clouds: an edge joins
// two members whose min_set_distance is within the gap threshold.
struct OverlapGraph {
  std::vector<std::string> labels;
  std::vector<CompactSetApprox> sets;
  double threshold = 0.0;
  std::vector<std::vector<std::size_t>> adjacency;  // sorted by label order

  std::size_t size() const { return sets.size(); }
};

inline OverlapGraph overlap_graph(std::vector<std::string> labels,
                                  std::vector<CompactSetApprox> sets, double threshold) {
  if (sets.empty()) throw UsageError("overlap_graph: empty family");
  if (labels.size() != sets.size()) throw UsageError("overlap_graph: label/set count mismatch");
  if (threshold < 0.0) throw UsageError("overlap_graph: negative threshold");
  OverlapGraph g{std::move(labels), std::move(sets), threshold, {}};
  g.adjacency.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (min_set_distance(g.sets[i], g.sets[j]) <= threshold) {
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
      }
  for (auto& adj : g.adjacency)
    std::sort(adj.begin(), adj.end(),
              [&](std::size_t a, std::size_t b) { return g.labels[a] < g.labels[b]; });
  return g;
}

inline std::vector<std::vector<std::size_t>> components(const OverlapGraph& g) {
  std::vector<int> comp(g.size(), -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < g.size(); ++start) {
    if (comp[start] >= 0) continue;
    std::vector<std::size_t> cur;
    std::deque<std::size_t> queue{start};
    comp[start] = static_cast<int>(out.size());
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      cur.push_back(v);
      for (std::size_t w : g.adjacency[v])
        if (comp[w] < 0) {
          comp[w] = comp[v];
          queue.push_back(w);
        }
    }
    out.push_back(std::move(cur));
  }
  return out;
}

inline bool is_connected(const OverlapGraph& g) { return components(g).size() == 1; }

// An ordered run of family members whose consecutive pairs overlap within
// the threshold, with a witness point near each junction.
struct Chain {
  std::vector<std::size_t> nodes;
  std::vector<Point> witnesses;  // one per consecutive pair
};

// Shortest chain by BFS, ties broken by node label order. from == to
// yields the duplicated-node chain of length 2.
inline Chain find_chain(const OverlapGraph& g, std::size_t from, std::size_t to) {
  if (from >= g.size() || to >= g.size()) throw UsageError("find_chain: node out of range");
  Chain chain;
  if (from == to) {
    chain.nodes = {from, to};
  } else {
    std::vector<std::size_t> parent(g.size(), g.size());
    std::vector<bool> seen(g.size(), false);
    std::deque<std::size_t> queue{from};
    seen[from] = true;
    while (!queue.empty() && !seen[to]) {
      std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w : g.adjacency[v])
        if (!seen[w]) {
          seen[w] = true;
          parent[w] = v;
          queue.push_back(w);
        }
    }
    if (!seen[to]) {
      std::string who;
      for (std::size_t v = 0; v < g.size(); ++v)
        if (seen[v]) who += (who.empty() ? "" : ",") + g.labels[v];
      throw DisconnectionError("no chain from " + g.labels[from] + " to " + g.labels[to] +
                               "; reachable component: {" + who + "}");
    }
    for (std::size_t v = to; v != from; v = parent[v]) chain.nodes.push_back(v);
    chain.nodes.push_back(from);
    std::reverse(chain.nodes.begin(), chain.nodes.end());
  }
  for (std::size_t i = 0; i + 1 < chain.nodes.size(); ++i) {
    auto [p, q] = closest_pair(g.sets[chain.nodes[i]], g.sets[chain.nodes[i + 1]]);
    Point mid(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) mid[c] = 0.5 * (p[c] + q[c]);
    chain.witnesses.push_back(std::move(mid));
  }
  return chain;
}

enum class Verdict { Connected, Disconnected, Unknown };

struct VerdictResult {
  Verdict verdict = Verdict::Unknown;
  double gap = 0.0;  // certified bipartition gap when Disconnected
};

inline std::string format_verdict(const VerdictResult& v) {
  switch (v.verdict) {
    case Verdict::Connected:
      return "CONNECTED";
    case Verdict::Disconnected:
      return "DISCONNECTED gap=" + format_double(v.gap);
    default:
      return "UNKNOWN";
  }
}

// Chain criterion on the level-1 pieces f_i(A x ... x A): connected when the
// overlap graph at eps_connect is connected, disconnected when some
// bipartition's cross gap exceeds eps_separate, otherwise unknown.
inline VerdictResult connectedness_verdict(const Gifs& s, const AttractorApprox& a,
                                           double eps_connect, double eps_separate,
                                           const SamplingPolicy& policy = {}) {
  if (eps_connect > eps_separate)
    throw UsageError("connectedness_verdict: eps_connect must be <= eps_separate");
  std::vector<CompactSetApprox> rep(s.order, a.cloud);
  std::vector<std::string> labels;
  std::vector<CompactSetApprox> pieces;
  for (std::size_t i = 0; i < s.n(); ++i) {
    labels.push_back(std::to_string(i + 1));
    pieces.push_back(map_image(s, i, rep, policy));
  }
  OverlapGraph gc = overlap_graph(labels, pieces, eps_connect);
  if (is_connected(gc)) return {Verdict::Connected, 0.0};
  OverlapGraph gs = overlap_graph(std::move(labels), std::move(pieces), eps_separate);
  auto comps = components(gs);
  if (comps.size() > 1) {
    // bipartition: first component against the rest
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t v : comps.front())
      for (std::size_t c = 1; c < comps.size(); ++c)
        for (std::size_t w : comps[c])
          gap = std::min(gap, min_set_distance(gs.sets[v], gs.sets[w]));
    return {Verdict::Disconnected, gap};
  }
  return {Verdict::Unknown, 0.0};
}

// Cylinder approximations indexed by code, level by level; the computable
// shadow of a proper family adjusted to the code tree.
struct ProperFamilyApprox {
  AttractorApprox root;
  std::vector<std::vector<std::pair<FiniteCode, CompactSetApprox>>> levels;
  std::vector<double> max_diameter;  // per level, depth 1..K
};

inline ProperFamilyApprox proper_family_build(const Gifs& s, const AttractorApprox& a,
                                              std::size_t depth, std::size_t sample_count,
                                              std::uint64_t rng_seed,
                                              std::size_t node_budget = 100000) {
  s.validate();
  if (depth < 1) throw UsageError("proper_family_build: depth must be >= 1");
  ProperFamilyApprox fam;
  fam.root = a;
  std::vector<FiniteCode> frontier;
  for (std::size_t k = 1; k <= depth; ++k) {
    std::vector<FiniteCode> next;
    if (k == 1) {
      for (SymbolTree& t : enumerate_trees(s.n(), s.order, 1, node_budget))
        next.push_back(FiniteCode{s.n(), s.order, {std::move(t)}});
    } else {
      double children = std::pow(static_cast<double>(s.n()),
                                 static_cast<double>(tree_leaf_count(s.order, k)));
      if (children * static_cast<double>(frontier.size()) > static_cast<double>(node_budget))
        throw ResourceError("proper_family_build: level " + std::to_string(k) +
                            " exceeds the node budget");
      for (const FiniteCode& c : frontier)
        for (FiniteCode& e : code_extensions(c, node_budget)) next.push_back(std::move(e));
    }
    std::vector<std::pair<FiniteCode, CompactSetApprox>> level;
    double dmax = 0.0;
    for (FiniteCode& c : next) {
      CompactSetApprox cyl = cylinder_set(s, a, c, sample_count, rng_seed);
      dmax = std::max(dmax, diameter(cyl));
      level.emplace_back(c, std::move(cyl));
    }
    fam.levels.push_back(std::move(level));
    fam.max_diameter.push_back(dmax);
    frontier = std::move(next);
  }
  return fam;
}

// Chain of same-depth cylinders from one containing x to one containing y,
// all of diameter <= eps.
inline Chain eps_chainable(const std::vector<std::pair<FiniteCode, CompactSetApprox>>& level,
                           const Point& x, const Point& y, double eps, double threshold) {
  if (level.empty()) throw UsageError("eps_chainable: empty level");
  std::vector<std::string> labels;
  std::vector<CompactSetApprox> sets;
  for (const auto& [code, cloud] : level) {
    if (diameter(cloud) > eps)
      throw UsageError("eps_chainable: set " + format_code(code) + " has diameter > eps");
    labels.push_back(format_code(code));
    sets.push_back(cloud);
  }
  CompactSetApprox px{{x}, 0.0}, py{{y}, 0.0};
  std::optional<std::size_t> from, to;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (!from && min_set_distance(px, sets[i]) <= threshold) from = i;
    if (!to && min_set_distance(py, sets[i]) <= threshold) to = i;
  }
  if (!from) throw UsageError("eps_chainable: x not within threshold of any set");
  if (!to) throw UsageError("eps_chainable: y not within threshold of any set");
  return find_chain(overlap_graph(std::move(labels), std::move(sets), threshold), *from, *to);
}

// A division 0 = y_0 < ... < y_l = 1.
struct Division {
  std::vector<double> ys;

  double mesh() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) m = std::max(m, ys[i + 1] - ys[i]);
    return m;
  }

  void validate() const {
    if (ys.size() < 2 || ys.front() != 0.0 || ys.back() != 1.0)
      throw UsageError("division must start at 0 and end at 1");
    for (std::size_t i = 0; i + 1 < ys.size(); ++i)
      if (!(ys[i] < ys[i + 1])) throw UsageError("division must be strictly increasing");
  }
};

// A division with point assignments: one level of the arc construction.
struct ArcApprox {
  Division division;
  std::vector<Point> points;  // parallel to division.ys
  std::size_t level = 0;
  double quality = 0.0;  // per-interval diameter bound a_n
};

struct ArcBuildResult {
  std::vector<ArcApprox> levels;  // levels[0] is the two-point base arc

  const ArcApprox& final() const { return levels.back(); }
};

inline void write_arc(std::ostream& os, const ArcApprox& arc) {
  os << "# level=" << arc.level << " a_n=" << format_double(arc.quality) << "\n";
  for (std::size_t i = 0; i < arc.division.ys.size(); ++i) {
    os << format_double(arc.division.ys[i]);
    for (double c : arc.points[i]) os << ',' << format_double(c);
    os << "\n";
  }
}

namespace detail {

struct ArcInterval {
  std::size_t lo = 0, hi = 0;             // indices into the division
  std::optional<FiniteCode> node;         // depth = level; empty at the root
};

}  // namespace detail

// The inductive arc construction: start with the two coding endpoints,
// then at each level replace every interval by a chain among its node's
// children, inserting uniformly distributed junction points.
inline ArcBuildResult build_arc(const Gifs& s, const AttractorApprox& a,
                                const CodeSpec& x_code, const CodeSpec& y_code,
                                std::size_t max_level, double threshold,
                                std::size_t sample_count, std::uint64_t rng_seed,
                                std::size_t child_budget = 100000) {
  s.validate();
  a.cloud.validate();
  if (threshold < 0.0) throw UsageError("build_arc: negative threshold");

  VerdictResult verdict = connectedness_verdict(s, a, threshold, threshold);
  if (verdict.verdict != Verdict::Connected)
    throw DisconnectionError("build_arc: level-1 pieces not chain-connected at the threshold");

  // coding depth capped so the m^depth evaluation stays affordable
  std::size_t coding_depth = 1;
  while (coding_depth < 20 &&
         std::pow(static_cast<double>(s.order), static_cast<double>(coding_depth + 1)) <= 1e6)
    ++coding_depth;
  PointTuple origin(s.order, Point(s.dim, 0.0));
  Point px = coding_point(s, x_code, coding_depth, origin).point;
  Point py = coding_point(s, y_code, coding_depth, origin).point;

  ArcBuildResult result;
  double carried = a.cloud.resolution + a.error_bound;
  ArcApprox base;
  base.division.ys = {0.0, 1.0};
  base.points = {px, py};
  base.level = 0;
  base.quality = diameter(a.cloud) + 2.0 * carried;
  result.levels.push_back(base);

  std::vector<detail::ArcInterval> intervals{{0, 1, std::nullopt}};
  std::vector<double> ys = base.division.ys;
  std::vector<Point> pts = base.points;

  std::map<std::string, CompactSetApprox> cache;
  auto cylinder_of = [&](const FiniteCode& code) -> const CompactSetApprox& {
    std::string key = format_code(code);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, cylinder_set(s, a, code, sample_count, rng_seed)).first;
    return it->second;
  };

  for (std::size_t level = 1; level <= max_level; ++level) {
    std::vector<double> new_ys;
    std::vector<Point> new_pts;
    std::vector<detail::ArcInterval> new_intervals;
    double level_dmax = 0.0;

    for (const detail::ArcInterval& iv : intervals) {
      double y0 = ys[iv.lo], y1 = ys[iv.hi];
      const Point& p0 = pts[iv.lo];
      const Point& p1 = pts[iv.hi];

      std::vector<FiniteCode> children;
      if (!iv.node) {
        for (SymbolTree& t : enumerate_trees(s.n(), s.order, 1, child_budget))
          children.push_back(FiniteCode{s.n(), s.order, {std::move(t)}});
      } else {
        children = code_extensions(*iv.node, child_budget);
      }

      std::vector<std::string> labels;
      std::vector<CompactSetApprox> sets;
      for (const FiniteCode& c : children) {
        const CompactSetApprox& cyl = cylinder_of(c);
        level_dmax = std::max(level_dmax, diameter(cyl));
        labels.push_back(format_code(c));
        sets.push_back(cyl);
      }
      OverlapGraph g = overlap_graph(std::move(labels), std::move(sets), threshold);

      CompactSetApprox q0{{p0}, 0.0}, q1{{p1}, 0.0};
      std::optional<std::size_t> from, to;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!from && min_set_distance(q0, g.sets[i]) <= threshold) from = i;
        if (!to && min_set_distance(q1, g.sets[i]) <= threshold) to = i;
      }
      if (!from || !to)
        throw InternalError("build_arc: interval endpoint escapes every child cylinder at level " +
                            std::to_string(level));
      Chain chain = find_chain(g, *from, *to);

      std::size_t segments = chain.nodes.size();  // one subinterval per chain set
      if (*from == *to && chain.nodes.size() == 2) {
        // degenerate self-chain: junction is the child point nearest the
        // endpoint midpoint, to keep the polyline tight
        Point mid(p0.size());
        for (std::size_t c = 0; c < p0.size(); ++c) mid[c] = 0.5 * (p0[c] + p1[c]);
        const auto& cloud = g.sets[*from].points;
        double best = std::numeric_limits<double>::infinity();
        for (const Point& cp : cloud) {
          double d = euclid(cp, mid);
          if (d < best) {
            best = d;
            chain.witnesses[0] = cp;
          }
        }
      }

      // append [y0 .. y1) with the interior junctions; y1/p1 appended by
      // the next interval or the final flush
      std::size_t base_idx = new_ys.size();
      new_ys.push_back(y0);
      new_pts.push_back(p0);
      for (std::size_t j = 1; j < segments; ++j) {
        double t = static_cast<double>(j) / static_cast<double>(segments);
        new_ys.push_back(y0 + t * (y1 - y0));
        new_pts.push_back(chain.witnesses[j - 1]);
      }
      for (std::size_t j = 0; j < segments; ++j)
        new_intervals.push_back(
            {base_idx + j, base_idx + j + 1, children[chain.nodes[j]]});
    }
    new_ys.push_back(1.0);
    new_pts.push_back(pts.back());

    ys = std::move(new_ys);
    pts = std::move(new_pts);
    intervals = std::move(new_intervals);

    ArcApprox arc;
    arc.division.ys = ys;
    arc.points = pts;
    arc.level = level;
    arc.quality = level_dmax + 2.0 * threshold;
    arc.division.validate();
    if (arc.quality > result.levels.back().quality + 1e-12)
      throw InternalError("build_arc: per-level quality bound failed to decrease");
    result.levels.push_back(std::move(arc));
  }
  return result;
}

}  // namespace gifs
