#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/geometry.hpp"
#include "gifs/gifs_core.hpp"
#include "gifs/rng.hpp"

namespace gifs {

// m^(j-1) with an overflow guard; the leaf count of a level-j tree.
inline std::size_t tree_leaf_count(std::size_t m, std::size_t level) {
  if (level < 1) throw UsageError("tree level must be >= 1");
  std::size_t c = 1;
  for (std::size_t i = 1; i < level; ++i) {
    if (c > (std::size_t(1) << 24) / std::max<std::size_t>(m, 1))
      throw ResourceError("tree leaf count overflows the budget");
    c *= m;
  }
  return c;
}

// An element of Omega_j: a complete m-ary tree of depth j-1 whose leaves
// carry symbols in {1,...,n}, stored as the flattened leaf sequence.
struct SymbolTree {
  std::size_t level = 1;
  std::vector<int> leaves;

  bool operator==(const SymbolTree&) const = default;
};

inline SymbolTree constant_tree(std::size_t m, std::size_t level, int symbol) {
  return SymbolTree{level, std::vector<int>(tree_leaf_count(m, level), symbol)};
}

// An element of Omega^k: the hierarchical address (alpha^1,...,alpha^k).
struct FiniteCode {
  std::size_t n = 0;  // alphabet size
  std::size_t m = 0;  // GIFS order
  std::vector<SymbolTree> levels;

  std::size_t depth() const { return levels.size(); }
  bool operator==(const FiniteCode&) const = default;

  void validate() const {
    if (n < 1 || m < 1) throw UsageError("code needs n >= 1 and m >= 1");
    if (levels.empty()) throw UsageError("finite code needs depth >= 1");
    for (std::size_t j = 0; j < levels.size(); ++j) {
      if (levels[j].level != j + 1) throw UsageError("code level index mismatch");
      if (levels[j].leaves.size() != tree_leaf_count(m, j + 1))
        throw UsageError("code level has wrong leaf count");
      for (int s : levels[j].leaves)
        if (s < 1 || s > static_cast<int>(n)) throw UsageError("code symbol out of range");
    }
  }
};

inline FiniteCode constant_code(std::size_t n, std::size_t m, std::size_t depth, int symbol) {
  FiniteCode c{n, m, {}};
  for (std::size_t j = 1; j <= depth; ++j) c.levels.push_back(constant_tree(m, j, symbol));
  c.validate();
  return c;
}

// An infinite code represented as a finite prefix plus constant padding:
// every level beyond the prefix is the constant tree of the padding symbol.
struct CodeSpec {
  FiniteCode prefix;
  int padding = 1;

  SymbolTree level(std::size_t j) const {
    if (j < 1) throw UsageError("code level must be >= 1");
    if (j <= prefix.depth()) return prefix.levels[j - 1];
    return constant_tree(prefix.m, j, padding);
  }

  FiniteCode truncate(std::size_t k) const {
    if (k < 1) throw UsageError("truncation depth must be >= 1");
    FiniteCode out{prefix.n, prefix.m, {}};
    for (std::size_t j = 1; j <= k; ++j) out.levels.push_back(level(j));
    return out;
  }
};

// |Omega_k| = n^(m^(k-1)) as an exact decimal integer string.
inline std::string level_cardinality(std::size_t n, std::size_t m, std::size_t k) {
  if (n < 1 || m < 1 || k < 1) throw UsageError("level_cardinality needs n,m,k >= 1");
  std::size_t e = tree_leaf_count(m, k);
  if (static_cast<double>(e) * std::log10(static_cast<double>(n)) > 200000.0)
    throw ResourceError("level_cardinality result exceeds the digit budget");
  // base-1e9 bignum, square-and-multiply
  using Big = std::vector<std::uint32_t>;
  auto mul = [](const Big& a, const Big& b) {
    Big r(a.size() + b.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < b.size(); ++j) {
        std::uint64_t cur = r[i + j] + static_cast<std::uint64_t>(a[i]) * b[j] + carry;
        r[i + j] = static_cast<std::uint32_t>(cur % 1000000000ULL);
        carry = cur / 1000000000ULL;
      }
      std::size_t pos = i + b.size();
      while (carry) {
        std::uint64_t cur = r[pos] + carry;
        r[pos] = static_cast<std::uint32_t>(cur % 1000000000ULL);
        carry = cur / 1000000000ULL;
        ++pos;
      }
    }
    while (r.size() > 1 && r.back() == 0) r.pop_back();
    return r;
  };
  Big result{1};
  Big base{static_cast<std::uint32_t>(n % 1000000000ULL)};
  if (n >= 1000000000ULL) base.push_back(static_cast<std::uint32_t>(n / 1000000000ULL));
  std::size_t exp = e;
  while (exp) {
    if (exp & 1) result = mul(result, base);
    exp >>= 1;
    if (exp) base = mul(base, base);
  }
  std::string s = std::to_string(result.back());
  for (std::size_t i = result.size() - 1; i-- > 0;) {
    std::string part = std::to_string(result[i]);
    s += std::string(9 - part.size(), '0') + part;
  }
  return s;
}

// The shift map tau_i: level 1 of the image is the symbol i, and level j+1
// is the m-tuple of the arguments' level-j trees.
inline FiniteCode tau_apply(int i, const std::vector<FiniteCode>& args, std::size_t out_depth) {
  if (args.empty()) throw UsageError("tau_apply needs m argument codes");
  std::size_t n = args.front().n, m = args.front().m;
  if (args.size() != m) throw UsageError("tau_apply: need exactly m argument codes");
  if (i < 1 || i > static_cast<int>(n)) throw UsageError("tau_apply: symbol out of range");
  if (out_depth < 1) throw UsageError("tau_apply: out_depth must be >= 1");
  for (const auto& a : args) {
    if (a.n != n || a.m != m) throw UsageError("tau_apply: mixed code parameters");
    if (a.depth() + 1 < out_depth) throw UsageError("tau_apply: argument codes too shallow");
  }
  FiniteCode out{n, m, {}};
  out.levels.push_back(SymbolTree{1, {i}});
  for (std::size_t j = 1; j + 1 <= out_depth; ++j) {
    SymbolTree t{j + 1, {}};
    t.leaves.reserve(tree_leaf_count(m, j + 1));
    for (const auto& a : args)
      t.leaves.insert(t.leaves.end(), a.levels[j - 1].leaves.begin(), a.levels[j - 1].leaves.end());
    out.levels.push_back(std::move(t));
  }
  return out;
}

inline FiniteCode tau_apply(int i, const std::vector<CodeSpec>& args, std::size_t out_depth) {
  if (args.empty()) throw UsageError("tau_apply needs m argument codes");
  std::vector<FiniteCode> mat;
  mat.reserve(args.size());
  std::size_t need = out_depth > 1 ? out_depth - 1 : 1;
  for (const auto& a : args) mat.push_back(a.truncate(need));
  return tau_apply(i, mat, out_depth);
}

// Projection alpha(i): the i-th branch of every level >= 2.
inline FiniteCode project(const FiniteCode& alpha, std::size_t i) {
  alpha.validate();
  if (alpha.depth() < 2) throw UsageError("project needs code depth >= 2");
  if (i < 1 || i > alpha.m) throw UsageError("project: branch index out of range");
  FiniteCode out{alpha.n, alpha.m, {}};
  for (std::size_t j = 2; j <= alpha.depth(); ++j) {
    std::size_t chunk = tree_leaf_count(alpha.m, j - 1);
    const auto& leaves = alpha.levels[j - 1].leaves;
    SymbolTree t{j - 1, {leaves.begin() + (i - 1) * chunk, leaves.begin() + i * chunk}};
    out.levels.push_back(std::move(t));
  }
  return out;
}

// Partial sum of the code metric to level K plus a rigorous tail bracket.
struct CodeDistance {
  double partial = 0.0;
  double tail = 0.0;  // true distance lies in [partial, partial + tail]
};

inline CodeDistance code_distance(const CodeSpec& a, const CodeSpec& b, std::size_t horizon) {
  if (a.prefix.n != b.prefix.n || a.prefix.m != b.prefix.m)
    throw UsageError("code_distance: mixed code parameters");
  double m1 = static_cast<double>(a.prefix.m) + 1.0;
  CodeDistance out;
  double w = 1.0;
  for (std::size_t j = 1; j <= horizon; ++j) {
    w /= m1;
    if (!(a.level(j) == b.level(j))) out.partial += w;
  }
  bool settled = horizon >= a.prefix.depth() && horizon >= b.prefix.depth() &&
                 a.padding == b.padding;
  out.tail = settled ? 0.0 : w / static_cast<double>(a.prefix.m);
  return out;
}

// tau_alpha: recursive interleave per
// tau_alpha(b_1,...,b_m) = tau_{alpha^1}(tau_{alpha(1)}(b_1),...,tau_{alpha(m)}(b_m)).
// Arguments are the m^k leaves of the depth-k argument tree, flattened.
inline FiniteCode tau_alpha_apply(const FiniteCode& alpha, const std::vector<CodeSpec>& args,
                                  std::size_t out_depth) {
  alpha.validate();
  std::size_t k = alpha.depth();
  if (args.size() != tree_leaf_count(alpha.m, k + 1))
    throw UsageError("tau_alpha_apply: argument tree has wrong leaf count");
  if (k == 1) return tau_apply(alpha.levels[0].leaves[0], args, out_depth);
  std::size_t chunk = args.size() / alpha.m;
  std::vector<FiniteCode> inner;
  inner.reserve(alpha.m);
  std::size_t inner_depth = out_depth > 1 ? out_depth - 1 : 1;
  for (std::size_t j = 1; j <= alpha.m; ++j) {
    std::vector<CodeSpec> part(args.begin() + (j - 1) * chunk, args.begin() + j * chunk);
    inner.push_back(tau_alpha_apply(project(alpha, j), part, inner_depth));
  }
  return tau_apply(alpha.levels[0].leaves[0], inner, out_depth);
}

// f_alpha evaluated bottom-up: level-k leaf symbols act on consecutive
// m-groups of input leaves, then level k-1, down to the level-1 symbol.
// `leaf` supplies the m^k input leaves of the replicated product space.
inline Point f_alpha_eval(const Gifs& s, const FiniteCode& alpha,
                          const std::function<const Point&(std::size_t)>& leaf) {
  s.validate();
  alpha.validate();
  if (alpha.n != s.n() || alpha.m != s.order)
    throw UsageError("f_alpha_eval: code does not match the GIFS");
  std::size_t k = alpha.depth();
  std::size_t groups = tree_leaf_count(s.order, k);  // m^(k-1)
  std::vector<Point> cur(groups);
  PointTuple tup(s.order);
  for (std::size_t t = 0; t < groups; ++t) {
    for (std::size_t j = 0; j < s.order; ++j) tup[j] = leaf(t * s.order + j);
    int sym = alpha.levels[k - 1].leaves[t];
    cur[t] = s.maps[sym - 1].apply(tup);
  }
  for (std::size_t lvl = k - 1; lvl >= 1; --lvl) {
    std::size_t g = cur.size() / s.order;
    std::vector<Point> next(g);
    for (std::size_t t = 0; t < g; ++t) {
      for (std::size_t j = 0; j < s.order; ++j) tup[j] = cur[t * s.order + j];
      int sym = alpha.levels[lvl - 1].leaves[t];
      next[t] = s.maps[sym - 1].apply(tup);
    }
    cur = std::move(next);
  }
  return cur.front();
}

inline Point f_alpha_eval(const Gifs& s, const FiniteCode& alpha,
                          const std::vector<Point>& leaves) {
  if (leaves.size() != tree_leaf_count(s.order, alpha.depth() + 1))
    throw UsageError("f_alpha_eval: wrong leaf count");
  return f_alpha_eval(s, alpha, [&](std::size_t i) -> const Point& { return leaves[i]; });
}

// x^k with x^1 = x and x^{k+1} = (x^k,...,x^k).
struct ReplicatedTuple {
  PointTuple base;
  std::size_t depth = 1;
};

inline Point f_alpha_eval(const Gifs& s, const FiniteCode& alpha, const ReplicatedTuple& x) {
  if (x.depth != alpha.depth()) throw UsageError("f_alpha_eval: depth mismatch");
  if (x.base.size() != s.order) throw UsageError("f_alpha_eval: base tuple arity mismatch");
  return f_alpha_eval(s, alpha,
                      [&](std::size_t i) -> const Point& { return x.base[i % s.order]; });
}

struct CodingPoint {
  Point point;
  double bound = 0.0;  // |point - x_alpha| <= bound
};

// Finite-depth approximation of the coding map g: f_{alpha|k} on the
// replicated base tuple, with the phi^k diameter envelope as the bound.
inline CodingPoint coding_point(const Gifs& s, const CodeSpec& alpha, std::size_t k,
                                const PointTuple& x) {
  if (k < 1) throw UsageError("coding_point: depth must be >= 1");
  Point p = f_alpha_eval(s, alpha.truncate(k), ReplicatedTuple{x, k});
  double reach = 0.0;
  for (const Point& c : x) reach = std::max(reach, norm(c));
  double bound;
  try {
    double r = absorbing_ball(s).second;
    bound = a_priori_error(s.phi, 2.0 * std::max(r, reach), k);
  } catch (const UsageError&) {
    bound = std::numeric_limits<double>::infinity();  // no certified ball
  }
  return {std::move(p), bound};
}

// Approximation of the cylinder set A_alpha = f_alpha(A_k): leaves drawn
// independently from the attractor cloud, exhaustive when feasible.
inline CompactSetApprox cylinder_set(const Gifs& s, const AttractorApprox& a,
                                     const FiniteCode& alpha, std::size_t sample_count,
                                     std::uint64_t rng_seed) {
  s.validate();
  alpha.validate();
  a.cloud.validate();
  if (sample_count < 1) throw UsageError("cylinder_set: sample_count must be >= 1");
  std::size_t k = alpha.depth();
  std::size_t leaves = tree_leaf_count(s.order, k + 1);  // m^k
  std::size_t cloud_n = a.cloud.points.size();

  double total = std::pow(static_cast<double>(cloud_n), static_cast<double>(leaves));
  std::vector<Point> pts;
  bool sampled;
  if (total <= static_cast<double>(sample_count)) {
    sampled = false;
    std::vector<std::size_t> odo(leaves, 0);
    while (true) {
      pts.push_back(f_alpha_eval(
          s, alpha, [&](std::size_t i) -> const Point& { return a.cloud.points[odo[i]]; }));
      std::size_t axis = 0;
      while (axis < leaves && ++odo[axis] == cloud_n) odo[axis++] = 0;
      if (axis == leaves) break;
    }
  } else {
    sampled = true;
    // diagonal draws f_alpha(x,...,x) sweep the cylinder end to end; iid
    // leaf draws fill the interior
    std::size_t diag = std::min(cloud_n, std::max<std::size_t>(sample_count / 2, 1));
    for (std::size_t t = 0; t < diag; ++t) {
      const Point& x = a.cloud.points[t * cloud_n / diag];
      pts.push_back(f_alpha_eval(s, alpha, [&](std::size_t) -> const Point& { return x; }));
    }
    auto rng = make_rng(rng_seed, RngStream::cylinder);
    std::uniform_int_distribution<std::size_t> pick(0, cloud_n - 1);
    std::vector<std::size_t> idx(leaves);
    for (std::size_t t = diag; t < sample_count; ++t) {
      for (auto& i : idx) i = pick(rng);
      pts.push_back(f_alpha_eval(
          s, alpha, [&](std::size_t i) -> const Point& { return a.cloud.points[idx[i]]; }));
    }
  }

  CompactSetApprox out;
  out.points = detail::decimate(std::move(pts), 0.0);
  double carried = a.cloud.resolution + a.error_bound;
  out.resolution = a_priori_error(s.phi, carried, k);
  if (sampled)
    out.resolution += a_priori_error(s.phi, diameter(a.cloud) + 2.0 * carried, k);
  return out;
}

// All level-k trees in lexicographic leaf order; refuses past the budget.
inline std::vector<SymbolTree> enumerate_trees(std::size_t n, std::size_t m, std::size_t level,
                                               std::size_t budget = 100000) {
  std::size_t leaves = tree_leaf_count(m, level);
  double count = std::pow(static_cast<double>(n), static_cast<double>(leaves));
  if (count > static_cast<double>(budget))
    throw ResourceError("enumerate_trees: level population exceeds the budget");
  std::vector<SymbolTree> out;
  std::vector<int> cur(leaves, 1);
  while (true) {
    out.push_back(SymbolTree{level, cur});
    std::size_t axis = leaves;
    while (axis > 0) {
      --axis;
      if (++cur[axis] <= static_cast<int>(n)) break;
      cur[axis] = 1;
      if (axis == 0) return out;
    }
  }
}

// The children of alpha in the code tree: alpha extended by every tree of
// the next level.
inline std::vector<FiniteCode> code_extensions(const FiniteCode& alpha,
                                               std::size_t budget = 100000) {
  alpha.validate();
  std::vector<FiniteCode> out;
  for (SymbolTree& t : enumerate_trees(alpha.n, alpha.m, alpha.depth() + 1, budget)) {
    FiniteCode c = alpha;
    c.levels.push_back(std::move(t));
    out.push_back(std::move(c));
  }
  return out;
}

// ---- textual code literals --------------------------------------------
// Omega_1 element: "s"; Omega_{k+1} element: "(t_1,...,t_m)";
// FiniteCode: "a^1;a^2;...;a^k"; CodeSpec: "prefix|pad=s".

namespace detail {
inline void fmt_tree(std::string& out, const std::vector<int>& leaves, std::size_t lo,
                     std::size_t hi, std::size_t level, std::size_t m) {
  if (level == 1) {
    out += std::to_string(leaves[lo]);
    return;
  }
  out += '(';
  std::size_t chunk = (hi - lo) / m;
  for (std::size_t j = 0; j < m; ++j) {
    if (j) out += ',';
    fmt_tree(out, leaves, lo + j * chunk, lo + (j + 1) * chunk, level - 1, m);
  }
  out += ')';
}

struct CodeParser {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t n, m;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw UsageError("code literal error at position " + std::to_string(pos) + ": " + what);
  }

  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  int parse_symbol() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) fail("expected a symbol");
    int s = std::stoi(text.substr(start, pos - start));
    if (s < 1 || s > static_cast<int>(n)) fail("symbol out of range 1.." + std::to_string(n));
    return s;
  }

  void parse_tree(std::vector<int>& leaves, std::size_t level) {
    skip_ws();
    if (level == 1) {
      leaves.push_back(parse_symbol());
      return;
    }
    expect('(');
    for (std::size_t j = 0; j < m; ++j) {
      if (j) expect(',');
      parse_tree(leaves, level - 1);
    }
    expect(')');
  }
};
}  // namespace detail

inline std::string format_tree(const SymbolTree& t, std::size_t m) {
  std::string out;
  detail::fmt_tree(out, t.leaves, 0, t.leaves.size(), t.level, m);
  return out;
}

inline std::string format_code(const FiniteCode& c) {
  std::string out;
  for (std::size_t j = 0; j < c.levels.size(); ++j) {
    if (j) out += ';';
    out += format_tree(c.levels[j], c.m);
  }
  return out;
}

inline std::string format_codespec(const CodeSpec& c) {
  return format_code(c.prefix) + "|pad=" + std::to_string(c.padding);
}

inline FiniteCode parse_code(const std::string& text, std::size_t n, std::size_t m) {
  FiniteCode out{n, m, {}};
  detail::CodeParser p{text, 0, n, m};
  std::size_t level = 1;
  while (true) {
    SymbolTree t{level, {}};
    p.parse_tree(t.leaves, level);
    out.levels.push_back(std::move(t));
    p.skip_ws();
    if (p.pos >= text.size()) break;
    p.expect(';');
    ++level;
  }
  out.validate();
  return out;
}

inline CodeSpec parse_codespec(const std::string& text, std::size_t n, std::size_t m) {
  auto bar = text.find('|');
  if (bar == std::string::npos)
    throw UsageError("code spec literal needs '|pad=<symbol>'");
  std::string tail = text.substr(bar + 1);
  auto eq = tail.find('=');
  std::string key = tail.substr(0, eq == std::string::npos ? tail.size() : eq);
  key.erase(std::remove_if(key.begin(), key.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            key.end());
  if (eq == std::string::npos || key != "pad")
    throw UsageError("code spec literal needs '|pad=<symbol>'");
  int pad = 0;
  try {
    pad = std::stoi(tail.substr(eq + 1));
  } catch (const std::exception&) {
    throw UsageError("bad padding symbol in code spec literal");
  }
  if (pad < 1 || pad > static_cast<int>(n)) throw UsageError("padding symbol out of range");
  return CodeSpec{parse_code(text.substr(0, bar), n, m), pad};
}

// Greedy code recovery mirroring the surjectivity proof: descend through
// cylinders that contain x within `threshold`, ties broken by lowest
// enumeration order. Only feasible for tiny (n, m, depth).
inline FiniteCode recover_code(const Gifs& s, const AttractorApprox& a, const Point& x,
                               std::size_t depth, double threshold, std::size_t sample_count,
                               std::uint64_t rng_seed, std::size_t budget = 100000) {
  if (depth < 1) throw UsageError("recover_code: depth must be >= 1");
  FiniteCode code{s.n(), s.order, {}};
  CompactSetApprox probe{{x}, 0.0};
  for (std::size_t k = 1; k <= depth; ++k) {
    std::vector<SymbolTree> trees = enumerate_trees(s.n(), s.order, k, budget);
    bool found = false;
    for (SymbolTree& t : trees) {
      FiniteCode cand = code;
      cand.levels.push_back(t);
      CompactSetApprox cyl = cylinder_set(s, a, cand, sample_count, rng_seed);
      if (min_set_distance(probe, cyl) <= threshold + cyl.resolution) {
        code = std::move(cand);
        found = true;
        break;
      }
    }
    if (!found)
      throw DisconnectionError("recover_code: point not covered by any depth-" +
                               std::to_string(k) + " cylinder");
  }
  return code;
}

}  // namespace gifs
