#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/geometry.hpp"
#include "gifs/rng.hpp"

namespace gifs {

// Comparison function phi: nondecreasing, phi(0)=0, phi(t)<t for t>0.
// Linear kind is phi(t)=c*t; tabulated kind is evaluated by the step
// envelope from above of its samples, which keeps it upper semicontinuous
// and the error bounds valid.
class ComparisonFunction {
 public:
  static ComparisonFunction linear(double rate) {
    if (rate < 0.0 || rate >= 1.0) throw UsageError("linear phi rate must be in [0,1)");
    ComparisonFunction f;
    f.linear_ = true;
    f.rate_ = rate;
    return f;
  }

  // Samples are (t, phi(t)) pairs, strictly increasing in t, nondecreasing
  // in value, value < t for t > 0. Beyond the last sample the envelope
  // continues linearly with slope value/t of the last sample.
  static ComparisonFunction tabulated(std::vector<std::pair<double, double>> samples) {
    if (samples.empty()) throw UsageError("tabulated phi needs samples");
    std::sort(samples.begin(), samples.end());
    double prev_t = -1.0, prev_v = 0.0;
    for (auto& [t, v] : samples) {
      if (t < 0.0 || v < 0.0) throw UsageError("tabulated phi: negative sample");
      if (t <= prev_t) throw UsageError("tabulated phi: duplicate argument");
      if (v < prev_v) throw UsageError("tabulated phi: values must be nondecreasing");
      if (t > 0.0 && v >= t) throw UsageError("tabulated phi: phi(t) must be < t");
      if (t == 0.0 && v != 0.0) throw UsageError("tabulated phi: phi(0) must be 0");
      prev_t = t;
      prev_v = v;
    }
    ComparisonFunction f;
    f.linear_ = false;
    f.samples_ = std::move(samples);
    return f;
  }

  double operator()(double t) const {
    if (t < 0.0) throw UsageError("phi argument must be nonnegative");
    if (t == 0.0) return 0.0;
    if (linear_) return rate_ * t;
    for (const auto& [st, sv] : samples_) {
      if (st >= t) return sv;
    }
    const auto& [lt, lv] = samples_.back();
    if (lt <= 0.0) return 0.0;
    return lv / lt * t;  // lv < lt, so still below the identity
  }

  // k-fold composition phi^k(a); k=0 is the identity.
  double iterate(double a, std::size_t k) const {
    if (a < 0.0) throw UsageError("phi argument must be nonnegative");
    double t = a;
    for (std::size_t i = 0; i < k; ++i) t = (*this)(t);
    return t;
  }

  // sum_{j>=1} phi^j(r); conservative tail bound for a priori errors.
  double tail_sum(double r) const {
    if (linear_) return r * rate_ / (1.0 - rate_);
    double sum = 0.0, t = r;
    for (int j = 0; j < 100000; ++j) {
      t = (*this)(t);
      sum += t;
      if (t < 1e-16) return sum;
    }
    // phi^k not observed to vanish: refuse to certify
    return std::numeric_limits<double>::infinity();
  }

  bool is_linear() const { return linear_; }
  double linear_rate() const {
    if (!linear_) throw UsageError("phi is not linear");
    return rate_;
  }
  const std::vector<std::pair<double, double>>& samples() const {
    if (linear_) throw UsageError("phi is not tabulated");
    return samples_;
  }

 private:
  bool linear_ = true;
  double rate_ = 0.0;
  std::vector<std::pair<double, double>> samples_;
};

using Matrix = std::vector<std::vector<double>>;  // row-major d x d

inline Point mat_vec(const Matrix& a, const Point& x) {
  Point y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != x.size()) throw UsageError("matrix/vector shape mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

// Spectral norm by power iteration on A^T A. Deterministic start vector.
inline double opnorm(const Matrix& a) {
  std::size_t d = a.size();
  if (d == 0) throw UsageError("opnorm of empty matrix");
  if (d == 1) return std::fabs(a[0][0]);
  Point v(d, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    Point av = mat_vec(a, v);
    Point w(d, 0.0);  // A^T (A v)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) w[j] += a[i][j] * av[i];
    double nw = norm(w);
    if (nw == 0.0) return 0.0;
    lambda = nw;
    for (std::size_t j = 0; j < d; ++j) v[j] = w[j] / nw;
  }
  return std::sqrt(lambda);
}

// Affine map f(x_1,...,x_m) = sum_j A_j x_j + b.
struct AffineMap {
  std::vector<Matrix> matrices;
  Point offset;

  // sum of operator norms; a Lipschitz bound for f under d_m
  double lipschitz_bound() const {
    double s = 0.0;
    for (const Matrix& a : matrices) s += opnorm(a);
    return s;
  }
};

// One member f_i of a GIFS. Normally affine; the callable form is an escape
// hatch for pointwise-defined maps in tests.
struct GifsMap {
  std::size_t order = 0;  // m
  std::size_t dim = 0;    // d
  std::optional<AffineMap> affine;
  std::function<Point(const PointTuple&)> fn;

  static GifsMap make_affine(std::vector<Matrix> matrices, Point offset) {
    GifsMap f;
    f.order = matrices.size();
    f.dim = offset.size();
    if (f.order == 0) throw UsageError("affine map needs at least one matrix");
    if (f.dim == 0) throw UsageError("affine map needs dimension >= 1");
    for (const Matrix& a : matrices) {
      if (a.size() != f.dim) throw UsageError("matrix row count != dimension");
      for (const auto& row : a)
        if (row.size() != f.dim) throw UsageError("matrix column count != dimension");
    }
    check_finite(offset);
    f.affine = AffineMap{std::move(matrices), std::move(offset)};
    return f;
  }

  static GifsMap make_callable(std::size_t order, std::size_t dim,
                               std::function<Point(const PointTuple&)> fn) {
    GifsMap f;
    f.order = order;
    f.dim = dim;
    f.fn = std::move(fn);
    return f;
  }

  Point apply(const PointTuple& x) const {
    if (x.size() != order) throw UsageError("map_apply: arity mismatch");
    for (const Point& p : x)
      if (p.size() != dim) throw UsageError("map_apply: dimension mismatch");
    if (affine) {
      Point y = affine->offset;
      for (std::size_t j = 0; j < order; ++j) {
        Point ax = mat_vec(affine->matrices[j], x[j]);
        for (std::size_t i = 0; i < dim; ++i) y[i] += ax[i];
      }
      return y;
    }
    if (!fn) throw UsageError("map has no definition");
    return fn(x);
  }
};

// The GIFS S = (f_1,...,f_n) of order m with a common comparison function.
struct Gifs {
  std::size_t order = 0;  // m
  std::size_t dim = 0;    // d
  std::vector<GifsMap> maps;
  ComparisonFunction phi = ComparisonFunction::linear(0.0);

  std::size_t n() const { return maps.size(); }

  void validate() const {
    if (order < 1) throw UsageError("GIFS order must be >= 1");
    if (dim < 1) throw UsageError("GIFS dimension must be >= 1");
    if (maps.empty()) throw UsageError("GIFS needs at least one map");
    for (const GifsMap& f : maps) {
      if (f.order != order) throw UsageError("map order mismatch in GIFS");
      if (f.dim != dim) throw UsageError("map dimension mismatch in GIFS");
    }
  }
};

struct SamplingPolicy {
  std::size_t budget = 10'000'000;  // max tuple evaluations per operator call
  std::size_t sample_count = 100'000;  // target tuples when subsampling
  double decimate_cell = 0.0;          // 0 disables post-image decimation
  std::uint64_t seed = 0;
  bool exhaustive_only = false;  // demand the exact product image
};

namespace detail {

// Snap to decimation-grid cell centers and deduplicate, one representative
// per cell. Adds cell_diag/2 to the resolution at the call site.
inline std::vector<Point> decimate(std::vector<Point> pts, double cell) {
  if (cell <= 0.0) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }
  std::map<std::vector<std::int64_t>, Point> cells;
  for (const Point& p : pts) {
    std::vector<std::int64_t> key(p.size());
    Point center(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      key[i] = static_cast<std::int64_t>(std::floor(p[i] / cell));
      center[i] = (static_cast<double>(key[i]) + 0.5) * cell;
    }
    cells.emplace(std::move(key), std::move(center));
  }
  std::vector<Point> out;
  out.reserve(cells.size());
  for (auto& [k, c] : cells) out.push_back(std::move(c));
  return out;
}

// One-sided cover radius: sup over `full` of the distance to `subset`.
inline double cover_radius(const std::vector<Point>& full, const std::vector<Point>& subset) {
  double r = 0.0;
  for (const Point& p : full) r = std::max(r, dist_to_cloud(p, subset));
  return r;
}

}  // namespace detail

// Image of one map f_i over the product D_1 x ... x D_m. Exhaustive when the
// product fits the budget; otherwise each factor is subsampled and the lost
// coverage is charged to the output resolution via phi.
inline CompactSetApprox map_image(const Gifs& s, std::size_t map_index,
                                  const std::vector<CompactSetApprox>& d,
                                  const SamplingPolicy& policy) {
  s.validate();
  if (map_index >= s.n()) throw UsageError("map index out of range");
  if (d.size() != s.order) throw UsageError("map_image: need m input clouds");
  double h_in = 0.0;
  for (const auto& c : d) {
    c.validate();
    if (c.dim() != s.dim) throw UsageError("map_image: cloud dimension mismatch");
    h_in = std::max(h_in, c.resolution);
  }

  double product = 1.0;
  for (const auto& c : d) product *= static_cast<double>(c.points.size());

  std::vector<std::vector<std::size_t>> chosen(s.order);
  double sampling_slack = 0.0;
  if (product <= static_cast<double>(policy.budget)) {
    for (std::size_t j = 0; j < s.order; ++j) {
      chosen[j].resize(d[j].points.size());
      std::iota(chosen[j].begin(), chosen[j].end(), 0);
    }
  } else {
    if (policy.exhaustive_only)
      throw ResourceError("exhaustive image demanded but product exceeds budget");
    // per-factor subsets whose product fits min(budget, sample_count);
    // the exact cover radius of each subset feeds the resolution bound
    double target = static_cast<double>(std::min(policy.budget, policy.sample_count));
    std::size_t per = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::pow(target, 1.0 / static_cast<double>(s.order))));
    auto rng = make_rng(policy.seed, RngStream::hutchinson, map_index);
    double worst_cover = 0.0;
    for (std::size_t j = 0; j < s.order; ++j) {
      std::size_t nj = d[j].points.size();
      if (nj <= per) {
        chosen[j].resize(nj);
        std::iota(chosen[j].begin(), chosen[j].end(), 0);
        continue;
      }
      std::vector<std::size_t> idx(nj);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(per);
      std::sort(idx.begin(), idx.end());
      std::vector<Point> subset;
      subset.reserve(per);
      for (std::size_t t : idx) subset.push_back(d[j].points[t]);
      worst_cover = std::max(worst_cover, detail::cover_radius(d[j].points, subset));
      chosen[j] = std::move(idx);
    }
    sampling_slack = s.phi(worst_cover);
  }

  std::vector<Point> image;
  std::vector<std::size_t> odo(s.order, 0);
  PointTuple tup(s.order);
  while (true) {
    for (std::size_t j = 0; j < s.order; ++j) tup[j] = d[j].points[chosen[j][odo[j]]];
    image.push_back(s.maps[map_index].apply(tup));
    std::size_t axis = 0;
    while (axis < s.order && ++odo[axis] == chosen[axis].size()) odo[axis++] = 0;
    if (axis == s.order) break;
  }

  CompactSetApprox out;
  out.points = detail::decimate(std::move(image), policy.decimate_cell);
  double decim = policy.decimate_cell > 0.0
                     ? policy.decimate_cell * std::sqrt(static_cast<double>(s.dim)) / 2.0
                     : 0.0;
  out.resolution = s.phi(h_in) + sampling_slack + decim;
  return out;
}

// Hutchinson-type operator F_S(D_1,...,D_m) = union_i f_i(D_1 x ... x D_m).
inline CompactSetApprox hutchinson(const Gifs& s, const std::vector<CompactSetApprox>& d,
                                   const SamplingPolicy& policy = {}) {
  s.validate();
  std::vector<Point> all;
  double res = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    SamplingPolicy sub = policy;
    sub.decimate_cell = 0.0;  // decimate once, after the union
    CompactSetApprox img = map_image(s, i, d, sub);
    res = std::max(res, img.resolution);
    all.insert(all.end(), img.points.begin(), img.points.end());
  }
  CompactSetApprox out;
  out.points = detail::decimate(std::move(all), policy.decimate_cell);
  double decim = policy.decimate_cell > 0.0
                     ? policy.decimate_cell * std::sqrt(static_cast<double>(s.dim)) / 2.0
                     : 0.0;
  out.resolution = res + decim;
  return out;
}

struct AttractorApprox {
  CompactSetApprox cloud;
  double residual = 0.0;     // H(F_S(cloud,...,cloud), cloud)
  std::size_t iterations = 0;
  double error_bound = 0.0;  // a priori bound on H(cloud, A_S)
};

// H(F_S(A,...,A), A).
inline double fixed_point_residual(const Gifs& s, const CompactSetApprox& a,
                                   const SamplingPolicy& policy = {}) {
  std::vector<CompactSetApprox> rep(s.order, a);
  return hausdorff(hutchinson(s, rep, policy), a);
}

// Sliding-window iteration D_{m+k} = F_S(D_k,...,D_{k+m-1}); stops when the
// successive-iterate Hausdorff distance falls below tol. A window of
// non-decreasing residuals triggers a divergence error.
inline AttractorApprox attractor_iterate(const Gifs& s,
                                         std::vector<CompactSetApprox> seeds,
                                         double tol, std::size_t max_iter,
                                         const SamplingPolicy& policy = {}) {
  s.validate();
  if (tol <= 0.0) throw UsageError("attractor_iterate: tol must be positive");
  if (seeds.size() != s.order) throw UsageError("attractor_iterate: need m seed clouds");
  for (auto& c : seeds) c.validate();

  constexpr std::size_t kProbation = 10;
  AttractorApprox out;
  std::vector<double> residuals;
  CompactSetApprox current = seeds.back();
  std::size_t iters = 0;
  for (; iters < max_iter; ++iters) {
    CompactSetApprox next = hutchinson(s, seeds, policy);
    double r = hausdorff(next, current);
    residuals.push_back(r);
    seeds.erase(seeds.begin());
    seeds.push_back(next);
    current = std::move(next);
    if (r <= tol) {
      ++iters;
      break;
    }
    if (residuals.size() >= kProbation) {
      bool nondecreasing = true;
      for (std::size_t i = residuals.size() - kProbation + 1; i < residuals.size(); ++i)
        if (residuals[i] < residuals[i - 1]) {
          nondecreasing = false;
          break;
        }
      if (nondecreasing)
        throw DivergenceError("residuals non-decreasing over probation window; GIFS may not be contractive");
    }
  }

  out.cloud = current;
  out.iterations = iters;
  out.residual = fixed_point_residual(s, out.cloud, policy);
  double r = out.residual + out.cloud.resolution;
  out.error_bound = r + s.phi.tail_sum(r);
  return out;
}

// Smallest certified ball around the origin absorbed by every map:
// radius max_i |b_i| / (1 - c') with c' = max_i sum_j opnorm(A_{i,j}).
inline std::pair<Point, double> absorbing_ball(const Gifs& s) {
  s.validate();
  double cprime = 0.0, bmax = 0.0;
  for (const GifsMap& f : s.maps) {
    if (!f.affine) throw UsageError("absorbing_ball needs affine maps");
    cprime = std::max(cprime, f.affine->lipschitz_bound());
    bmax = std::max(bmax, norm(f.affine->offset));
  }
  if (cprime >= 1.0) throw UsageError("absorbing_ball: contraction factor >= 1");
  return {Point(s.dim, 0.0), bmax / (1.0 - cprime)};
}

struct ContractionReport {
  std::vector<double> max_ratio;  // per map; max d(f(x),f(y)) / phi(d_m(x,y))
  double bound = 1.0 + 1e-9;
  bool pass = false;
};

// Samples random tuple pairs inside the absorbing box and reports the worst
// observed contraction ratio per map. A fail is a report outcome, not an error.
inline ContractionReport contraction_check(const Gifs& s, std::size_t sample_count,
                                           std::uint64_t rng_seed) {
  s.validate();
  if (sample_count < 1) throw UsageError("contraction_check: sample_count must be >= 1");
  double radius = 1.0;
  try {
    radius = std::max(absorbing_ball(s).second, 1e-6);
  } catch (const UsageError&) {
    // non-affine or non-contractive claim: sample the unit box
  }
  auto rng = make_rng(rng_seed, RngStream::contraction);
  std::uniform_real_distribution<double> u(-radius, radius);
  ContractionReport rep;
  rep.max_ratio.assign(s.n(), 0.0);
  for (std::size_t t = 0; t < sample_count; ++t) {
    PointTuple x(s.order, Point(s.dim)), y(s.order, Point(s.dim));
    for (auto& p : x)
      for (auto& c : p) c = u(rng);
    for (auto& p : y)
      for (auto& c : p) c = u(rng);
    double dm = max_dist(x, y);
    double denom = s.phi(dm);
    for (std::size_t i = 0; i < s.n(); ++i) {
      double num = euclid(s.maps[i].apply(x), s.maps[i].apply(y));
      if (denom == 0.0) {
        if (num > 0.0) rep.max_ratio[i] = std::numeric_limits<double>::infinity();
        continue;  // coincident pair
      }
      rep.max_ratio[i] = std::max(rep.max_ratio[i], num / denom);
    }
  }
  rep.pass = true;
  for (double r : rep.max_ratio)
    if (!(r <= rep.bound)) rep.pass = false;
  return rep;
}

// phi^k(a); the Lemma-style diameter envelope for depth-k pieces.
inline double a_priori_error(const ComparisonFunction& phi, double a, std::size_t k) {
  return phi.iterate(a, k);
}

}  // namespace gifs
