#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"

namespace gifs {

// A point of R^d. Coordinates must be finite; the dimension is fixed per
// computation and checked at every pairwise operation.
using Point = std::vector<double>;

// An element of X^m under the maximum metric.
using PointTuple = std::vector<Point>;

inline void check_finite(const Point& p) {
  for (double c : p) {
    if (!std::isfinite(c)) throw UsageError("point coordinate not finite");
  }
}

inline double euclid(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw UsageError("dimension mismatch in euclid");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double norm(const Point& p) {
  double s = 0.0;
  for (double c : p) s += c * c;
  return std::sqrt(s);
}

// Maximum metric d_m on X^m: the max of componentwise euclidean distances.
inline double max_dist(const PointTuple& a, const PointTuple& b) {
  if (a.size() != b.size()) throw UsageError("arity mismatch in max_dist");
  if (a.empty()) throw UsageError("empty tuple in max_dist");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, euclid(a[i], b[i]));
  return best;
}

// A finite point cloud standing in for a nonempty compact subset of R^d.
// `resolution` is the declared guarantee: the represented compact set lies
// within Hausdorff distance `resolution` of the cloud.
struct CompactSetApprox {
  std::vector<Point> points;
  double resolution = 0.0;

  std::size_t dim() const {
    if (points.empty()) throw UsageError("empty point cloud");
    return points.front().size();
  }

  void validate() const {
    if (points.empty()) throw UsageError("point cloud must be nonempty");
    if (resolution < 0.0) throw UsageError("resolution must be nonnegative");
    std::size_t d = points.front().size();
    if (d == 0) throw UsageError("dimension must be >= 1");
    for (const Point& p : points) {
      if (p.size() != d) throw UsageError("mixed dimensions in point cloud");
      check_finite(p);
    }
  }
};

namespace detail {
inline double dist_to_cloud(const Point& p, const std::vector<Point>& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& q : cloud) best = std::min(best, euclid(p, q));
  return best;
}
}  // namespace detail

// Hausdorff metric between the two point clouds, exact O(|A|*|B|) double loop.
inline double hausdorff(const CompactSetApprox& a, const CompactSetApprox& b) {
  if (a.points.empty() || b.points.empty()) throw UsageError("hausdorff needs nonempty clouds");
  if (a.dim() != b.dim()) throw UsageError("dimension mismatch in hausdorff");
  double h = 0.0;
  for (const Point& p : a.points) h = std::max(h, detail::dist_to_cloud(p, b.points));
  for (const Point& q : b.points) h = std::max(h, detail::dist_to_cloud(q, a.points));
  return h;
}

// Max pairwise euclidean distance over the cloud.
inline double diameter(const CompactSetApprox& a) {
  if (a.points.empty()) throw UsageError("diameter of empty cloud");
  double d = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    for (std::size_t j = i + 1; j < a.points.size(); ++j)
      d = std::max(d, euclid(a.points[i], a.points[j]));
  return d;
}

// Min over pairs of euclidean distance; zero iff the clouds share a point.
inline double min_set_distance(const CompactSetApprox& a, const CompactSetApprox& b) {
  if (a.points.empty() || b.points.empty()) throw UsageError("min_set_distance needs nonempty clouds");
  if (a.dim() != b.dim()) throw UsageError("dimension mismatch in min_set_distance");
  double d = std::numeric_limits<double>::infinity();
  for (const Point& p : a.points)
    for (const Point& q : b.points) d = std::min(d, euclid(p, q));
  return d;
}

// Closest pair realizing min_set_distance; first such pair in scan order.
inline std::pair<Point, Point> closest_pair(const CompactSetApprox& a,
                                            const CompactSetApprox& b) {
  if (a.points.empty() || b.points.empty()) throw UsageError("closest_pair needs nonempty clouds");
  double best = std::numeric_limits<double>::infinity();
  std::pair<Point, Point> out;
  for (const Point& p : a.points)
    for (const Point& q : b.points) {
      double d = euclid(p, q);
      if (d < best) {
        best = d;
        out = {p, q};
      }
    }
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Point-cloud file format: optional first line "# d=<dim> h=<resolution>",
// then one point per line, coordinates comma-separated, LF terminated.
inline void write_cloud(std::ostream& os, const CompactSetApprox& cloud) {
  cloud.validate();
  os << "# d=" << cloud.dim() << " h=" << format_double(cloud.resolution) << "\n";
  for (const Point& p : cloud.points) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << ',';
      os << format_double(p[i]);
    }
    os << "\n";
  }
}

inline void write_cloud_file(const std::string& path, const CompactSetApprox& cloud) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path);
  write_cloud(os, cloud);
}

inline CompactSetApprox read_cloud(std::istream& is) {
  CompactSetApprox out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (first) {
        auto hpos = line.find("h=");
        if (hpos != std::string::npos) out.resolution = std::stod(line.substr(hpos + 2));
      }
      first = false;
      continue;
    }
    first = false;
    Point p;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        p.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw UsageError("bad coordinate in cloud file: " + tok);
      }
    }
    out.points.push_back(std::move(p));
  }
  out.validate();
  return out;
}

inline CompactSetApprox read_cloud_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open cloud file: " + path);
  return read_cloud(is);
}

// Uniform grid over an axis-aligned box, spacing <= `spacing` per axis,
// endpoints included. Declared resolution covers the box, not just the grid.
inline CompactSetApprox grid_cloud(const std::vector<std::pair<double, double>>& box,
                                   double spacing) {
  if (box.empty()) throw UsageError("grid_cloud: empty box");
  if (spacing <= 0.0) throw UsageError("grid_cloud: spacing must be positive");
  std::size_t d = box.size();
  std::vector<std::size_t> counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (box[i].second < box[i].first) throw UsageError("grid_cloud: inverted box");
    double span = box[i].second - box[i].first;
    counts[i] = static_cast<std::size_t>(std::ceil(span / spacing)) + 1;
  }
  CompactSetApprox out;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    Point p(d);
    for (std::size_t i = 0; i < d; ++i) {
      double t = counts[i] == 1 ? 0.0 : static_cast<double>(idx[i]) / (counts[i] - 1);
      p[i] = box[i].first + t * (box[i].second - box[i].first);
    }
    out.points.push_back(std::move(p));
    std::size_t axis = 0;
    while (axis < d && ++idx[axis] == counts[axis]) idx[axis++] = 0;
    if (axis == d) break;
  }
  // half the cell diagonal covers every box point from the grid
  double cell = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double step = counts[i] == 1 ? 0.0 : (box[i].second - box[i].first) / (counts[i] - 1);
    cell += step * step;
  }
  out.resolution = std::sqrt(cell) / 2.0;
  return out;
}

}  // namespace gifs
