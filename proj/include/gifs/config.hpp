#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gifs/errors.hpp"
#include "gifs/geometry.hpp"
#include "gifs/gifs_core.hpp"
#include "gifs/render.hpp"

namespace gifs {

// A seed cloud spec: either an explicit point list or a grid over a box.
struct SeedSpec {
  std::optional<CompactSetApprox> points;
  std::optional<std::pair<std::vector<std::pair<double, double>>, double>> grid;  // box, spacing

  CompactSetApprox build() const {
    if (points) return *points;
    if (grid) return grid_cloud(grid->first, grid->second);
    throw UsageError("seed spec has neither points nor grid");
  }
};

struct RunConfig {
  std::size_t dimension = 1;
  std::size_t order = 1;
  std::vector<std::pair<std::vector<Matrix>, Point>> maps;  // matrices, offset
  ComparisonFunction phi = ComparisonFunction::linear(0.5);
  double tolerance = 1e-4;
  std::size_t max_iterations = 100;
  std::size_t budget = 10'000'000;
  std::size_t sample_count = 100'000;
  double decimate_cell = 0.0;
  std::uint64_t seed = 0;
  double eps_connect = 0.0;
  double eps_separate = 0.0;
  std::optional<SeedSpec> seeds;
  std::optional<RenderWindow> render;

  Gifs build_gifs() const {
    Gifs s;
    s.order = order;
    s.dim = dimension;
    s.phi = phi;
    for (const auto& [mats, off] : maps) s.maps.push_back(GifsMap::make_affine(mats, off));
    s.validate();
    return s;
  }

  SamplingPolicy policy() const {
    SamplingPolicy p;
    p.budget = budget;
    p.sample_count = sample_count;
    p.decimate_cell = decimate_cell;
    p.seed = seed;
    return p;
  }

  // Seed clouds for the sliding-window iteration: the configured seed spec,
  // or the origin singleton, replicated m times.
  std::vector<CompactSetApprox> seed_clouds() const {
    CompactSetApprox c = seeds ? seeds->build()
                               : CompactSetApprox{{Point(dimension, 0.0)}, 0.0};
    return std::vector<CompactSetApprox>(order, c);
  }
};

namespace detail {

inline double number_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw UsageError("config: expected a number at " + path);
  double v = j.get<double>();
  if (!std::isfinite(v)) throw UsageError("config: non-finite number at " + path);
  return v;
}

inline std::size_t count_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw UsageError("config: expected a nonnegative integer at " + path);
  return j.get<std::size_t>();
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.dimension = detail::count_at(j.at("dimension"), "dimension");
  cfg.order = detail::count_at(j.at("order"), "order");
  if (cfg.dimension < 1) throw UsageError("config: dimension must be >= 1");
  if (cfg.order < 1) throw UsageError("config: order must be >= 1");

  if (!j.contains("maps") || !j.at("maps").is_array() || j.at("maps").empty())
    throw UsageError("config: maps must be a nonempty array");
  std::size_t mi = 0;
  for (const auto& jm : j.at("maps")) {
    std::string base = "maps[" + std::to_string(mi) + "]";
    if (!jm.is_object()) throw UsageError("config: " + base + " must be an object");
    const auto& jmat = jm.at("matrices");
    if (!jmat.is_array() || jmat.size() != cfg.order)
      throw UsageError("config: " + base + ".matrices must hold exactly m=" +
                       std::to_string(cfg.order) + " matrices");
    std::vector<Matrix> mats;
    for (std::size_t a = 0; a < jmat.size(); ++a) {
      std::string mp = base + ".matrices[" + std::to_string(a) + "]";
      if (!jmat[a].is_array() || jmat[a].size() != cfg.dimension)
        throw UsageError("config: " + mp + " must have d=" + std::to_string(cfg.dimension) +
                         " rows");
      Matrix mat;
      for (std::size_t r = 0; r < cfg.dimension; ++r) {
        if (!jmat[a][r].is_array() || jmat[a][r].size() != cfg.dimension)
          throw UsageError("config: " + mp + " row " + std::to_string(r) + " must have d=" +
                           std::to_string(cfg.dimension) + " entries");
        std::vector<double> row;
        for (std::size_t c = 0; c < cfg.dimension; ++c)
          row.push_back(detail::number_at(jmat[a][r][c], mp));
        mat.push_back(std::move(row));
      }
      mats.push_back(std::move(mat));
    }
    const auto& joff = jm.at("offset");
    if (!joff.is_array() || joff.size() != cfg.dimension)
      throw UsageError("config: " + base + ".offset must have d=" +
                       std::to_string(cfg.dimension) + " entries");
    Point off;
    for (std::size_t c = 0; c < cfg.dimension; ++c)
      off.push_back(detail::number_at(joff[c], base + ".offset"));
    cfg.maps.emplace_back(std::move(mats), std::move(off));
    ++mi;
  }

  const auto& jphi = j.at("phi");
  std::string kind = jphi.at("kind").get<std::string>();
  if (kind == "linear") {
    cfg.phi = ComparisonFunction::linear(detail::number_at(jphi.at("rate"), "phi.rate"));
  } else if (kind == "tabulated") {
    std::vector<std::pair<double, double>> samples;
    for (const auto& p : jphi.at("samples")) {
      if (!p.is_array() || p.size() != 2)
        throw UsageError("config: phi.samples entries must be [t, phi(t)] pairs");
      samples.emplace_back(detail::number_at(p[0], "phi.samples"),
                           detail::number_at(p[1], "phi.samples"));
    }
    cfg.phi = ComparisonFunction::tabulated(std::move(samples));
  } else {
    throw UsageError("config: phi.kind must be \"linear\" or \"tabulated\"");
  }

  cfg.tolerance = detail::number_at(j.at("tolerance"), "tolerance");
  if (cfg.tolerance <= 0.0) throw UsageError("config: tolerance must be positive");
  cfg.max_iterations = detail::count_at(j.at("max_iterations"), "max_iterations");
  if (j.contains("budget")) cfg.budget = detail::count_at(j.at("budget"), "budget");
  if (cfg.budget < 1) throw UsageError("config: budget must be >= 1");
  if (j.contains("sample_count"))
    cfg.sample_count = detail::count_at(j.at("sample_count"), "sample_count");
  if (cfg.sample_count < 1) throw UsageError("config: sample_count must be >= 1");
  if (j.contains("decimate_cell"))
    cfg.decimate_cell = detail::number_at(j.at("decimate_cell"), "decimate_cell");
  if (cfg.decimate_cell < 0.0) throw UsageError("config: decimate_cell must be >= 0");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("eps_connect"))
    cfg.eps_connect = detail::number_at(j.at("eps_connect"), "eps_connect");
  if (j.contains("eps_separate"))
    cfg.eps_separate = detail::number_at(j.at("eps_separate"), "eps_separate");

  if (j.contains("seeds")) {
    const auto& js = j.at("seeds");
    SeedSpec spec;
    if (js.contains("grid")) {
      std::vector<std::pair<double, double>> box;
      for (const auto& jb : js.at("grid").at("box")) {
        if (!jb.is_array() || jb.size() != 2)
          throw UsageError("config: seeds.grid.box entries must be [lo, hi] pairs");
        box.emplace_back(detail::number_at(jb[0], "seeds.grid.box"),
                         detail::number_at(jb[1], "seeds.grid.box"));
      }
      if (box.size() != cfg.dimension)
        throw UsageError("config: seeds.grid.box must have d entries");
      spec.grid = {std::move(box), detail::number_at(js.at("grid").at("spacing"),
                                                     "seeds.grid.spacing")};
    } else if (js.contains("points")) {
      CompactSetApprox cloud;
      for (const auto& jp : js.at("points")) {
        Point p;
        for (const auto& c : jp) p.push_back(detail::number_at(c, "seeds.points"));
        if (p.size() != cfg.dimension)
          throw UsageError("config: seeds.points entries must have d coordinates");
        cloud.points.push_back(std::move(p));
      }
      if (js.contains("resolution"))
        cloud.resolution = detail::number_at(js.at("resolution"), "seeds.resolution");
      cloud.validate();
      spec.points = std::move(cloud);
    } else {
      throw UsageError("config: seeds needs either grid or points");
    }
    cfg.seeds = std::move(spec);
  }

  if (j.contains("render")) {
    const auto& jr = j.at("render");
    RenderWindow win;
    const auto& jw = jr.at("window");
    if (!jw.is_array() || jw.size() != 2 || !jw[0].is_array() || jw[0].size() != 2 ||
        !jw[1].is_array() || jw[1].size() != 2)
      throw UsageError("config: render.window must be [[xmin,xmax],[ymin,ymax]]");
    win.xmin = detail::number_at(jw[0][0], "render.window");
    win.xmax = detail::number_at(jw[0][1], "render.window");
    win.ymin = detail::number_at(jw[1][0], "render.window");
    win.ymax = detail::number_at(jw[1][1], "render.window");
    win.width = detail::count_at(jr.at("width"), "render.width");
    win.height = detail::count_at(jr.at("height"), "render.height");
    win.validate();
    cfg.render = win;
  }

  return cfg;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config syntax error: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  try {
    return detail::config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: missing or ill-typed field: ") + e.what());
  }
}

inline std::string serialize_config(const RunConfig& cfg) {
  nlohmann::json j;
  j["dimension"] = cfg.dimension;
  j["order"] = cfg.order;
  j["maps"] = nlohmann::json::array();
  for (const auto& [mats, off] : cfg.maps)
    j["maps"].push_back({{"matrices", mats}, {"offset", off}});
  if (cfg.phi.is_linear()) {
    j["phi"] = {{"kind", "linear"}, {"rate", cfg.phi.linear_rate()}};
  } else {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& [t, v] : cfg.phi.samples()) samples.push_back({t, v});
    j["phi"] = {{"kind", "tabulated"}, {"samples", samples}};
  }
  j["tolerance"] = cfg.tolerance;
  j["max_iterations"] = cfg.max_iterations;
  j["budget"] = cfg.budget;
  j["sample_count"] = cfg.sample_count;
  j["decimate_cell"] = cfg.decimate_cell;
  j["seed"] = cfg.seed;
  j["eps_connect"] = cfg.eps_connect;
  j["eps_separate"] = cfg.eps_separate;
  if (cfg.seeds) {
    if (cfg.seeds->grid) {
      nlohmann::json box = nlohmann::json::array();
      for (const auto& [lo, hi] : cfg.seeds->grid->first) box.push_back({lo, hi});
      j["seeds"] = {{"grid", {{"box", box}, {"spacing", cfg.seeds->grid->second}}}};
    } else if (cfg.seeds->points) {
      j["seeds"] = {{"points", cfg.seeds->points->points},
                    {"resolution", cfg.seeds->points->resolution}};
    }
  }
  if (cfg.render) {
    j["render"] = {{"window",
                    {{cfg.render->xmin, cfg.render->xmax}, {cfg.render->ymin, cfg.render->ymax}}},
                   {"width", cfg.render->width},
                   {"height", cfg.render->height}};
  }
  return j.dump(2);
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gifs
