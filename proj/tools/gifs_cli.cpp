// Command-line front end: attractor, render, connect, arc, code, verify.
// stdout carries only the paths of files written; diagnostics go to stderr.
// Exit statuses: 0 ok, 1 verification failure, 2 usage, 3 resource,
// 4 divergence, 5 disconnection.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gifs/code_space.hpp"
#include "gifs/config.hpp"
#include "gifs/errors.hpp"
#include "gifs/geometry.hpp"
#include "gifs/gifs_core.hpp"
#include "gifs/render.hpp"
#include "gifs/topology.hpp"
#include "gifs/verify.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
};

gifs::RunConfig load(const CommonArgs& args) {
  gifs::RunConfig cfg = gifs::load_config_file(args.config_path);
  if (args.seed_override) cfg.seed = *args.seed_override;
  fs::create_directories(args.out_dir);
  return cfg;
}

void emit(const std::string& path) { std::cout << path << "\n"; }

gifs::AttractorApprox compute_attractor(const gifs::RunConfig& cfg) {
  gifs::Gifs s = cfg.build_gifs();
  return gifs::attractor_iterate(s, cfg.seed_clouds(), cfg.tolerance, cfg.max_iterations,
                                 cfg.policy());
}

int cmd_attractor(const CommonArgs& args) {
  gifs::RunConfig cfg = load(args);
  auto t0 = std::chrono::steady_clock::now();
  gifs::AttractorApprox a = compute_attractor(cfg);
  auto t1 = std::chrono::steady_clock::now();

  std::string cloud_path = (fs::path(args.out_dir) / "attractor.csv").string();
  gifs::write_cloud_file(cloud_path, a.cloud);
  emit(cloud_path);

  std::string report_path = (fs::path(args.out_dir) / "attractor_report.txt").string();
  std::ofstream report(report_path, std::ios::binary);
  report << "iterations=" << a.iterations << "\n"
         << "residual=" << gifs::format_double(a.residual) << "\n"
         << "error_bound=" << gifs::format_double(a.error_bound) << "\n"
         << "resolution=" << gifs::format_double(a.cloud.resolution) << "\n"
         << "points=" << a.cloud.points.size() << "\n";
  emit(report_path);
  std::cerr << "wall_time_s="
            << std::chrono::duration<double>(t1 - t0).count() << "\n";
  return 0;
}

int cmd_render(const CommonArgs& args, const std::string& cloud_path) {
  gifs::RunConfig cfg = load(args);
  if (!cfg.render) throw gifs::UsageError("config has no render section");
  gifs::CompactSetApprox cloud =
      cloud_path.empty() ? compute_attractor(cfg).cloud : gifs::read_cloud_file(cloud_path);
  auto img = gifs::render_cloud(cloud, *cfg.render);
  std::string path = (fs::path(args.out_dir) / "render.pgm").string();
  gifs::write_pgm_file(path, img, *cfg.render);
  emit(path);
  return 0;
}

int cmd_connect(const CommonArgs& args) {
  gifs::RunConfig cfg = load(args);
  gifs::Gifs s = cfg.build_gifs();
  gifs::AttractorApprox a = compute_attractor(cfg);
  gifs::VerdictResult v =
      gifs::connectedness_verdict(s, a, cfg.eps_connect, cfg.eps_separate, cfg.policy());
  std::string path = (fs::path(args.out_dir) / "verdict.txt").string();
  std::ofstream os(path, std::ios::binary);
  os << gifs::format_verdict(v) << "\n";
  emit(path);
  return 0;
}

int cmd_arc(const CommonArgs& args, const std::string& x_code, const std::string& y_code,
            std::size_t depth) {
  gifs::RunConfig cfg = load(args);
  gifs::Gifs s = cfg.build_gifs();
  gifs::AttractorApprox a = compute_attractor(cfg);
  gifs::CodeSpec xc = gifs::parse_codespec(x_code, s.n(), s.order);
  gifs::CodeSpec yc = gifs::parse_codespec(y_code, s.n(), s.order);
  double threshold = cfg.eps_connect > 0.0
                         ? cfg.eps_connect
                         : 2.0 * (a.cloud.resolution + a.error_bound);
  gifs::ArcBuildResult arc =
      gifs::build_arc(s, a, xc, yc, depth, threshold, cfg.sample_count, cfg.seed);
  std::string path = (fs::path(args.out_dir) / "arc.csv").string();
  std::ofstream os(path, std::ios::binary);
  gifs::write_arc(os, arc.final());
  emit(path);
  return 0;
}

int cmd_code(const CommonArgs& args, const std::string& code_literal, std::size_t depth) {
  gifs::RunConfig cfg = load(args);
  gifs::Gifs s = cfg.build_gifs();
  gifs::CodeSpec code = gifs::parse_codespec(code_literal, s.n(), s.order);
  gifs::PointTuple x(s.order, gifs::Point(s.dim, 0.0));
  gifs::CodingPoint cp = gifs::coding_point(s, code, depth, x);
  std::string path = (fs::path(args.out_dir) / "code.txt").string();
  std::ofstream os(path, std::ios::binary);
  os << "point=";
  for (std::size_t i = 0; i < cp.point.size(); ++i)
    os << (i ? "," : "") << gifs::format_double(cp.point[i]);
  os << "\nbound=" << gifs::format_double(cp.bound) << "\n";
  emit(path);
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  gifs::RunConfig cfg = load(args);
  auto checks = gifs::run_verify(cfg);
  std::string path = (fs::path(args.out_dir) / "verify.txt").string();
  std::ofstream os(path, std::ios::binary);
  bool all_pass = true;
  for (const auto& c : checks) {
    os << gifs::format_check(c) << "\n";
    all_pass = all_pass && c.pass;
  }
  emit(path);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized iterated function systems: attractors, code space, connectedness"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string cloud_path, code_literal, x_code, y_code;
  std::size_t depth = 4;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")->required();
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--seed", common.seed_override, "override the config seed");
  };

  CLI::App* attractor = app.add_subcommand("attractor", "iterate to the attractor");
  add_common(attractor);
  CLI::App* render = app.add_subcommand("render", "rasterize a cloud to PGM (d=2)");
  add_common(render);
  render->add_option("--cloud", cloud_path, "point-cloud CSV (default: compute the attractor)");
  CLI::App* connect = app.add_subcommand("connect", "connectedness verdict");
  add_common(connect);
  CLI::App* arc = app.add_subcommand("arc", "build an arc between two coded points");
  add_common(arc);
  arc->add_option("--x-code", x_code, "code literal of the start point")->required();
  arc->add_option("--y-code", y_code, "code literal of the end point")->required();
  arc->add_option("--depth", depth, "refinement levels");
  CLI::App* code = app.add_subcommand("code", "evaluate the coding map at a code");
  add_common(code);
  code->add_option("--code", code_literal, "code literal")->required();
  code->add_option("--depth", depth, "truncation depth");
  CLI::App* verify = app.add_subcommand("verify", "run the invariant check suite");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (attractor->parsed()) return cmd_attractor(common);
    if (render->parsed()) return cmd_render(common, cloud_path);
    if (connect->parsed()) return cmd_connect(common);
    if (arc->parsed()) return cmd_arc(common, x_code, y_code, depth);
    if (code->parsed()) return cmd_code(common, code_literal, depth);
    if (verify->parsed()) return cmd_verify(common);
  } catch (const gifs::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const gifs::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const gifs::DivergenceError& e) {
    std::cerr << "divergence error: " << e.what() << "\n";
    return 4;
  } catch (const gifs::DisconnectionError& e) {
    std::cerr << "disconnection error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 10;
  }
  return 2;
}
