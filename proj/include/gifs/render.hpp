#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/geometry.hpp"

namespace gifs {

// Axis-aligned render window in R^2.
struct RenderWindow {
  double xmin = 0.0, xmax = 1.0;
  double ymin = 0.0, ymax = 1.0;
  std::size_t width = 256, height = 256;

  void validate() const {
    if (!(xmin < xmax) || !(ymin < ymax)) throw UsageError("render window must be nonempty");
    if (width < 1 || height < 1) throw UsageError("render size must be >= 1");
  }
};

// White background, black mark in every pixel hit by a cloud point. Pixel
// index is floor((p - min)/(max - min) * size), clamped at the top edge;
// points outside the window are skipped.
inline std::vector<std::uint8_t> render_cloud(const CompactSetApprox& cloud,
                                              const RenderWindow& win) {
  win.validate();
  cloud.validate();
  if (cloud.dim() != 2) throw UsageError("render requires dimension 2");
  std::vector<std::uint8_t> img(win.width * win.height, 255);
  for (const Point& p : cloud.points) {
    if (p[0] < win.xmin || p[0] > win.xmax || p[1] < win.ymin || p[1] > win.ymax) continue;
    auto ix = static_cast<std::size_t>(
        std::floor((p[0] - win.xmin) / (win.xmax - win.xmin) * win.width));
    auto iy = static_cast<std::size_t>(
        std::floor((p[1] - win.ymin) / (win.ymax - win.ymin) * win.height));
    if (ix >= win.width) ix = win.width - 1;
    if (iy >= win.height) iy = win.height - 1;
    img[iy * win.width + ix] = 0;
  }
  return img;
}

// Binary 8-bit PGM (P5); the comment line carries the window box.
inline void write_pgm(std::ostream& os, const std::vector<std::uint8_t>& img,
                      const RenderWindow& win) {
  if (img.size() != win.width * win.height) throw UsageError("pgm: pixel count mismatch");
  os << "P5\n"
     << "# window " << format_double(win.xmin) << ' ' << format_double(win.xmax) << ' '
     << format_double(win.ymin) << ' ' << format_double(win.ymax) << "\n"
     << win.width << ' ' << win.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

inline void write_pgm_file(const std::string& path, const std::vector<std::uint8_t>& img,
                           const RenderWindow& win) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path);
  write_pgm(os, img, win);
}

}  // namespace gifs
