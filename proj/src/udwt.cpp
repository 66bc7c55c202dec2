#include "wbnd/udwt.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "wbnd/parallel.hpp"

namespace wbnd {

std::string_view to_string(Band band) noexcept {
  switch (band) {
    case Band::horizontal: return "horizontal";
    case Band::vertical: return "vertical";
    case Band::diagonal: return "diagonal";
  }
  return "?";
}

const ImageGrid& UdwtPyramid::band(Band b, int level) const {
  if (level < 1 || level > levels()) {
    throw Error(Errc::invalid_argument, "pyramid level " + std::to_string(level) + " out of range");
  }
  const auto i = static_cast<std::size_t>(level - 1);
  switch (b) {
    case Band::horizontal: return horizontal[i];
    case Band::vertical: return vertical[i];
    case Band::diagonal: return diagonal[i];
  }
  throw Error(Errc::invalid_argument, "unknown band");
}

UdwtPyramid udwt_forward(const ImageGrid& img, int levels, Boundary boundary, std::size_t workers) {
  if (levels < 1) throw Error(Errc::invalid_argument, "udwt_forward: levels must be >= 1");
  const int w = img.width();
  const int h = img.height();
  if (levels >= 31 || w < (1 << levels) || h < (1 << levels)) {
    throw Error(Errc::image_too_small, "udwt_forward: image " + std::to_string(w) + "x" + std::to_string(h) +
                                           " is smaller than 2^" + std::to_string(levels));
  }

  UdwtPyramid pyr;
  ImageGrid current = img;
  std::vector<int> next_x(static_cast<std::size_t>(w));
  std::vector<int> next_y(static_cast<std::size_t>(h));
  for (int t = 1; t <= levels; ++t) {
    const int step = 1 << (t - 1);
    for (int x = 0; x < w; ++x) next_x[static_cast<std::size_t>(x)] = extend_index(x + step, w, boundary);
    for (int y = 0; y < h; ++y) next_y[static_cast<std::size_t>(y)] = extend_index(y + step, h, boundary);

    ImageGrid approx(w, h);
    ImageGrid hor(w, h);
    ImageGrid ver(w, h);
    ImageGrid dia(w, h);
    parallel_for(static_cast<std::size_t>(h), workers, [&](std::size_t y0, std::size_t y1) {
      for (auto yy = y0; yy < y1; ++yy) {
        const int y = static_cast<int>(yy);
        const int yn = next_y[yy];
        for (int x = 0; x < w; ++x) {
          const int xn = next_x[static_cast<std::size_t>(x)];
          const double a = current(x, y);    // (x,   y)
          const double b = current(xn, y);   // (x+d, y)
          const double c = current(x, yn);   // (x,   y+d)
          const double e = current(xn, yn);  // (x+d, y+d)
          approx(x, y) = 0.25 * ((a + e) + (b + c));
          hor(x, y) = 0.25 * ((a + c) - (b + e));
          ver(x, y) = 0.25 * ((a + b) - (c + e));
          dia(x, y) = 0.25 * ((a + e) - (b + c));
        }
      }
    });
    pyr.horizontal.push_back(std::move(hor));
    pyr.vertical.push_back(std::move(ver));
    pyr.diagonal.push_back(std::move(dia));
    current = std::move(approx);
  }
  pyr.approximation = std::move(current);
  return pyr;
}

ImageGrid udwt_inverse(const UdwtPyramid& pyr) {
  const int levels = pyr.levels();
  if (levels < 1 || pyr.vertical.size() != pyr.horizontal.size() ||
      pyr.diagonal.size() != pyr.horizontal.size() || pyr.approximation.empty()) {
    throw Error(Errc::invalid_argument, "udwt_inverse: malformed pyramid");
  }
  for (int t = 1; t <= levels; ++t) {
    for (Band b : {Band::horizontal, Band::vertical, Band::diagonal}) {
      require_same_shape(pyr.band(b, t), pyr.approximation, "udwt_inverse");
    }
  }
  ImageGrid current = pyr.approximation;
  for (int t = levels; t >= 1; --t) {
    const auto& hor = pyr.band(Band::horizontal, t);
    const auto& ver = pyr.band(Band::vertical, t);
    const auto& dia = pyr.band(Band::diagonal, t);
    for (std::size_t i = 0; i < current.size(); ++i) {
      current[i] = (current[i] + hor[i]) + (ver[i] + dia[i]);
    }
  }
  return current;
}

std::vector<double> extract_chain(const UdwtPyramid& pyr, Band band, int x, int y) {
  if (!pyr.approximation.contains(x, y)) {
    throw Error(Errc::invalid_argument, "extract_chain: (" + std::to_string(x) + ", " + std::to_string(y) +
                                            ") outside the grid");
  }
  std::vector<double> chain;
  chain.reserve(static_cast<std::size_t>(pyr.levels()));
  for (int t = 1; t <= pyr.levels(); ++t) chain.push_back(pyr.band(band, t)(x, y));
  return chain;
}

void dump_bands(const UdwtPyramid& pyr, const std::filesystem::path& dir, std::string_view stem) {
  std::filesystem::create_directories(dir);
  const auto sidecar_path = dir / (std::string(stem) + "_scales.txt");
  std::ofstream sidecar(sidecar_path);
  if (!sidecar) throw Error(Errc::io_failure, "cannot write " + sidecar_path.string());
  sidecar << "# file min max  (pixel = 255 * (value - min) / (max - min))\n";

  auto dump = [&](const ImageGrid& grid, const std::string& name) {
    const auto [lo_it, hi_it] = std::minmax_element(grid.data().begin(), grid.data().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    ImageGrid scaled(grid.width(), grid.height());
    const double span = hi - lo;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      scaled[i] = span > 0.0 ? 255.0 * (grid[i] - lo) / span : 0.0;
    }
    const std::string file = std::string(stem) + "_" + name + ".pgm";
    save_image(scaled, dir / file);
    char line[256];
    std::snprintf(line, sizeof line, "%s %.17g %.17g\n", file.c_str(), lo, hi);
    sidecar << line;
  };

  for (int t = 1; t <= pyr.levels(); ++t) {
    for (Band b : {Band::horizontal, Band::vertical, Band::diagonal}) {
      dump(pyr.band(b, t), std::string(to_string(b)) + "_" + std::to_string(t));
    }
  }
  dump(pyr.approximation, "approximation");
  if (!sidecar) throw Error(Errc::io_failure, "write failed for " + sidecar_path.string());
}

}  // namespace wbnd
