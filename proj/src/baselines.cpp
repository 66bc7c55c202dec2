#include "wbnd/baselines.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "wbnd/udwt.hpp"

namespace wbnd {

HthwResponse hthw_response(const ImageGrid& img) {
  if (img.width() < 2 || img.height() < 2) throw Error(Errc::image_too_small, "hthw needs at least 2x2 pixels");
  const UdwtPyramid pyr = udwt_forward(img, 1);
  HthwResponse r{ImageGrid(img.width(), img.height()), Raster<std::uint8_t>(img.width(), img.height())};
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double h = std::abs(pyr.horizontal[0][i]);
    const double v = std::abs(pyr.vertical[0][i]);
    const double d = std::abs(pyr.diagonal[0][i]);
    std::uint8_t o = 0;
    double m = h;
    if (v > m) {
      m = v;
      o = 1;
    }
    if (d > m) {
      m = d;
      o = 2;
    }
    r.magnitude[i] = m;
    r.orientation[i] = o;
  }
  return r;
}

BinaryMap hthw_from_response(const HthwResponse& r, const HthwConfig& cfg) {
  if (!(cfg.threshold > 0.0)) throw Error(Errc::invalid_argument, "hthw threshold must be positive");
  const auto& m = r.magnitude;
  const int w = m.width();
  const int h = m.height();
  auto at = [&](int x, int y) {
    return m(extend_index(x, w, Boundary::symmetric), extend_index(y, h, Boundary::symmetric));
  };
  BinaryMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = m(x, y);
      if (!(v > cfg.threshold)) continue;
      bool keep = true;
      if (cfg.nms) {
        switch (r.orientation(x, y)) {
          case 0: keep = v >= at(x - 1, y) && v >= at(x + 1, y); break;
          case 1: keep = v >= at(x, y - 1) && v >= at(x, y + 1); break;
          default:
            keep = v >= at(x - 1, y - 1) && v >= at(x + 1, y + 1) && v >= at(x + 1, y - 1) && v >= at(x - 1, y + 1);
            break;
        }
      }
      out(x, y) = keep ? 1 : 0;
    }
  }
  return out;
}

BinaryMap hthw_detect(const ImageGrid& img, const HthwConfig& cfg) {
  if (!(cfg.threshold > 0.0)) throw Error(Errc::invalid_argument, "hthw threshold must be positive");
  return hthw_from_response(hthw_response(img), cfg);
}

ImageGrid gaussian_smooth(const ImageGrid& img, double sigma) {
  if (!(sigma >= 0.0)) throw Error(Errc::invalid_argument, "smoothing sigma must be non-negative");
  if (sigma == 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * k * k / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  const int w = img.width();
  const int h = img.height();
  ImageGrid tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * img(extend_index(x + k, w, Boundary::symmetric), y);
      }
      tmp(x, y) = acc;
    }
  }
  ImageGrid out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp(x, extend_index(y + k, h, Boundary::symmetric));
      }
      out(x, y) = acc;
    }
  }
  return out;
}

Gradient central_gradient(const ImageGrid& img) {
  const int w = img.width();
  const int h = img.height();
  Gradient g{ImageGrid(w, h), ImageGrid(w, h), ImageGrid(w, h)};
  for (int y = 0; y < h; ++y) {
    const int ym = extend_index(y - 1, h, Boundary::symmetric);
    const int yp = extend_index(y + 1, h, Boundary::symmetric);
    for (int x = 0; x < w; ++x) {
      const int xm = extend_index(x - 1, w, Boundary::symmetric);
      const int xp = extend_index(x + 1, w, Boundary::symmetric);
      const double gx = 0.5 * (img(xp, y) - img(xm, y));
      const double gy = 0.5 * (img(x, yp) - img(x, ym));
      g.gx(x, y) = gx;
      g.gy(x, y) = gy;
      g.magnitude(x, y) = std::hypot(gx, gy);
    }
  }
  return g;
}

int gradient_sector(double gx, double gy) noexcept {
  double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
  if (angle < 0.0) angle += 180.0;
  if (angle < 22.5 || angle >= 157.5) return 0;
  if (angle < 67.5) return 1;
  if (angle < 112.5) return 2;
  return 3;
}

namespace {

constexpr std::array<std::pair<int, int>, 4> kSectorStep{{{1, 0}, {1, 1}, {0, 1}, {1, -1}}};

}  // namespace

CannyResponse canny_response(const ImageGrid& img, double smooth_sigma) {
  CannyResponse r{central_gradient(gaussian_smooth(img, smooth_sigma)), ImageGrid(img.width(), img.height())};
  const auto& mag = r.gradient.magnitude;
  const int w = mag.width();
  const int h = mag.height();
  auto at = [&](int x, int y) { return mag.contains(x, y) ? mag(x, y) : 0.0; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (!(m > 0.0)) continue;
      const auto [dx, dy] = kSectorStep[static_cast<std::size_t>(gradient_sector(r.gradient.gx(x, y), r.gradient.gy(x, y)))];
      // Strict on one side, non-strict on the other: plateaus two pixels wide keep one pixel.
      if (m > at(x - dx, y - dy) && m >= at(x + dx, y + dy)) r.thinned(x, y) = m;
    }
  }
  return r;
}

BinaryMap canny_from_response(const CannyResponse& r, double low, double high) {
  if (!(low >= 0.0) || !(high >= low)) throw Error(Errc::invalid_argument, "canny needs 0 <= low <= high");
  const auto& m = r.thinned;
  const int w = m.width();
  const int h = m.height();
  BinaryMap out(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (m(x, y) > high && !out(x, y)) {
        out(x, y) = 1;
        stack.emplace_back(x, y);
      }
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (!m.contains(nx, ny) || out(nx, ny) || !(m(nx, ny) > low)) continue;
            out(nx, ny) = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return out;
}

BinaryMap canny_detect(const ImageGrid& img, double low, double high, double smooth_sigma) {
  if (!(low >= 0.0) || !(high >= low)) throw Error(Errc::invalid_argument, "canny needs 0 <= low <= high");
  return canny_from_response(canny_response(img, smooth_sigma), low, high);
}

}  // namespace wbnd
