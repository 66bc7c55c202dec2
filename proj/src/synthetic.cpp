#include "wbnd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace wbnd {

BinaryMap label_boundaries(const Raster<int>& labels) {
  BinaryMap out(labels.width(), labels.height());
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const int l = labels(x, y);
      const bool right = x + 1 < labels.width() && labels(x + 1, y) != l;
      const bool down = y + 1 < labels.height() && labels(x, y + 1) != l;
      out(x, y) = (right || down) ? 1 : 0;
    }
  }
  return out;
}

BinaryMap inner_perimeter(const Raster<int>& labels, int region) {
  BinaryMap out(labels.width(), labels.height());
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (labels(x, y) != region) continue;
      bool edge = false;
      for (auto [dx, dy] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        edge = edge || !labels.contains(x + dx, y + dy) || labels(x + dx, y + dy) != region;
      }
      out(x, y) = edge ? 1 : 0;
    }
  }
  return out;
}

namespace {

Scene render_labels(Raster<int> labels, const std::vector<double>& intensity) {
  ImageGrid img(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) img[i] = intensity[static_cast<std::size_t>(labels[i])];
  BinaryMap truth = label_boundaries(labels);
  return {std::move(img), std::move(truth), std::move(labels)};
}

}  // namespace

Scene square_scene(int size, int side, double background, double foreground) {
  if (side <= 0 || side > size) throw Error(Errc::invalid_argument, "square side must be in [1, size]");
  Raster<int> labels(size, size, 0);
  const int x0 = (size - side) / 2;
  for (int y = x0; y < x0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) labels(x, y) = 1;
  }
  return render_labels(std::move(labels), {background, foreground});
}

Scene disk_scene(int size, double radius, double background, double foreground) {
  Raster<int> labels(size, size, 0);
  const double c = 0.5 * (size - 1);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - c;
      const double dy = y - c;
      labels(x, y) = dx * dx + dy * dy <= radius * radius ? 1 : 0;
    }
  }
  return render_labels(std::move(labels), {background, foreground});
}

Scene step_scene(int width, int height, int split, double left, double right) {
  Raster<int> labels(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = split; x < width; ++x) labels(x, y) = 1;
  }
  return render_labels(std::move(labels), {left, right});
}

Scene shapes_scene(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  struct Region {
    double base;
    double gx;
    double gy;
    double tex_amp;
    double tex_fx;
    double tex_fy;
    double tex_phase;
  };
  std::vector<Region> regions;
  regions.push_back({uniform(70.0, 130.0), uniform(-0.3, 0.3), uniform(-0.3, 0.3), uniform(2.0, 6.0),
                     uniform(0.05, 0.3), uniform(0.05, 0.3), uniform(0.0, 6.28)});

  Raster<int> labels(width, height, 0);
  const int shapes = 5 + static_cast<int>(rng() % 3);
  const double scale = std::min(width, height);
  for (int s = 1; s <= shapes; ++s) {
    const double cx = uniform(0.15, 0.85) * width;
    const double cy = uniform(0.15, 0.85) * height;
    const double ra = uniform(0.08, 0.25) * scale;
    const double rb = uniform(0.08, 0.25) * scale;
    const double angle = uniform(0.0, std::numbers::pi);
    const bool ellipse = unit(rng) < 0.5;
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);

    // Pick a base level well away from whatever the shape will cover.
    std::vector<int> covered;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = ((x - cx) * ca + (y - cy) * sa) / ra;
        const double v = (-(x - cx) * sa + (y - cy) * ca) / rb;
        const bool inside = ellipse ? u * u + v * v <= 1.0 : std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
        if (inside) covered.push_back(labels(x, y));
      }
    }
    double base = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      base = uniform(25.0, 230.0);
      bool ok = true;
      for (std::size_t r = 0; r < regions.size() && ok; ++r) {
        const bool touches = std::find(covered.begin(), covered.end(), static_cast<int>(r)) != covered.end();
        if (touches && std::abs(regions[r].base - base) < 50.0) ok = false;
      }
      if (ok) break;
    }
    regions.push_back({base, uniform(-0.4, 0.4), uniform(-0.4, 0.4), uniform(2.0, 6.0), uniform(0.05, 0.3),
                       uniform(0.05, 0.3), uniform(0.0, 6.28)});

    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = ((x - cx) * ca + (y - cy) * sa) / ra;
        const double v = (-(x - cx) * sa + (y - cy) * ca) / rb;
        const bool inside = ellipse ? u * u + v * v <= 1.0 : std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
        if (inside) labels(x, y) = s;
      }
    }
  }

  ImageGrid img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Region& r = regions[static_cast<std::size_t>(labels(x, y))];
      const double dx = x - 0.5 * width;
      const double dy = y - 0.5 * height;
      const double texture = r.tex_amp * std::sin(r.tex_fx * x + r.tex_phase) * std::cos(r.tex_fy * y);
      img(x, y) = std::clamp(r.base + r.gx * dx + r.gy * dy + texture, 0.0, 255.0);
    }
  }
  BinaryMap truth = label_boundaries(labels);
  return {std::move(img), std::move(truth), std::move(labels)};
}

}  // namespace wbnd
