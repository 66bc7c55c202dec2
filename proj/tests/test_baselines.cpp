#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "wbnd/baselines.hpp"
#include "wbnd/synthetic.hpp"

using namespace wbnd;

namespace {

// m = max(|H|, |V|, |D|) from the separable oracle.
ImageGrid oracle_magnitude(const ImageGrid& img) {
  const auto b = oracle::separable_udwt(img, 1, Boundary::symmetric);
  ImageGrid m(img.width(), img.height());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = std::max({std::abs(b.h[0][i]), std::abs(b.v[0][i]), std::abs(b.d[0][i])});
  }
  return m;
}

int components8(const BinaryMap& m) {
  BinaryMap seen(m.width(), m.height());
  int count = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y) || seen(x, y)) continue;
      ++count;
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen(x, y) = 1;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (m.contains(nx, ny) && m(nx, ny) && !seen(nx, ny)) {
              seen(nx, ny) = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
    }
  }
  return count;
}

}  // namespace

TEST_CASE("hthw on constant and over-threshold inputs") {
  CHECK(count_true(hthw_detect(ImageGrid(12, 9, 77.0), {0.01, true})) == 0);
  std::mt19937_64 rng(4);
  const ImageGrid img = oracle::random_image(rng, 20, 20);
  const ImageGrid m = oracle_magnitude(img);
  const double top = *std::max_element(m.data().begin(), m.data().end());
  CHECK(count_true(hthw_detect(img, {top * 1.0001, true})) == 0);
  CHECK(count_true(hthw_detect(img, {top * 1.0001, false})) == 0);
  CHECK_THROWS_AS(hthw_detect(img, {0.0, true}), Error);
  CHECK_THROWS_AS(hthw_detect(ImageGrid(1, 5), {1.0, true}), Error);
}

TEST_CASE("hthw on a vertical step") {
  const Scene sc = step_scene(16, 12, 8, 0.0, 255.0);
  const BinaryMap m = hthw_detect(sc.image, {64.0, true});
  for (int y = 0; y < 12; ++y) {
    int in_row = 0;
    for (int x = 0; x < 16; ++x) {
      if (m(x, y)) {
        ++in_row;
        CHECK(std::abs(x - 7.5) <= 1.0);
      }
    }
    CHECK(in_row >= 1);
    CHECK(in_row <= 2);
  }
}

TEST_CASE("hthw without nms is a pixel threshold; thresholds nest") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageGrid img = oracle::random_image(rng, 17, 13);
    const ImageGrid m = oracle_magnitude(img);
    const double thr = 10.0 + 5.0 * trial;
    const BinaryMap raw = hthw_detect(img, {thr, false});
    for (std::size_t i = 0; i < m.size(); ++i) CHECK((raw[i] != 0) == (m[i] > thr));
    const BinaryMap hi = hthw_detect(img, {thr * 1.5, true});
    for (std::size_t i = 0; i < m.size(); ++i) CHECK((!hi[i] || raw[i]));
  }
  HthwResponse r = hthw_response(oracle::random_image(rng, 8, 8));
  for (std::size_t i = 0; i < r.orientation.size(); ++i) CHECK(r.orientation[i] <= 2);
}

TEST_CASE("hthw orientation ties prefer H then V") {
  // A single bright pixel gives |H| = |V| = |D| at its own position.
  ImageGrid img(6, 6, 0.0);
  img(2, 2) = 8.0;
  const HthwResponse r = hthw_response(img);
  CHECK(r.magnitude(2, 2) == 2.0);
  CHECK(r.orientation(2, 2) == 0);
}

TEST_CASE("gradient helpers") {
  std::mt19937_64 rng(2);
  const ImageGrid img = oracle::random_image(rng, 11, 7);
  CHECK(gaussian_smooth(img, 0.0) == img);
  const ImageGrid flat = gaussian_smooth(ImageGrid(9, 9, 3.0), 1.5);
  for (double v : flat.data()) CHECK(v == doctest::Approx(3.0).epsilon(1e-14));

  ImageGrid ramp(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) ramp(x, y) = 2.0 * x - 1.0 * y;
  }
  const Gradient g = central_gradient(ramp);
  CHECK(g.gx(4, 4) == 2.0);
  CHECK(g.gy(4, 4) == -1.0);
  CHECK(g.magnitude(4, 4) == doctest::Approx(std::sqrt(5.0)));

  CHECK(gradient_sector(1, 0) == 0);
  CHECK(gradient_sector(-1, 0.1) == 0);
  CHECK(gradient_sector(1, 1) == 1);
  CHECK(gradient_sector(0, 1) == 2);
  CHECK(gradient_sector(0, -1) == 2);
  CHECK(gradient_sector(-1, 1) == 3);
  CHECK(gradient_sector(1, -1) == 3);
}

TEST_CASE("canny on constant image and bad thresholds") {
  CHECK(count_true(canny_detect(ImageGrid(16, 16, 5.0), 0.0, 0.0)) == 0);
  CHECK_THROWS_AS(canny_detect(ImageGrid(8, 8), 2.0, 1.0), Error);
  CHECK_THROWS_AS(canny_detect(ImageGrid(8, 8), -1.0, 1.0), Error);
}

TEST_CASE("canny on a clean disk") {
  const double radius = 20.0;
  const Scene sc = disk_scene(64, radius);
  const BinaryMap m = canny_detect(sc.image, 10.0, 25.0);
  const double c = 0.5 * (64 - 1);
  int covered = 0;
  const int samples = 720;
  for (int k = 0; k < samples; ++k) {
    const double th = 2.0 * std::numbers::pi * k / samples;
    const double px = c + radius * std::cos(th);
    const double py = c + radius * std::sin(th);
    bool hit = false;
    for (int y = static_cast<int>(py) - 2; y <= static_cast<int>(py) + 2 && !hit; ++y) {
      for (int x = static_cast<int>(px) - 2; x <= static_cast<int>(px) + 2 && !hit; ++x) {
        hit = m.contains(x, y) && m(x, y) && std::hypot(x - px, y - py) <= 1.0;
      }
    }
    covered += hit ? 1 : 0;
  }
  CHECK(covered >= 0.95 * samples);
  CHECK(components8(m) == 1);
}

TEST_CASE("canny edges are one pixel wide across the gradient") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Scene sc = shapes_scene(48, 40, trial);
    const ImageGrid img = add_gaussian_noise(sc.image, {10.0, static_cast<std::uint64_t>(trial)});
    const CannyResponse r = canny_response(img, 1.0);
    const BinaryMap m = canny_from_response(r, 3.0, 8.0);
    static constexpr int step[4][2] = {{1, 0}, {1, 1}, {0, 1}, {1, -1}};
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        if (!m(x, y)) continue;
        const int s = gradient_sector(r.gradient.gx(x, y), r.gradient.gy(x, y));
        const int nx = x + step[s][0], ny = y + step[s][1];
        if (!m.contains(nx, ny) || !m(nx, ny)) continue;
        CHECK(gradient_sector(r.gradient.gx(nx, ny), r.gradient.gy(nx, ny)) != s);
      }
    }
    // Raising the thresholds never adds pixels.
    const BinaryMap tighter = canny_from_response(r, 6.0, 16.0);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK((!tighter[i] || m[i]));
  }
}
