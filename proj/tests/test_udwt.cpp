#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "temp_dir.hpp"
#include "wbnd/udwt.hpp"

using namespace wbnd;

namespace {

double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ImageGrid transpose(const ImageGrid& img) {
  ImageGrid t(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) t(y, x) = img(x, y);
  }
  return t;
}

ImageGrid circular_shift(const ImageGrid& img, int dx, int dy) {
  ImageGrid out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out(extend_index(x + dx, img.width(), Boundary::periodic), extend_index(y + dy, img.height(), Boundary::periodic)) =
          img(x, y);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("constant image has zero detail bands") {
  const UdwtPyramid pyr = udwt_forward(ImageGrid(8, 8, 42.0), 3);
  REQUIRE(pyr.levels() == 3);
  for (int t = 1; t <= 3; ++t) {
    for (Band b : {Band::horizontal, Band::vertical, Band::diagonal}) {
      for (double v : pyr.band(b, t).data()) CHECK(v == 0.0);
    }
  }
  CHECK(pyr.approximation == ImageGrid(8, 8, 42.0));
  for (int y = 0; y < 8; y += 3) CHECK(extract_chain(pyr, Band::horizontal, 5, y) == std::vector<double>(3, 0.0));
}

TEST_CASE("vertical step, one level") {
  ImageGrid step(8, 8, 0.0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 4; x < 8; ++x) step(x, y) = 1.0;
  }
  const UdwtPyramid pyr = udwt_forward(step, 1);
  const oracle::Bands ref = oracle::separable_udwt(step, 1, Boundary::symmetric);
  CHECK(max_abs_diff(pyr.horizontal[0], ref.h[0]) == 0.0);
  int nonzero = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const double v = pyr.horizontal[0](x, y);
      if (v != 0.0) {
        ++nonzero;
        CHECK((x == 3 || x == 4));
        CHECK(std::abs(v) == 0.5);
      }
      CHECK(pyr.vertical[0](x, y) == 0.0);
      CHECK(pyr.diagonal[0](x, y) == 0.0);
    }
  }
  CHECK(nonzero > 0);
  CHECK(extract_chain(pyr, Band::horizontal, 3, 2) == std::vector<double>{pyr.horizontal[0](3, 2)});
}

TEST_CASE("forward matches the separable convolution oracle") {
  std::mt19937_64 rng(2024);
  for (Boundary b : {Boundary::symmetric, Boundary::periodic}) {
    for (int trial = 0; trial < 6; ++trial) {
      const int w = 8 + static_cast<int>(rng() % 20);
      const int h = 8 + static_cast<int>(rng() % 20);
      const ImageGrid img = oracle::random_image(rng, w, h);
      const UdwtPyramid pyr = udwt_forward(img, 3, b);
      const oracle::Bands ref = oracle::separable_udwt(img, 3, b);
      for (int t = 0; t < 3; ++t) {
        CHECK(max_abs_diff(pyr.horizontal[t], ref.h[t]) < 1e-12);
        CHECK(max_abs_diff(pyr.vertical[t], ref.v[t]) < 1e-12);
        CHECK(max_abs_diff(pyr.diagonal[t], ref.d[t]) < 1e-12);
      }
      CHECK(max_abs_diff(pyr.approximation, ref.approx) < 1e-12);
      const auto chain = extract_chain(pyr, Band::vertical, w / 2, h / 3);
      for (int t = 0; t < 3; ++t) CHECK(chain[t] == doctest::Approx(ref.v[t](w / 2, h / 3)).epsilon(1e-12));
    }
  }
}

TEST_CASE("perfect reconstruction") {
  std::mt19937_64 rng(77);
  for (auto [size, T] : {std::pair{16, 3}, std::pair{8, 2}, std::pair{33, 4}}) {
    const ImageGrid img = oracle::random_image(rng, size, size + 3);
    CHECK(max_abs_diff(udwt_inverse(udwt_forward(img, T)), img) <= 1e-10);
  }

  UdwtPyramid zero = udwt_forward(ImageGrid(8, 8, 0.0), 2);
  zero.approximation = ImageGrid(8, 8, -3.5);
  CHECK(udwt_inverse(zero) == ImageGrid(8, 8, -3.5));
}

TEST_CASE("synthesis atom re-analyses with positive coefficient") {
  UdwtPyramid pyr = udwt_forward(ImageGrid(16, 16, 0.0), 2);
  pyr.horizontal[0](7, 7) = 1.0;
  const ImageGrid atom = udwt_inverse(pyr);
  CHECK(atom(7, 7) == 1.0);
  double mass = 0.0;
  for (double v : atom.data()) mass += std::abs(v);
  CHECK(mass == 1.0);
  const oracle::Bands re = oracle::separable_udwt(atom, 2, Boundary::symmetric);
  CHECK(re.h[0](7, 7) > 0.0);
  CHECK(udwt_forward(atom, 2).horizontal[0](7, 7) > 0.0);
}

TEST_CASE("linearity") {
  std::mt19937_64 rng(4);
  const ImageGrid x = oracle::random_image(rng, 20, 18);
  const ImageGrid y = oracle::random_image(rng, 20, 18);
  const double a = 1.7, b = -0.3;
  ImageGrid mix(20, 18);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
  const auto px = udwt_forward(x, 3), py = udwt_forward(y, 3), pm = udwt_forward(mix, 3);
  for (int t = 1; t <= 3; ++t) {
    for (Band band : {Band::horizontal, Band::vertical, Band::diagonal}) {
      for (std::size_t i = 0; i < mix.size(); ++i) {
        const double expect = a * px.band(band, t)[i] + b * py.band(band, t)[i];
        CHECK(std::abs(pm.band(band, t)[i] - expect) < 1e-12 * 1000);
      }
    }
  }
}

TEST_CASE("shift covariance") {
  std::mt19937_64 rng(99);
  const ImageGrid img = oracle::random_image(rng, 32, 32);
  for (auto [dx, dy] : {std::pair{3, 0}, std::pair{0, 5}, std::pair{7, 11}}) {
    const auto shifted = udwt_forward(circular_shift(img, dx, dy), 3, Boundary::periodic);
    const auto base = udwt_forward(img, 3, Boundary::periodic);
    for (int t = 1; t <= 3; ++t) {
      for (Band band : {Band::horizontal, Band::vertical, Band::diagonal}) {
        CHECK(shifted.band(band, t) == circular_shift(base.band(band, t), dx, dy));
      }
    }

    // Symmetric borders: equality away from the border.
    const auto ss = udwt_forward(circular_shift(img, dx, dy), 3, Boundary::symmetric);
    const auto sb = udwt_forward(img, 3, Boundary::symmetric);
    const int margin = 1 << 3;
    for (int t = 1; t <= 3; ++t) {
      const ImageGrid moved = circular_shift(sb.band(Band::horizontal, t), dx, dy);
      for (int y = margin + dy; y < 32 - margin; ++y) {
        for (int x = margin + dx; x < 32 - margin; ++x) {
          CHECK(ss.band(Band::horizontal, t)(x, y) == moved(x, y));
        }
      }
    }
  }
}

TEST_CASE("transposing swaps horizontal and vertical exactly") {
  std::mt19937_64 rng(12);
  const ImageGrid img = oracle::random_image(rng, 24, 17);
  const auto p = udwt_forward(img, 3);
  const auto q = udwt_forward(transpose(img), 3);
  for (int t = 1; t <= 3; ++t) {
    CHECK(q.band(Band::horizontal, t) == transpose(p.band(Band::vertical, t)));
    CHECK(q.band(Band::vertical, t) == transpose(p.band(Band::horizontal, t)));
    CHECK(q.band(Band::diagonal, t) == transpose(p.band(Band::diagonal, t)));
  }
}

TEST_CASE("worker count does not change bytes") {
  std::mt19937_64 rng(6);
  const ImageGrid img = oracle::random_image(rng, 40, 37);
  const auto a = udwt_forward(img, 3, Boundary::symmetric, 1);
  const auto b = udwt_forward(img, 3, Boundary::symmetric, 5);
  for (int t = 1; t <= 3; ++t) CHECK(a.band(Band::diagonal, t) == b.band(Band::diagonal, t));
  CHECK(a.approximation == b.approximation);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(udwt_forward(ImageGrid(7, 16), 3), Error);
  CHECK_THROWS_AS(udwt_forward(ImageGrid(8, 8), 0), Error);
  const auto pyr = udwt_forward(ImageGrid(8, 8), 1);
  CHECK_THROWS_AS(extract_chain(pyr, Band::horizontal, 8, 0), Error);
  CHECK_THROWS_AS(extract_chain(pyr, Band::horizontal, 0, -1), Error);
  CHECK_THROWS_AS(pyr.band(Band::horizontal, 2), Error);
  UdwtPyramid bad = pyr;
  bad.vertical[0] = ImageGrid(4, 4);
  CHECK_THROWS_AS(udwt_inverse(bad), Error);
}

TEST_CASE("dump_bands writes files and scales") {
  TempDir dir;
  std::mt19937_64 rng(1);
  dump_bands(udwt_forward(oracle::random_image(rng, 16, 16), 2), dir.path(), "img");
  CHECK(std::filesystem::exists(dir / "img_horizontal_1.pgm"));
  CHECK(std::filesystem::exists(dir / "img_diagonal_2.pgm"));
  CHECK(std::filesystem::exists(dir / "img_approximation.pgm"));
  std::ifstream in(dir / "img_scales.txt");
  int lines = 0;
  for (std::string line; std::getline(in, line);) lines += line.empty() || line[0] == '#' ? 0 : 1;
  CHECK(lines == 7);
}
