#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wbnd/error.hpp"

namespace wbnd {

/// Dense row-major 2-D raster. Width and height are always positive.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(Errc::dimension_mismatch, "raster data length does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  static void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
      throw Error(Errc::invalid_argument, "raster dimensions must be positive");
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Real-valued intensity image.
using ImageGrid = Raster<double>;

/// Edge labels: nonzero = edge.
using BinaryMap = Raster<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(Errc::dimension_mismatch, std::string(what) + ": rasters differ in size");
  }
}

std::size_t count_true(const BinaryMap& map) noexcept;

/// How out-of-range samples are fetched by windowed operators.
enum class Boundary {
  symmetric,  // half-sample mirror: x[-1] = x[0], x[n] = x[n-1]
  periodic,
};

/// Maps an arbitrary index into [0, n) under the given extension rule.
inline int extend_index(int i, int n, Boundary boundary) noexcept {
  if (i >= 0 && i < n) return i;
  if (boundary == Boundary::periodic) {
    int r = i % n;
    return r < 0 ? r + n : r;
  }
  const int period = 2 * n;
  int r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - 1 - r;
}

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Reads an 8/16-bit grayscale PGM (P5) or PNG. Pixel values are kept as integers.
ImageGrid load_image(const std::filesystem::path& path);

/// Loads any supported raster and marks pixels >= threshold as edges.
BinaryMap load_binary_map(const std::filesystem::path& path, double threshold = 128.0);

BinaryMap threshold_map(const ImageGrid& img, double threshold = 128.0);

/// Writes a P5 PGM with edge = 255, background = 0.
void save_binary_map(const BinaryMap& map, const std::filesystem::path& path);

/// Writes an 8-bit P5 PGM. Values are rounded and clamped to [0, 255].
void save_image(const ImageGrid& img, const std::filesystem::path& path);

/// v -> ln(1 + v). Throws on negative input, naming the first offending pixel.
ImageGrid log_transform(const ImageGrid& img);

/// Adds i.i.d. N(0, sigma^2) noise from a generator seeded by `spec.seed`. No clipping.
ImageGrid add_gaussian_noise(const ImageGrid& img, const NoiseSpec& spec);

/// Local-statistics adaptive Wiener filter over a window x window neighborhood.
/// The noise variance defaults to the mean of all local variances.
ImageGrid wiener_filter(const ImageGrid& img, int window = 3,
                        std::optional<double> noise_variance = std::nullopt);

ImageGrid median_filter(const ImageGrid& img, int window = 3);

}  // namespace wbnd
