#include "wbnd/raster.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>

namespace wbnd {

std::size_t count_true(const BinaryMap& map) noexcept {
  return static_cast<std::size_t>(
      std::count_if(map.data().begin(), map.data().end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::missing_file, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Netpbm header token reader: skips whitespace and '#' comments.
class PnmHeader {
 public:
  PnmHeader(const std::vector<unsigned char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(Errc::corrupt_header, name_ + ": expected integer in PGM header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw Error(Errc::corrupt_header, name_ + ": header value out of range");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t data_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(Errc::corrupt_header, name_ + ": missing separator after maxval");
    }
    return pos_ + 1;
  }

  void seek(std::size_t p) { pos_ = p; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

ImageGrid decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes[1] != '5') {
    throw Error(Errc::unsupported_format,
                name + ": only binary grayscale PGM (P5) is supported, got P" +
                    std::string(1, static_cast<char>(bytes[1])));
  }
  PnmHeader header(bytes, name);
  header.seek(2);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width <= 0 || height <= 0) throw Error(Errc::corrupt_header, name + ": non-positive dimensions");
  if (maxval <= 0 || maxval > 65535) throw Error(Errc::corrupt_header, name + ": maxval out of range");
  const std::size_t offset = header.data_offset();

  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  if (bytes.size() < offset + pixels * bytes_per_sample) {
    throw Error(Errc::corrupt_data, name + ": truncated pixel data");
  }
  std::vector<double> data(pixels);
  const unsigned char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < pixels; ++i) {
    data[i] = bytes_per_sample == 1 ? p[i] : static_cast<double>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return ImageGrid(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

struct PngReadContext {
  const std::vector<unsigned char>* bytes;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* ctx = static_cast<PngReadContext*>(png_get_io_ptr(png));
  if (ctx->pos + length > ctx->bytes->size()) png_error(png, "unexpected end of PNG data");
  std::copy_n(ctx->bytes->data() + ctx->pos, length, out);
  ctx->pos += length;
}

enum class PngStatus { ok, unsupported, corrupt_header, corrupt_data };

// Plain-C style on purpose: libpng reports errors through longjmp, so nothing
// with a destructor may be constructed between setjmp and the last libpng call.
PngStatus decode_png_raw(const std::vector<unsigned char>& bytes, std::vector<unsigned char>& pixels,
                         png_uint_32& width, png_uint_32& height, int& bit_depth) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return PngStatus::corrupt_header;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return PngStatus::corrupt_header;
  }
  PngReadContext ctx{&bytes, 0};
  volatile bool header_done = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return header_done ? PngStatus::corrupt_data : PngStatus::corrupt_header;
  }
  png_set_read_fn(png, &ctx, png_read_from_memory);
  png_read_info(png, info);
  header_done = true;

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::unsupported;
  }
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    bit_depth = 8;
  }
  png_read_update_info(png, info);
  const png_size_t row_bytes = png_get_rowbytes(png, info);
  if (pixels.size() < row_bytes * height) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::corrupt_data;
  }
  for (png_uint_32 y = 0; y < height; ++y) {
    png_read_row(png, pixels.data() + y * row_bytes, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return PngStatus::ok;
}

ImageGrid decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
  // Peek at the IHDR chunk to size the buffer before handing control to libpng.
  if (bytes.size() < 33) throw Error(Errc::corrupt_header, name + ": PNG too short");
  auto be32 = [&](std::size_t o) {
    return (static_cast<std::uint32_t>(bytes[o]) << 24) | (static_cast<std::uint32_t>(bytes[o + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[o + 2]) << 8) | static_cast<std::uint32_t>(bytes[o + 3]);
  };
  const std::uint32_t w = be32(16);
  const std::uint32_t h = be32(20);
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) {
    throw Error(Errc::corrupt_header, name + ": invalid PNG dimensions");
  }
  std::vector<unsigned char> pixels(static_cast<std::size_t>(w) * h * 2);
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  switch (decode_png_raw(bytes, pixels, width, height, bit_depth)) {
    case PngStatus::ok: break;
    case PngStatus::unsupported:
      throw Error(Errc::unsupported_format, name + ": PNG is not single-channel grayscale");
    case PngStatus::corrupt_header: throw Error(Errc::corrupt_header, name + ": bad PNG header");
    case PngStatus::corrupt_data: throw Error(Errc::corrupt_data, name + ": bad PNG data");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = bit_depth == 16 ? static_cast<double>((pixels[2 * i] << 8) | pixels[2 * i + 1])
                              : static_cast<double>(pixels[i]);
  }
  return ImageGrid(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_failure, "write failed for " + path.string());
}

void check_window(int window, const char* who) {
  if (window < 3 || window % 2 == 0) {
    throw Error(Errc::invalid_argument, std::string(who) + ": window must be odd and >= 3");
  }
}

}  // namespace

ImageGrid load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string name = path.string();
  static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return decode_png(bytes, name);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    return decode_pgm(bytes, name);
  }
  throw Error(Errc::unsupported_format, name + ": neither PGM nor PNG");
}

BinaryMap threshold_map(const ImageGrid& img, double threshold) {
  BinaryMap map(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) map[i] = img[i] >= threshold ? 1 : 0;
  return map;
}

BinaryMap load_binary_map(const std::filesystem::path& path, double threshold) {
  return threshold_map(load_image(path), threshold);
}

void save_binary_map(const BinaryMap& map, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) bytes[i] = map[i] ? 255 : 0;
  write_pgm(path, map.width(), map.height(), bytes);
}

void save_image(const ImageGrid& img, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::clamp(std::round(img[i]), 0.0, 255.0));
  }
  write_pgm(path, img.width(), img.height(), bytes);
}

ImageGrid log_transform(const ImageGrid& img) {
  ImageGrid out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double v = img(x, y);
      if (!(v >= 0.0)) {
        throw Error(Errc::invalid_argument, "log_transform: negative pixel at (" + std::to_string(x) +
                                                ", " + std::to_string(y) + ")");
      }
      out(x, y) = std::log1p(v);
    }
  }
  return out;
}

ImageGrid add_gaussian_noise(const ImageGrid& img, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw Error(Errc::invalid_argument, "noise sigma must be non-negative");
  ImageGrid out = img;
  if (spec.sigma == 0.0) return out;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  for (auto& v : out.data()) v += noise(rng);
  return out;
}

ImageGrid wiener_filter(const ImageGrid& img, int window, std::optional<double> noise_variance) {
  check_window(window, "wiener_filter");
  const int r = window / 2;
  const int w = img.width();
  const int h = img.height();
  const double n = static_cast<double>(window) * window;
  ImageGrid mean(w, h);
  ImageGrid var(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = extend_index(y + dy, h, Boundary::symmetric);
        for (int dx = -r; dx <= r; ++dx) sum += img(extend_index(x + dx, w, Boundary::symmetric), yy);
      }
      const double mu = sum / n;
      double ss = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = extend_index(y + dy, h, Boundary::symmetric);
        for (int dx = -r; dx <= r; ++dx) {
          const double d = img(extend_index(x + dx, w, Boundary::symmetric), yy) - mu;
          ss += d * d;
        }
      }
      mean(x, y) = mu;
      var(x, y) = ss / n;
    }
  }

  double nu = 0.0;
  if (noise_variance) {
    nu = *noise_variance;
  } else {
    for (double v : var.data()) nu += v;
    nu /= static_cast<double>(var.size());
  }

  constexpr double kTiny = 1e-300;
  ImageGrid out(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double s2 = var[i];
    const double gain = std::max(s2 - nu, 0.0) / std::max(s2, kTiny);
    out[i] = mean[i] + gain * (img[i] - mean[i]);
  }
  return out;
}

ImageGrid median_filter(const ImageGrid& img, int window) {
  check_window(window, "median_filter");
  const int r = window / 2;
  const int w = img.width();
  const int h = img.height();
  ImageGrid out(w, h);
  std::vector<double> buf(static_cast<std::size_t>(window) * window);
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = extend_index(y + dy, h, Boundary::symmetric);
        for (int dx = -r; dx <= r; ++dx) buf[k++] = img(extend_index(x + dx, w, Boundary::symmetric), yy);
      }
      std::nth_element(buf.begin(), mid, buf.end());
      out(x, y) = *mid;
    }
  }
  return out;
}

}  // namespace wbnd
