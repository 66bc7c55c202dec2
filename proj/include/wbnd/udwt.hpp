#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "wbnd/raster.hpp"

namespace wbnd {

/// Detail band orientation. Horizontal = highpass along x (responds to
/// vertical steps), vertical = highpass along y, diagonal = both.
enum class Band { horizontal, vertical, diagonal };

std::string_view to_string(Band band) noexcept;

/// Undecimated Haar decomposition. Every band has the source image's size.
/// Index 0 of each detail vector is level 1, the finest scale.
struct UdwtPyramid {
  std::vector<ImageGrid> horizontal;
  std::vector<ImageGrid> vertical;
  std::vector<ImageGrid> diagonal;
  ImageGrid approximation;

  int levels() const noexcept { return static_cast<int>(horizontal.size()); }
  int width() const noexcept { return approximation.width(); }
  int height() const noexcept { return approximation.height(); }

  /// `level` is 1-based.
  const ImageGrid& band(Band b, int level) const;
};

/// À trous analysis with the averaging Haar pair h = [1/2, 1/2], g = [1/2, -1/2].
///
/// At level t the taps sit at offsets 0 and 2^(t-1) and each band is the
/// separable product of the two 1-D filters applied to the level t-1
/// approximation:
///   approx = h_x h_y,  horizontal = g_x h_y,  vertical = h_x g_y,  diagonal = g_x g_y.
/// Each output sample is evaluated from the four taps with a fixed, operand-
/// symmetric expression, so the result does not depend on threading and
/// transposing the input exactly swaps the horizontal and vertical bands.
UdwtPyramid udwt_forward(const ImageGrid& img, int levels, Boundary boundary = Boundary::symmetric,
                         std::size_t workers = 1);

/// Synthesis: a_{t-1} = a_t + H_t + V_t + D_t.
ImageGrid udwt_inverse(const UdwtPyramid& pyr);

/// The per-pixel coefficient chain (W_1, ..., W_T) of one band, finest level first.
std::vector<double> extract_chain(const UdwtPyramid& pyr, Band band, int x, int y);

/// Writes one 8-bit PGM per band per level (affinely rescaled to 0..255) into
/// `dir`, plus `<stem>_scales.txt` listing the min/max used for each file.
void dump_bands(const UdwtPyramid& pyr, const std::filesystem::path& dir, std::string_view stem);

}  // namespace wbnd
