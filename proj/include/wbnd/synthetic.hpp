#pragma once

#include <cstdint>

#include "wbnd/raster.hpp"

namespace wbnd {

/// An image with its reference edge map.
struct Scene {
  ImageGrid image;
  BinaryMap truth;
  Raster<int> labels;
};

/// Pixels whose region label differs from the right or lower neighbor. This
/// puts each boundary on the same side as the level-1 Haar response.
BinaryMap label_boundaries(const Raster<int>& labels);

/// Pixels of a region that have a 4-neighbor outside it (or touch the border).
BinaryMap inner_perimeter(const Raster<int>& labels, int region);

/// Centered side x side square of `foreground` on `background`. Region 1 is the square.
Scene square_scene(int size, int side, double background = 0.0, double foreground = 255.0);

/// Disk of the given radius centered on the image. Region 1 is the disk.
Scene disk_scene(int size, double radius, double background = 0.0, double foreground = 255.0);

/// Vertical step: columns < split take `left`, the rest `right`.
Scene step_scene(int width, int height, int split, double left = 0.0, double right = 255.0);

/// Piecewise-smooth scene: shaded background with overlapping ellipses and
/// rotated rectangles, each with its own shading and mild texture. Adjacent
/// regions differ by at least 40 intensity levels on average.
Scene shapes_scene(int width, int height, std::uint64_t seed);

}  // namespace wbnd
