#pragma once

#include "wbnd/raster.hpp"

namespace wbnd {

struct HthwConfig {
  double threshold = 1.0;  // coefficient magnitude, must be > 0
  bool nms = true;
};

/// Level-1 Haar response: m = max(|H|, |V|, |D|) per pixel and the band that
/// attains it (0 = H, 1 = V, 2 = D; ties prefer H, then V).
struct HthwResponse {
  ImageGrid magnitude;
  Raster<std::uint8_t> orientation;
};

HthwResponse hthw_response(const ImageGrid& img);

/// Thresholds a precomputed response. With nms, a candidate survives only if
/// m is >= both neighbors across its orientation (H: left/right, V: up/down,
/// D: the four diagonal neighbors).
BinaryMap hthw_from_response(const HthwResponse& response, const HthwConfig& cfg);

BinaryMap hthw_detect(const ImageGrid& img, const HthwConfig& cfg);

struct Gradient {
  ImageGrid gx;
  ImageGrid gy;
  ImageGrid magnitude;
};

/// Separable Gaussian blur, radius ceil(3 sigma), mirrored borders. sigma = 0 copies.
ImageGrid gaussian_smooth(const ImageGrid& img, double sigma);

/// Central differences with mirrored borders.
Gradient central_gradient(const ImageGrid& img);

/// Canny stages that do not depend on the thresholds: the smoothed gradient
/// and the thinned (non-maximum suppressed) magnitude.
struct CannyResponse {
  Gradient gradient;
  ImageGrid thinned;  // magnitude at local maxima, 0 elsewhere
};

CannyResponse canny_response(const ImageGrid& img, double smooth_sigma = 1.0);

/// Double threshold + 8-connected hysteresis: pixels with thinned magnitude
/// > high seed edges, which grow through pixels with magnitude > low.
BinaryMap canny_from_response(const CannyResponse& response, double low, double high);

BinaryMap canny_detect(const ImageGrid& img, double low, double high, double smooth_sigma = 1.0);

/// 4-sector quantization of the gradient direction: 0 = horizontal gradient,
/// 1 = 45 degrees, 2 = vertical, 3 = 135 degrees (image y axis points down).
int gradient_sector(double gx, double gy) noexcept;

}  // namespace wbnd
