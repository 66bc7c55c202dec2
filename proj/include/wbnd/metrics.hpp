#pragma once

#include <cstddef>
#include <string>

#include "wbnd/raster.hpp"

namespace wbnd {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

struct QualityReport {
  double pratt = 0.0;
  double baddeley = 0.0;
  double kappa = 0.0;
  Confusion counts;
};

/// Exact Euclidean distance from each pixel to the nearest set pixel
/// (separable lower-envelope algorithm). An empty map yields width + height
/// everywhere.
ImageGrid distance_transform(const BinaryMap& map);

constexpr double kPrattAlpha = 1.0 / 9.0;
constexpr double kBaddeleyCutoff = 5.0;

/// Pratt figure of merit of `candidate` against `truth` (alpha = 1/9).
/// Throws on empty truth; an empty candidate scores 0.
double pratt_fom(const BinaryMap& candidate, const BinaryMap& truth);

enum class BaddeleyDomain {
  all_pixels,   // sum over the whole raster
  truth_edges,  // sum over the truth's edge pixels only, same 1/(n m) normalization
};

/// Baddeley error with w(t) = min(t, 5) and exponent 2.
double baddeley_error(const BinaryMap& truth, const BinaryMap& candidate,
                      BaddeleyDomain domain = BaddeleyDomain::all_pixels);

Confusion confusion(const BinaryMap& candidate, const BinaryMap& truth);

/// Cohen's kappa of the pixel-wise 2x2 confusion matrix.
double kappa_index(const BinaryMap& candidate, const BinaryMap& truth);
double kappa_from_counts(const Confusion& c);

QualityReport evaluate(const BinaryMap& candidate, const BinaryMap& truth);

/// "key = value" lines: pratt, baddeley, kappa, tp, fp, fn, tn.
std::string format_quality_report(const QualityReport& report);

}  // namespace wbnd
