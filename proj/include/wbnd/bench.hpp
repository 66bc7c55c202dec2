#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wbnd/detector.hpp"
#include "wbnd/metrics.hpp"

namespace wbnd {

enum class DetectorKind { wbnd, hthw, canny };

std::string_view to_string(DetectorKind kind) noexcept;
DetectorKind parse_detector_kind(std::string_view name);

struct CurvePoint {
  double parameter;
  QualityReport report;
};

/// Quality of a parametric detector over a one-dimensional threshold sweep.
struct QualityCurve {
  DetectorKind detector = DetectorKind::hthw;
  std::vector<CurvePoint> points;
  std::size_t best_index = 0;  // first point with the highest Pratt score

  const CurvePoint& best() const { return points.at(best_index); }
};

/// Canny sweeps `high` with low = 0.4 * high at this smoothing.
constexpr double kCannySweepSigma = 1.0;
constexpr double kCannyLowRatio = 0.4;

/// `steps` thresholds on a geometric grid from the 50th to the 99.9th
/// percentile of the detector's response magnitude (HTHW: max level-1
/// coefficient; Canny: smoothed gradient magnitude). When the lower
/// percentile is zero the grid starts at 1e-3 of the upper one.
QualityCurve quality_curve(DetectorKind detector, const ImageGrid& img, const BinaryMap& truth, int steps = 100,
                           std::size_t workers = 1);

/// Runs wbnd_detect independently on a rows x cols partition (the last tile
/// row/column absorbs the remainder) and pastes the tile masks together.
BinaryMap tile_detect(const ImageGrid& img, const DetectorConfig& cfg, int rows, int cols);

struct BenchImage {
  std::filesystem::path image;
  std::filesystem::path truth;
  std::string label;  // written to the CSV; the image path as given in the config
};

struct BenchConfig {
  std::vector<BenchImage> images;
  std::vector<double> noise_levels{0, 5, 10, 20, 30, 40, 50};
  std::vector<DetectorKind> detectors{DetectorKind::wbnd, DetectorKind::hthw, DetectorKind::canny};
  std::uint64_t seed = 0;
  int tile_rows = 1;
  int tile_cols = 1;
  int curve_steps = 100;
  bool hthw_median = true;  // median-prefilter the input of the HTHW sweep
  bool timing = true;       // false writes runtime_ms = 0 so the CSV is byte-reproducible
  DetectorConfig detector = [] {
    DetectorConfig c;
    c.preprocess = Preprocess::median;
    return c;
  }();
};

/// Applies one `key = value` pair to a detector configuration. Returns false
/// for keys it does not know.
bool apply_detector_key(DetectorConfig& cfg, std::string_view key, std::string_view value);

/// Reads a DetectorConfig from flat key/value text; unknown keys are errors.
DetectorConfig parse_detector_config(std::string_view text);

/// Relative image paths resolve against `base_dir`.
BenchConfig parse_bench_config(std::string_view text, const std::filesystem::path& base_dir = {});
BenchConfig load_bench_config(const std::filesystem::path& path);

struct BenchRow {
  std::string image;
  double noise_sigma = 0.0;
  DetectorKind detector = DetectorKind::wbnd;
  std::optional<double> parameter;  // empty for the automatic detector
  QualityReport report;
  double runtime_ms = 0.0;
  std::optional<std::string> error;
};

/// Rows sorted by (image, noise, detector name).
std::vector<BenchRow> run_benchmark_rows(const BenchConfig& cfg);

inline constexpr std::string_view kCsvHeader =
    "image,noise_sigma,detector,parameter,pratt,baddeley,kappa,tp,fp,fn,tn,runtime_ms";

std::string format_csv(const std::vector<BenchRow>& rows);

/// run_benchmark_rows + format_csv.
std::string run_benchmark(const BenchConfig& cfg);

/// Deterministic per-(image, noise level) seed.
std::uint64_t derive_seed(std::uint64_t base, std::size_t image_index, std::size_t noise_index);

}  // namespace wbnd
