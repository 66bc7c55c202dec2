#include "wbnd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include "wbnd/baselines.hpp"
#include "wbnd/parallel.hpp"

namespace wbnd {

std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::wbnd: return "wbnd";
    case DetectorKind::hthw: return "hthw";
    case DetectorKind::canny: return "canny";
  }
  return "?";
}

DetectorKind parse_detector_kind(std::string_view name) {
  if (name == "wbnd") return DetectorKind::wbnd;
  if (name == "hthw") return DetectorKind::hthw;
  if (name == "canny") return DetectorKind::canny;
  throw Error(Errc::invalid_argument, "unknown detector '" + std::string(name) + "'");
}

namespace {

double percentile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> threshold_grid(std::span<const double> response, int steps) {
  double hi = percentile(response, 0.999);
  double lo = percentile(response, 0.5);
  if (!(hi > 0.0)) hi = 1.0;
  if (!(lo > 0.0)) lo = 1e-3 * hi;
  lo = std::min(lo, hi);
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
    grid[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, frac);
  }
  return grid;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double parse_double(std::string_view key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "': bad number '" + text + "'");
  }
  return v;
}

std::vector<double> parse_doubles(std::string_view key, std::string_view value, std::size_t expected = 0) {
  std::vector<double> out;
  for (const auto& tok : split_list(value)) out.push_back(parse_double(key, tok));
  if (expected != 0 && out.size() != expected) {
    throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "' expects " +
                                            std::to_string(expected) + " numbers");
  }
  return out;
}

long parse_int(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "': bad integer '" + text + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "': expected a boolean");
}

std::pair<int, int> parse_grid(std::string_view key, std::string_view value) {
  const auto x = value.find_first_of("xX");
  if (x == std::string_view::npos) {
    throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "': expected ROWSxCOLS");
  }
  return {static_cast<int>(parse_int(key, trim(value.substr(0, x)))),
          static_cast<int>(parse_int(key, trim(value.substr(x + 1))))};
}

// Calls fn(key, value) for every non-comment line.
template <typename Fn>
void for_each_entry(std::string_view text, Fn&& fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    const auto hash = view.find('#');
    if (hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_argument, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    fn(trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    if (ch == '\n' || ch == '\r') ch = ' ';
    out += ch;
  }
  out += '"';
  return out;
}

Raster<double> crop(const ImageGrid& img, int x0, int y0, int w, int h) {
  ImageGrid out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = img(x0 + x, y0 + y);
  }
  return out;
}

}  // namespace

QualityCurve quality_curve(DetectorKind detector, const ImageGrid& img, const BinaryMap& truth, int steps,
                           std::size_t workers) {
  require_same_shape(img, truth, "quality_curve");
  if (count_true(truth) == 0) throw Error(Errc::empty_input, "quality_curve: ground truth has no edge pixels");
  if (steps < 1) throw Error(Errc::invalid_argument, "quality_curve: steps must be >= 1");

  QualityCurve curve;
  curve.detector = detector;
  curve.points.resize(static_cast<std::size_t>(steps));
  switch (detector) {
    case DetectorKind::hthw: {
      const HthwResponse response = hthw_response(img);
      const auto grid = threshold_grid(response.magnitude.data(), steps);
      parallel_for(grid.size(), workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
          const BinaryMap map = hthw_from_response(response, {grid[k], true});
          curve.points[k] = {grid[k], evaluate(map, truth)};
        }
      });
      break;
    }
    case DetectorKind::canny: {
      const CannyResponse response = canny_response(img, kCannySweepSigma);
      const auto grid = threshold_grid(response.gradient.magnitude.data(), steps);
      parallel_for(grid.size(), workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
          const BinaryMap map = canny_from_response(response, kCannyLowRatio * grid[k], grid[k]);
          curve.points[k] = {grid[k], evaluate(map, truth)};
        }
      });
      break;
    }
    case DetectorKind::wbnd:
      throw Error(Errc::invalid_argument, "quality_curve: wbnd has no threshold to sweep");
  }
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    if (curve.points[k].report.pratt > curve.points[curve.best_index].report.pratt) curve.best_index = k;
  }
  return curve;
}

BinaryMap tile_detect(const ImageGrid& img, const DetectorConfig& cfg, int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(Errc::invalid_argument, "tile grid must be at least 1x1");
  const int tile_w = img.width() / cols;
  const int tile_h = img.height() / rows;
  const int min_side = cfg.levels >= 1 && cfg.levels < 31 ? (1 << cfg.levels) : 0;
  if (tile_w < min_side || tile_h < min_side || tile_w == 0 || tile_h == 0) {
    throw Error(Errc::image_too_small, "tiles of " + std::to_string(tile_w) + "x" + std::to_string(tile_h) +
                                           " are smaller than 2^levels");
  }
  BinaryMap mask(img.width(), img.height());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int x0 = c * tile_w;
      const int y0 = r * tile_h;
      const int w = c + 1 == cols ? img.width() - x0 : tile_w;
      const int h = r + 1 == rows ? img.height() - y0 : tile_h;
      const Detection det = wbnd_detect(crop(img, x0, y0, w, h), cfg);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) mask(x0 + x, y0 + y) = det.mask(x, y);
      }
    }
  }
  return mask;
}

bool apply_detector_key(DetectorConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "levels") {
    cfg.levels = static_cast<int>(parse_int(key, value));
  } else if (key == "init_pi") {
    const auto v = parse_doubles(key, value, 2);
    cfg.init_pi = {v[0], v[1]};
  } else if (key == "init_a") {
    const auto v = parse_doubles(key, value, 4);
    cfg.init_a = {{{v[0], v[1]}, {v[2], v[3]}}};
  } else if (key == "em_tol") {
    cfg.em_tol = parse_doubles(key, value, 1)[0];
  } else if (key == "em_max_iter") {
    cfg.em_max_iter = static_cast<int>(parse_int(key, value));
  } else if (key == "preprocess") {
    if (value == "none") {
      cfg.preprocess = Preprocess::none;
    } else if (value == "log") {
      cfg.preprocess = Preprocess::log;
    } else if (value == "log+wiener") {
      cfg.preprocess = Preprocess::log_wiener;
    } else if (value == "median") {
      cfg.preprocess = Preprocess::median;
    } else {
      throw Error(Errc::invalid_argument, "preprocess must be none, log, log+wiener or median");
    }
  } else if (key == "wiener_window") {
    cfg.wiener_window = static_cast<int>(parse_int(key, value));
  } else if (key == "median_window") {
    cfg.median_window = static_cast<int>(parse_int(key, value));
  } else if (key == "combine") {
    if (value == "or") {
      cfg.combine = BandCombine::any;
    } else if (value == "and") {
      cfg.combine = BandCombine::all;
    } else {
      throw Error(Errc::invalid_argument, "combine must be 'or' or 'and'");
    }
  } else if (key == "boundary") {
    if (value == "symmetric") {
      cfg.boundary = Boundary::symmetric;
    } else if (value == "periodic") {
      cfg.boundary = Boundary::periodic;
    } else {
      throw Error(Errc::invalid_argument, "boundary must be 'symmetric' or 'periodic'");
    }
  } else if (key == "workers") {
    const long w = parse_int(key, value);
    if (w < 0) throw Error(Errc::invalid_argument, "workers must be >= 0");
    cfg.workers = static_cast<std::size_t>(w);
  } else {
    return false;
  }
  return true;
}

DetectorConfig parse_detector_config(std::string_view text) {
  DetectorConfig cfg;
  for_each_entry(text, [&](std::string_view key, std::string_view value) {
    if (!apply_detector_key(cfg, key, value)) {
      throw Error(Errc::invalid_argument, "unknown config key '" + std::string(key) + "'");
    }
  });
  return cfg;
}

BenchConfig parse_bench_config(std::string_view text, const std::filesystem::path& base_dir) {
  BenchConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  for_each_entry(text, [&](std::string_view key, std::string_view value) {
    if (key == "image") {
      const auto parts = split_list(value);
      if (parts.size() != 2) throw Error(Errc::invalid_argument, "image expects 'image_path, truth_path'");
      cfg.images.push_back({resolve(parts[0]), resolve(parts[1]), parts[0]});
    } else if (key == "noise_levels") {
      cfg.noise_levels = parse_doubles(key, value);
      for (double s : cfg.noise_levels) {
        if (s < 0.0) throw Error(Errc::invalid_argument, "noise levels must be non-negative");
      }
    } else if (key == "detectors") {
      cfg.detectors.clear();
      for (const auto& name : split_list(value)) cfg.detectors.push_back(parse_detector_kind(name));
    } else if (key == "seed") {
      cfg.seed = std::strtoull(std::string(value).c_str(), nullptr, 10);
    } else if (key == "tile_grid") {
      std::tie(cfg.tile_rows, cfg.tile_cols) = parse_grid(key, value);
    } else if (key == "curve_steps") {
      cfg.curve_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "hthw_median") {
      cfg.hthw_median = parse_bool(key, value);
    } else if (key == "timing") {
      cfg.timing = parse_bool(key, value);
    } else if (!apply_detector_key(cfg.detector, key, value)) {
      throw Error(Errc::invalid_argument, "unknown config key '" + std::string(key) + "'");
    }
  });
  if (cfg.images.empty()) throw Error(Errc::invalid_argument, "bench config lists no images");
  if (cfg.detectors.empty()) throw Error(Errc::invalid_argument, "bench config lists no detectors");
  return cfg;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bench_config(buf.str(), path.parent_path());
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t image_index, std::size_t noise_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(image_index), static_cast<std::uint32_t>(noise_index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<BenchRow> run_benchmark_rows(const BenchConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::size_t ii = 0; ii < cfg.images.size(); ++ii) {
    const BenchImage& entry = cfg.images[ii];
    std::optional<ImageGrid> image;
    std::optional<BinaryMap> truth;
    std::string load_error;
    try {
      image = load_image(entry.image);
      truth = load_binary_map(entry.truth);
      require_same_shape(*image, *truth, "image and ground truth");
    } catch (const std::exception& e) {
      load_error = e.what();
    }

    for (std::size_t ni = 0; ni < cfg.noise_levels.size(); ++ni) {
      const double sigma = cfg.noise_levels[ni];
      std::optional<ImageGrid> noisy;
      if (load_error.empty()) noisy = add_gaussian_noise(*image, {sigma, derive_seed(cfg.seed, ii, ni)});

      for (DetectorKind kind : cfg.detectors) {
        BenchRow row;
        row.image = entry.label;
        row.noise_sigma = sigma;
        row.detector = kind;
        if (!load_error.empty()) {
          row.error = load_error;
          rows.push_back(std::move(row));
          continue;
        }
        const auto start = Clock::now();
        try {
          switch (kind) {
            case DetectorKind::wbnd: {
              const BinaryMap mask = tile_detect(*noisy, cfg.detector, cfg.tile_rows, cfg.tile_cols);
              row.report = evaluate(mask, *truth);
              break;
            }
            case DetectorKind::hthw: {
              const ImageGrid input = cfg.hthw_median ? median_filter(*noisy, cfg.detector.median_window) : *noisy;
              const QualityCurve curve = quality_curve(kind, input, *truth, cfg.curve_steps, cfg.detector.workers);
              row.parameter = curve.best().parameter;
              row.report = curve.best().report;
              break;
            }
            case DetectorKind::canny: {
              const QualityCurve curve = quality_curve(kind, *noisy, *truth, cfg.curve_steps, cfg.detector.workers);
              row.parameter = curve.best().parameter;
              row.report = curve.best().report;
              break;
            }
          }
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        if (cfg.timing) {
          row.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tuple(a.image, a.noise_sigma, to_string(a.detector)) <
           std::tuple(b.image, b.noise_sigma, to_string(b.detector));
  });
  return rows;
}

std::string format_csv(const std::vector<BenchRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  char buf[512];
  for (const auto& r : rows) {
    out += csv_field(r.image);
    std::snprintf(buf, sizeof buf, ",%g,%s,", r.noise_sigma, std::string(to_string(r.detector)).c_str());
    out += buf;
    if (r.error) {
      out += csv_field("error: " + *r.error);
      out += ",,,,,,,,";
      std::snprintf(buf, sizeof buf, "%.3f\n", r.runtime_ms);
      out += buf;
      continue;
    }
    if (r.parameter) {
      std::snprintf(buf, sizeof buf, "%.6g", *r.parameter);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%zu,%zu,%zu,%zu,%.3f\n", r.report.pratt, r.report.baddeley,
                  r.report.kappa, r.report.counts.tp, r.report.counts.fp, r.report.counts.fn, r.report.counts.tn,
                  r.runtime_ms);
    out += buf;
  }
  return out;
}

std::string run_benchmark(const BenchConfig& cfg) { return format_csv(run_benchmark_rows(cfg)); }

}  // namespace wbnd
