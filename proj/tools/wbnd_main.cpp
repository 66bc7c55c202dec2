// Command-line front end: detect, udwt, bench, metrics, noise, synth.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wbnd/baselines.hpp"
#include "wbnd/bench.hpp"
#include "wbnd/detector.hpp"
#include "wbnd/metrics.hpp"
#include "wbnd/synthetic.hpp"
#include "wbnd/udwt.hpp"

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wbnd::Error(wbnd::Errc::missing_file, path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw wbnd::Error(wbnd::Errc::io_failure, "cannot write " + path);
  out << text;
  if (!out) throw wbnd::Error(wbnd::Errc::io_failure, "cannot write " + path);
}

struct DetectArgs {
  std::string input;
  std::string output;
  std::string report;
  std::string config;
  std::string detector = "wbnd";
  std::string tiles = "1x1";
  std::vector<std::string> overrides;
  double threshold = 0.0;
  double low = 0.0;
  double high = 0.0;
  double smooth = 1.0;
  bool no_nms = false;
};

void run_detect(const DetectArgs& a) {
  const wbnd::ImageGrid img = wbnd::load_image(a.input);
  wbnd::BinaryMap mask(img.width(), img.height());
  switch (wbnd::parse_detector_kind(a.detector)) {
    case wbnd::DetectorKind::wbnd: {
      wbnd::DetectorConfig cfg = a.config.empty() ? wbnd::DetectorConfig{} : wbnd::parse_detector_config(read_text(a.config));
      for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || !wbnd::apply_detector_key(cfg, kv.substr(0, eq), kv.substr(eq + 1))) {
          throw wbnd::Error(wbnd::Errc::invalid_argument, "bad --set '" + kv + "'");
        }
      }
      const auto x = a.tiles.find_first_of("xX");
      if (x == std::string::npos) throw wbnd::Error(wbnd::Errc::invalid_argument, "--tiles expects ROWSxCOLS");
      const int rows = std::stoi(a.tiles.substr(0, x));
      const int cols = std::stoi(a.tiles.substr(x + 1));
      if (rows == 1 && cols == 1) {
        const wbnd::Detection det = wbnd::wbnd_detect(img, cfg);
        mask = det.mask;
        if (!a.report.empty()) {
          write_text(a.report, "[horizontal]\n" + wbnd::format_fit_report(det.horizontal_fit) + "[vertical]\n" +
                                   wbnd::format_fit_report(det.vertical_fit));
        }
      } else {
        mask = wbnd::tile_detect(img, cfg, rows, cols);
      }
      break;
    }
    case wbnd::DetectorKind::hthw:
      mask = wbnd::hthw_detect(img, {a.threshold, !a.no_nms});
      break;
    case wbnd::DetectorKind::canny:
      mask = wbnd::canny_detect(img, a.low, a.high, a.smooth);
      break;
  }
  wbnd::save_binary_map(mask, a.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-domain Bayesian edge detection"};
  app.require_subcommand(1);

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Compute an edge mask for one image");
  detect->add_option("input", det.input, "PGM or PNG image")->required();
  detect->add_option("-o,--output", det.output, "Output mask (PGM)")->required();
  detect->add_option("--detector", det.detector, "wbnd, hthw or canny");
  detect->add_option("--config", det.config, "Detector config file (key = value)");
  detect->add_option("--set", det.overrides, "Override one config key, e.g. --set levels=4");
  detect->add_option("--report", det.report, "Write the fitted models here (wbnd, single tile)");
  detect->add_option("--tiles", det.tiles, "Tile grid ROWSxCOLS (wbnd)");
  detect->add_option("--threshold", det.threshold, "HTHW coefficient threshold");
  detect->add_flag("--no-nms", det.no_nms, "HTHW without non-maximum suppression");
  detect->add_option("--low", det.low, "Canny low threshold");
  detect->add_option("--high", det.high, "Canny high threshold");
  detect->add_option("--smooth", det.smooth, "Canny Gaussian sigma");

  std::string udwt_input, udwt_dir = ".", udwt_stem = "band";
  int udwt_levels = 3;
  bool udwt_periodic = false;
  auto* udwt = app.add_subcommand("udwt", "Dump undecimated Haar bands as PGMs");
  udwt->add_option("input", udwt_input)->required();
  udwt->add_option("-d,--dir", udwt_dir, "Output directory");
  udwt->add_option("--stem", udwt_stem, "File name prefix");
  udwt->add_option("-T,--levels", udwt_levels, "Decomposition depth");
  udwt->add_flag("--periodic", udwt_periodic, "Periodic instead of mirrored borders");

  std::string bench_config, bench_output;
  auto* bench = app.add_subcommand("bench", "Run a noise-sweep benchmark and write CSV");
  bench->add_option("config", bench_config)->required();
  bench->add_option("-o,--output", bench_output, "CSV path (default stdout)");

  std::string candidate_path, truth_path;
  double map_threshold = 128.0;
  auto* metrics = app.add_subcommand("metrics", "Compare an edge map against ground truth");
  metrics->add_option("candidate", candidate_path)->required();
  metrics->add_option("truth", truth_path)->required();
  metrics->add_option("--threshold", map_threshold, "Gray level at or above which a pixel is an edge");

  std::string noise_input, noise_output;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  auto* noise = app.add_subcommand("noise", "Add seeded Gaussian noise (output rounded to 8 bits)");
  noise->add_option("input", noise_input)->required();
  noise->add_option("-o,--output", noise_output)->required();
  noise->add_option("--sigma", noise_sigma)->required()->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", noise_seed);

  std::string synth_kind = "square", synth_image, synth_truth;
  int synth_size = 128;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic test scene and its edge truth");
  synth->add_option("kind", synth_kind, "square, disk or shapes")->check(CLI::IsMember({"square", "disk", "shapes"}));
  synth->add_option("-o,--output", synth_image)->required();
  synth->add_option("-t,--truth", synth_truth)->required();
  synth->add_option("--size", synth_size);
  synth->add_option("--seed", synth_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*detect) {
      run_detect(det);
    } else if (*udwt) {
      const auto pyr = wbnd::udwt_forward(wbnd::load_image(udwt_input), udwt_levels,
                                          udwt_periodic ? wbnd::Boundary::periodic : wbnd::Boundary::symmetric);
      std::filesystem::create_directories(udwt_dir);
      wbnd::dump_bands(pyr, udwt_dir, udwt_stem);
    } else if (*bench) {
      write_text(bench_output, wbnd::run_benchmark(wbnd::load_bench_config(bench_config)));
    } else if (*metrics) {
      const auto report = wbnd::evaluate(wbnd::load_binary_map(candidate_path, map_threshold),
                                         wbnd::load_binary_map(truth_path, map_threshold));
      std::cout << wbnd::format_quality_report(report);
    } else if (*noise) {
      wbnd::save_image(wbnd::add_gaussian_noise(wbnd::load_image(noise_input), {noise_sigma, noise_seed}), noise_output);
    } else if (*synth) {
      wbnd::Scene scene = synth_kind == "square" ? wbnd::square_scene(synth_size, synth_size / 2)
                          : synth_kind == "disk" ? wbnd::disk_scene(synth_size, synth_size / 4.0)
                                                 : wbnd::shapes_scene(synth_size, synth_size, synth_seed);
      wbnd::save_image(scene.image, synth_image);
      wbnd::save_binary_map(scene.truth, synth_truth);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wbnd: %s\n", e.what());
    return 1;
  }
  return 0;
}
