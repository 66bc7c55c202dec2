#pragma once

#include <vector>

#include "wbnd/hmm.hpp"
#include "wbnd/raster.hpp"
#include "wbnd/udwt.hpp"

namespace wbnd {

enum class Preprocess { none, log, log_wiener, median };

/// How the horizontal and vertical vote maps are merged.
enum class BandCombine { any, all };

struct DetectorConfig {
  int levels = 3;
  std::array<double, 2> init_pi{0.5, 0.5};
  Matrix2 init_a{{{0.95, 0.05}, {0.2, 0.8}}};
  double em_tol = 1e-6;
  int em_max_iter = 100;
  Preprocess preprocess = Preprocess::none;
  int wiener_window = 3;
  int median_window = 3;
  BandCombine combine = BandCombine::any;
  Boundary boundary = Boundary::symmetric;
  std::size_t workers = 0;  // 0 = all hardware threads; output is identical for any value
};

/// Decoded states of one band: maps[t] flags pixels whose state at chain
/// position t+1 is "edge".
struct StateStack {
  Band band = Band::horizontal;
  std::vector<BinaryMap> maps;
};

struct Detection {
  BinaryMap mask;
  BinaryMap horizontal_vote;
  BinaryMap vertical_vote;
  FitReport horizontal_fit;
  FitReport vertical_fit;
};

/// All pixel chains of one band, in row-major pixel order.
ChainSet band_chains(const UdwtPyramid& pyr, Band band);

StateStack decode_band(const UdwtPyramid& pyr, Band band, const HmmParams& params, std::size_t workers = 1);

/// Edge where at least half of the T states are edge (a tie counts as edge).
BinaryMap majority_vote(const StateStack& stack);

BinaryMap or_combine(const BinaryMap& h, const BinaryMap& v);
BinaryMap and_combine(const BinaryMap& h, const BinaryMap& v);

ImageGrid apply_preprocess(const ImageGrid& img, const DetectorConfig& cfg);

/// Fits one chain model per directional band by EM, Viterbi-decodes every
/// pixel, majority-votes across levels and merges the two bands.
Detection wbnd_detect(const ImageGrid& img, const DetectorConfig& cfg = {});

}  // namespace wbnd
