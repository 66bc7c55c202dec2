#include "wbnd/detector.hpp"

#include "wbnd/parallel.hpp"

namespace wbnd {

ChainSet band_chains(const UdwtPyramid& pyr, Band band) {
  const auto levels = static_cast<std::size_t>(pyr.levels());
  const std::size_t pixels = pyr.approximation.size();
  std::vector<double> values(pixels * levels);
  for (std::size_t t = 0; t < levels; ++t) {
    const auto& grid = pyr.band(band, static_cast<int>(t) + 1);
    for (std::size_t i = 0; i < pixels; ++i) values[i * levels + t] = grid[i];
  }
  return ChainSet(levels, std::move(values));
}

StateStack decode_band(const UdwtPyramid& pyr, Band band, const HmmParams& params, std::size_t workers) {
  validate(params);
  const int levels = pyr.levels();
  StateStack stack;
  stack.band = band;
  stack.maps.assign(static_cast<std::size_t>(levels), BinaryMap(pyr.width(), pyr.height()));

  std::vector<const ImageGrid*> grids;
  for (int t = 1; t <= levels; ++t) grids.push_back(&pyr.band(band, t));

  parallel_for(pyr.approximation.size(), workers, [&](std::size_t i0, std::size_t i1) {
    std::vector<double> chain(static_cast<std::size_t>(levels));
    for (std::size_t i = i0; i < i1; ++i) {
      for (std::size_t t = 0; t < chain.size(); ++t) chain[t] = (*grids[t])[i];
      const auto path = viterbi(chain, params);
      for (std::size_t t = 0; t < chain.size(); ++t) stack.maps[t][i] = path[t] == State::edge ? 1 : 0;
    }
  });
  return stack;
}

BinaryMap majority_vote(const StateStack& stack) {
  if (stack.maps.empty()) throw Error(Errc::empty_input, "majority_vote: empty state stack");
  const auto& first = stack.maps.front();
  for (const auto& m : stack.maps) require_same_shape(m, first, "majority_vote");
  const std::size_t levels = stack.maps.size();
  BinaryMap out(first.width(), first.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t votes = 0;
    for (const auto& m : stack.maps) votes += m[i] ? 1 : 0;
    out[i] = 2 * votes >= levels ? 1 : 0;
  }
  return out;
}

BinaryMap or_combine(const BinaryMap& h, const BinaryMap& v) {
  require_same_shape(h, v, "or_combine");
  BinaryMap out(h.width(), h.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (h[i] || v[i]) ? 1 : 0;
  return out;
}

BinaryMap and_combine(const BinaryMap& h, const BinaryMap& v) {
  require_same_shape(h, v, "and_combine");
  BinaryMap out(h.width(), h.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (h[i] && v[i]) ? 1 : 0;
  return out;
}

ImageGrid apply_preprocess(const ImageGrid& img, const DetectorConfig& cfg) {
  switch (cfg.preprocess) {
    case Preprocess::none: return img;
    case Preprocess::log: return log_transform(img);
    case Preprocess::log_wiener: return wiener_filter(log_transform(img), cfg.wiener_window);
    case Preprocess::median: return median_filter(img, cfg.median_window);
  }
  return img;
}

namespace {

struct BandResult {
  FitReport fit;
  BinaryMap vote;
};

BandResult fit_and_decode(const UdwtPyramid& pyr, Band band, const DetectorConfig& cfg) {
  const ChainSet chains = band_chains(pyr, band);
  const HistogramInit start = init_from_histogram(chains.values());
  HmmParams init;
  init.pi = cfg.init_pi;
  init.a = cfg.init_a;
  init.sigma = start.sigma0;
  init.phi = start.phi0;

  EmOptions options;
  options.tol = cfg.em_tol;
  options.max_iter = cfg.em_max_iter;
  options.workers = cfg.workers;
  BandResult out{em_fit(chains, init, options), {}};
  out.vote = majority_vote(decode_band(pyr, band, out.fit.params, cfg.workers));
  return out;
}

}  // namespace

Detection wbnd_detect(const ImageGrid& img, const DetectorConfig& cfg) {
  HmmParams check;
  check.pi = cfg.init_pi;
  check.a = cfg.init_a;
  validate(check);

  const ImageGrid input = apply_preprocess(img, cfg);
  const UdwtPyramid pyr = udwt_forward(input, cfg.levels, cfg.boundary, cfg.workers);
  BandResult hor = fit_and_decode(pyr, Band::horizontal, cfg);
  BandResult ver = fit_and_decode(pyr, Band::vertical, cfg);

  Detection out;
  out.mask = cfg.combine == BandCombine::any ? or_combine(hor.vote, ver.vote) : and_combine(hor.vote, ver.vote);
  out.horizontal_vote = std::move(hor.vote);
  out.vertical_vote = std::move(ver.vote);
  out.horizontal_fit = std::move(hor.fit);
  out.vertical_fit = std::move(ver.fit);
  return out;
}

}  // namespace wbnd
