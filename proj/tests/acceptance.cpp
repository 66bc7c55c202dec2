// Acceptance gate: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "wbnd/baselines.hpp"
#include "wbnd/bench.hpp"
#include "wbnd/detector.hpp"
#include "wbnd/hmm.hpp"
#include "wbnd/metrics.hpp"
#include "wbnd/synthetic.hpp"
#include "wbnd/udwt.hpp"

using namespace wbnd;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ImageGrid circular_shift(const ImageGrid& img, int dx, int dy) {
  ImageGrid out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out(extend_index(x + dx, img.width(), Boundary::periodic), extend_index(y + dy, img.height(), Boundary::periodic)) =
          img(x, y);
    }
  }
  return out;
}

// 1. Perfect reconstruction.
Outcome reconstruction() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int w = 8 + static_cast<int>(rng() % 121);
    const int h = 8 + static_cast<int>(rng() % 121);
    const int T = 1 + static_cast<int>(rng() % 3);
    const ImageGrid img = oracle::random_image(rng, w, h);
    const ImageGrid back = udwt_inverse(udwt_forward(img, T, Boundary::symmetric, 4));
    for (std::size_t i = 0; i < img.size(); ++i) worst = std::max(worst, std::abs(back[i] - img[i]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 5.0, fmt("max error %.3g (<= 1e-10), %.2f s (< 5 s)", worst, secs)};
}

// 2. Shift covariance in periodic mode, bitwise.
Outcome shift_covariance() {
  std::mt19937_64 rng(1002);
  int exact = 0;
  for (int k = 0; k < 20; ++k) {
    const ImageGrid img = oracle::random_image(rng, 64, 64);
    const int dx = static_cast<int>(rng() % 64);
    const int dy = static_cast<int>(rng() % 64);
    const auto a = udwt_forward(circular_shift(img, dx, dy), 3, Boundary::periodic, 4);
    const auto b = udwt_forward(img, 3, Boundary::periodic, 4);
    bool ok = a.approximation == circular_shift(b.approximation, dx, dy);
    for (int t = 1; t <= 3; ++t) {
      for (Band band : {Band::horizontal, Band::vertical, Band::diagonal}) {
        ok = ok && a.band(band, t) == circular_shift(b.band(band, t), dx, dy);
      }
    }
    exact += ok ? 1 : 0;
  }
  return {exact == 20, fmt("%.0f/20 shifts bitwise equal", exact)};
}

// 3. Forward-backward and Viterbi against exhaustive path enumeration.
Outcome hmm_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  int viterbi_match = 0;
  for (int k = 0; k < 1000; ++k) {
    HmmParams th = oracle::random_params(rng);
    th.swapped = k % 7 == 0;
    const std::size_t T = 1 + rng() % 8;
    const auto w = oracle::random_chain(rng, T, 0.5 + static_cast<double>(rng() % 12));
    const ChainStats s = forward_backward(w, th);
    const oracle::Posterior p = oracle::enumerate_paths(w, th);
    for (std::size_t t = 0; t < T; ++t) {
      for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(s.gamma[t][i] - p.gamma[t][i]));
    }
    for (std::size_t t = 0; t + 1 < T; ++t) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(s.xi[t][i][j] - p.xi[t][i][j]));
      }
    }
    worst = std::max(worst, std::abs(s.loglik - p.loglik) / std::max(1.0, std::abs(p.loglik)));
    viterbi_match += viterbi(w, th) == oracle::brute_viterbi(w, th) ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && viterbi_match == 1000 && secs < 30.0,
          fmt("posterior error %.3g (<= 1e-10), viterbi %.0f/1000 exact, %.2f s (< 30 s)", worst, viterbi_match, secs)};
}

// 4. EM monotonicity and parameter recovery.
Outcome em_recovery() {
  const auto t0 = Clock::now();
  HmmParams truth;
  truth.pi = {0.7, 0.3};
  truth.a = {{{0.9, 0.1}, {0.3, 0.7}}};
  truth.sigma = 1.0;
  truth.phi = 6.0;
  std::mt19937_64 rng(1004);
  std::vector<double> flat;
  for (int c = 0; c < 10000; ++c) {
    for (double v : oracle::sample_chain(rng, truth, 3)) flat.push_back(v);
  }
  const ChainSet chains(3, flat);
  const HistogramInit h = init_from_histogram(chains.values());
  HmmParams init;  // default pi and a are the detector's starting values
  init.sigma = h.sigma0;
  init.phi = h.phi0;
  EmOptions opt;
  opt.workers = 4;
  const FitReport r = em_fit(chains, init, opt);
  double worst_drop = 0.0;
  for (std::size_t k = 1; k < r.loglik_trace.size(); ++k) {
    worst_drop = std::max(worst_drop, r.loglik_trace[k - 1] - r.loglik_trace[k]);
  }
  double a_err = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) a_err = std::max(a_err, std::abs(r.params.a[i][j] - truth.a[i][j]));
  }
  const double s_rel = std::abs(r.params.sigma - 1.0) / 1.0;
  const double p_rel = std::abs(r.params.phi - 6.0) / 6.0;
  const double secs = seconds_since(t0);
  const bool ok = worst_drop <= 1e-9 && r.iterations <= 100 && s_rel <= 0.1 && p_rel <= 0.1 && a_err <= 0.1 &&
                  secs < 60.0 && !r.params.swapped;
  return {ok, fmt("max loglik drop %.3g, sigma err %.1f%%, phi err %.1f%%, max |a err| %.3f", worst_drop, 100 * s_rel,
                  100 * p_rel, a_err) +
                  fmt(", %.0f iterations, %.2f s (< 60 s)", r.iterations, secs)};
}

// 5. One M-step against the literal update formulas.
Outcome m_step_literal() {
  const std::vector<std::vector<double>> chains{{0.4, -2.5, 9.0}, {15.0, 11.2, -0.8}, {-0.05, 0.3, 3.1}};
  HmmParams th;
  th.pi = {0.55, 0.45};
  th.a = {{{0.95, 0.05}, {0.2, 0.8}}};
  th.sigma = 1.2;
  th.phi = 5.0;
  const HmmParams got = maximization_step(expectation_step(ChainSet::from_sequences(chains), th), th, {1e-8, 2e-8});
  const HmmParams want = oracle::literal_m_step(chains, th);
  double worst = std::max(std::abs(got.sigma - want.sigma), std::abs(got.phi - want.phi));
  for (int i = 0; i < 2; ++i) {
    worst = std::max(worst, std::abs(got.pi[i] - want.pi[i]));
    for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(got.a[i][j] - want.a[i][j]));
  }
  return {worst <= 1e-10, fmt("max parameter difference %.3g (<= 1e-10)", worst)};
}

// 6. Metric oracles and analytic fixtures.
Outcome metric_oracles() {
  std::mt19937_64 rng(1006);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int w = 1 + static_cast<int>(rng() % 32);
    const int h = 1 + static_cast<int>(rng() % 32);
    BinaryMap truth = oracle::random_map(rng, w, h, 0.02 + 0.3 * (k % 5) / 5.0);
    truth(static_cast<int>(rng() % w), static_cast<int>(rng() % h)) = 1;
    const BinaryMap cand = oracle::random_map(rng, w, h, k % 10 == 0 ? 0.0 : 0.15);
    worst = std::max(worst, std::abs(pratt_fom(cand, truth) - oracle::brute_pratt(cand, truth)));
    worst = std::max(worst, std::abs(baddeley_error(truth, cand) - oracle::brute_baddeley(truth, cand)));
    worst = std::max(worst, std::abs(kappa_index(cand, truth) - oracle::brute_kappa(cand, truth)));
  }
  BinaryMap a(9, 9, 0), b(9, 9, 0);
  a(2, 2) = 1;
  b(5, 2) = 1;
  const double pratt = pratt_fom(b, a);
  BinaryMap t2(2, 1, 0), c2(2, 1, 0);
  t2(0, 0) = 1;
  c2(1, 0) = 1;
  const double badd = baddeley_error(t2, c2);
  const double kappa = kappa_from_counts({40, 10, 20, 30});
  const bool fixtures = pratt == 0.5 && badd == 1.0 && kappa == 0.4;
  return {worst <= 1e-12 && fixtures, fmt("max difference %.3g (<= 1e-12); pratt %.17g, baddeley %.17g, kappa %.17g",
                                          worst, pratt, badd, kappa)};
}

// 7. Noisy square end to end.
Outcome noisy_square() {
  const auto t0 = Clock::now();
  const Scene sc = square_scene(128, 64, 0.0, 255.0);
  const ImageGrid noisy = add_gaussian_noise(sc.image, {50.0, 1007});
  DetectorConfig cfg;
  cfg.preprocess = Preprocess::median;
  cfg.workers = 4;
  const Detection d = wbnd_detect(noisy, cfg);
  const double secs = seconds_since(t0);
  const double cover = oracle::coverage(inner_perimeter(sc.labels, 1), d.mask, 2);
  const double cover_b = oracle::coverage(sc.truth, d.mask, 2);
  const double dens = oracle::density(d.mask);
  return {cover == 1.0 && cover_b == 1.0 && dens < 0.40 && secs < 10.0,
          fmt("perimeter coverage %.1f%% (boundary %.1f%%), density %.1f%% (< 40%%), %.2f s (< 10 s)", 100 * cover,
              100 * cover_b, 100 * dens, secs)};
}

// 8. WBND beats the best HTHW threshold at sigma = 50.
Outcome ordering() {
  std::string detail;
  int wins = 0;
  const std::uint64_t seeds[3] = {11, 22, 33};
  for (int k = 0; k < 3; ++k) {
    const Scene sc = shapes_scene(256, 256, seeds[k]);
    const ImageGrid noisy = add_gaussian_noise(sc.image, {50.0, derive_seed(1008, static_cast<std::size_t>(k), 6)});
    DetectorConfig cfg;
    cfg.preprocess = Preprocess::median;
    cfg.workers = 4;
    const double wb = evaluate(wbnd_detect(noisy, cfg).mask, sc.truth).pratt;
    const double hb =
        quality_curve(DetectorKind::hthw, median_filter(noisy, 3), sc.truth, 100, 4).best().report.pratt;
    wins += wb > hb ? 1 : 0;
    detail += (k ? "; " : "") + fmt("wbnd %.3f vs hthw %.3f", wb, hb);
  }
  return {wins == 3, detail};
}

// 9. 512 x 512 runtime, and identical output for 1 and 4 workers.
Outcome performance() {
  const Scene sc = shapes_scene(512, 512, 9);
  const ImageGrid noisy = add_gaussian_noise(sc.image, {30.0, 1009});
  DetectorConfig cfg;
  cfg.levels = 3;
  cfg.em_max_iter = 100;
  cfg.workers = 1;
  const auto t0 = Clock::now();
  const Detection one = wbnd_detect(noisy, cfg);
  const double secs = seconds_since(t0);
  cfg.workers = 4;
  const Detection four = wbnd_detect(noisy, cfg);
  const bool same = one.mask == four.mask && one.horizontal_fit.loglik_trace == four.horizontal_fit.loglik_trace &&
                    one.vertical_fit.loglik_trace == four.vertical_fit.loglik_trace;
  return {secs < 60.0 && same,
          fmt("single worker %.2f s (< 60 s), ", secs) + (same ? "1 vs 4 workers identical" : "1 vs 4 workers differ")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"udwt perfect reconstruction", reconstruction},
      {"udwt periodic shift covariance", shift_covariance},
      {"hmm forward-backward / viterbi oracle", hmm_oracle},
      {"em monotonicity and recovery", em_recovery},
      {"m-step literal transcription", m_step_literal},
      {"metric oracles and fixtures", metric_oracles},
      {"noisy square end to end", noisy_square},
      {"wbnd beats best hthw at sigma 50", ordering},
      {"512x512 runtime and worker invariance", performance},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed;
}
