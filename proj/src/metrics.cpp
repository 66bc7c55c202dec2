#include "wbnd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace wbnd {

namespace {

constexpr double kFar = 1e20;

// Squared distance transform of a sampled function along one line
// (Felzenszwalb & Huttenlocher lower envelope of parabolas).
void squared_dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                   std::vector<double>& z) {
  const std::size_t n = f.size();
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double qd = static_cast<double>(q);
    const double pd = static_cast<double>(p);
    return ((f[q] + qd * qd) - (f[p] + pd * pd)) / (2.0 * (qd - pd));
  };
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -HUGE_VAL;
  z[1] = HUGE_VAL;
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, static_cast<std::size_t>(v[k]));
    while (s <= z[k]) {
      --k;
      s = intersect(q, static_cast<std::size_t>(v[k]));
    }
    ++k;
    v[k] = static_cast<int>(q);
    z[k] = s;
    z[k + 1] = HUGE_VAL;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const auto p = static_cast<std::size_t>(v[k]);
    const double dq = static_cast<double>(q) - static_cast<double>(p);
    d[q] = dq * dq + f[p];
  }
}

}  // namespace

ImageGrid distance_transform(const BinaryMap& map) {
  const int w = map.width();
  const int h = map.height();
  if (count_true(map) == 0) return ImageGrid(w, h, static_cast<double>(w + h));

  ImageGrid sq(w, h);
  for (std::size_t i = 0; i < map.size(); ++i) sq[i] = map[i] ? 0.0 : kFar;

  const auto n = static_cast<std::size_t>(std::max(w, h));
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  f.resize(static_cast<std::size_t>(h));
  d.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = sq(x, y);
    squared_dt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) sq(x, y) = d[static_cast<std::size_t>(y)];
  }
  f.resize(static_cast<std::size_t>(w));
  d.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = sq(x, y);
    squared_dt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) sq(x, y) = std::sqrt(d[static_cast<std::size_t>(x)]);
  }
  return sq;
}

double pratt_fom(const BinaryMap& candidate, const BinaryMap& truth) {
  require_same_shape(candidate, truth, "pratt_fom");
  const std::size_t n_truth = count_true(truth);
  if (n_truth == 0) throw Error(Errc::empty_input, "pratt_fom: ground truth has no edge pixels");
  const std::size_t n_cand = count_true(candidate);
  if (n_cand == 0) return 0.0;
  const ImageGrid dist = distance_transform(truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (candidate[i]) sum += 1.0 / (1.0 + kPrattAlpha * dist[i] * dist[i]);
  }
  return sum / static_cast<double>(std::max(n_truth, n_cand));
}

double baddeley_error(const BinaryMap& truth, const BinaryMap& candidate, BaddeleyDomain domain) {
  require_same_shape(truth, candidate, "baddeley_error");
  const ImageGrid dt = distance_transform(truth);
  const ImageGrid dc = distance_transform(candidate);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (domain == BaddeleyDomain::truth_edges && !truth[i]) continue;
    const double diff = std::min(dt[i], kBaddeleyCutoff) - std::min(dc[i], kBaddeleyCutoff);
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

Confusion confusion(const BinaryMap& candidate, const BinaryMap& truth) {
  require_same_shape(candidate, truth, "confusion");
  Confusion c;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const bool b = candidate[i] != 0;
    const bool v = truth[i] != 0;
    if (b && v) {
      ++c.tp;
    } else if (b) {
      ++c.fp;
    } else if (v) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double kappa_from_counts(const Confusion& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double tn = static_cast<double>(c.tn);
  const double n = tp + fp + fn + tn;
  if (n == 0.0) throw Error(Errc::empty_input, "kappa of an empty confusion matrix");
  // Scaled by n^2 so the counts stay integral until the one division.
  const double agree = n * (tp + tn);
  const double chance = (tp + fp) * (tp + fn) + (fn + tn) * (fp + tn);
  if (chance == n * n) return agree == n * n ? 1.0 : 0.0;
  return (agree - chance) / (n * n - chance);
}

double kappa_index(const BinaryMap& candidate, const BinaryMap& truth) {
  return kappa_from_counts(confusion(candidate, truth));
}

QualityReport evaluate(const BinaryMap& candidate, const BinaryMap& truth) {
  QualityReport r;
  r.pratt = pratt_fom(candidate, truth);
  r.baddeley = baddeley_error(truth, candidate);
  r.counts = confusion(candidate, truth);
  r.kappa = kappa_from_counts(r.counts);
  return r;
}

std::string format_quality_report(const QualityReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "pratt = %.17g\nbaddeley = %.17g\nkappa = %.17g\ntp = %zu\nfp = %zu\nfn = %zu\ntn = %zu\n",
                r.pratt, r.baddeley, r.kappa, r.counts.tp, r.counts.fp, r.counts.fn, r.counts.tn);
  return buf;
}

}  // namespace wbnd
