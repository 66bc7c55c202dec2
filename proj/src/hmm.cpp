#include "wbnd/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

#include "wbnd/error.hpp"
#include "wbnd/parallel.hpp"

namespace wbnd {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr std::size_t kChunk = 2048;

// Precomputed emission constants, indexed by label.
class EmissionModel {
 public:
  explicit EmissionModel(const HmmParams& p) {
    const int g = p.swapped ? 1 : 0;
    const int l = 1 - g;
    gaussian_ = g;
    norm_[g] = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(p.sigma);
    norm_[l] = -std::log(kSqrt2 * p.phi);
    inv_two_var_ = 1.0 / (2.0 * p.sigma * p.sigma);
    laplace_rate_ = kSqrt2 / p.phi;
  }

  std::array<double, 2> log_density(double w) const noexcept {
    std::array<double, 2> out;
    out[gaussian_] = norm_[gaussian_] - w * w * inv_two_var_;
    out[1 - gaussian_] = norm_[1 - gaussian_] - laplace_rate_ * std::abs(w);
    return out;
  }

  int gaussian_label() const noexcept { return gaussian_; }

 private:
  int gaussian_ = 0;
  std::array<double, 2> norm_{};
  double inv_two_var_ = 0.0;
  double laplace_rate_ = 0.0;
};

// Scaled forward-backward scratch space. With e[t] the emission densities
// divided by exp(offset[t]) and c[t] the forward normalizer,
//   alpha[t] = (alpha[t-1] A) .* e[t] / c[t],  beta[t] = A (e[t+1] .* beta[t+1]) / c[t+1],
// and ln P(W) = sum_t (ln c[t] + offset[t]).
struct Workspace {
  std::vector<std::array<double, 2>> alpha, beta, emit;
  std::vector<double> scale;

  void resize(std::size_t n) {
    alpha.resize(n);
    beta.resize(n);
    emit.resize(n);
    scale.resize(n);
  }
};

double forward_backward_scaled(std::span<const double> chain, const HmmParams& p, const EmissionModel& model,
                               Workspace& ws) {
  const std::size_t n = chain.size();
  ws.resize(n);
  double loglik = 0.0;
  std::array<double, 2> pred = p.pi;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      const auto& prev = ws.alpha[t - 1];
      pred[0] = prev[0] * p.a[0][0] + prev[1] * p.a[1][0];
      pred[1] = prev[0] * p.a[0][1] + prev[1] * p.a[1][1];
    }
    const auto ld = model.log_density(chain[t]);
    double offset = std::max(ld[0], ld[1]);
    std::array<double, 2> e{std::exp(ld[0] - offset), std::exp(ld[1] - offset)};
    double c = pred[0] * e[0] + pred[1] * e[1];
    if (!(c >= std::numeric_limits<double>::min())) {
      // The reachable states have negligible density: rescale around the
      // best reachable log-weight instead of the best emission.
      const double lw0 = pred[0] > 0.0 ? std::log(pred[0]) + ld[0] - offset : -HUGE_VAL;
      const double lw1 = pred[1] > 0.0 ? std::log(pred[1]) + ld[1] - offset : -HUGE_VAL;
      const double shift = std::max(lw0, lw1);
      e = {std::exp(std::min(ld[0] - offset - shift, 700.0)), std::exp(std::min(ld[1] - offset - shift, 700.0))};
      offset += shift;
      c = pred[0] * e[0] + pred[1] * e[1];
    }
    ws.emit[t] = e;
    ws.scale[t] = c;
    ws.alpha[t] = {pred[0] * e[0] / c, pred[1] * e[1] / c};
    loglik += std::log(c) + offset;
  }

  ws.beta[n - 1] = {1.0, 1.0};
  for (std::size_t t = n - 1; t-- > 0;) {
    const auto& e = ws.emit[t + 1];
    const auto& b = ws.beta[t + 1];
    const double c = ws.scale[t + 1];
    const double v0 = e[0] * b[0];
    const double v1 = e[1] * b[1];
    ws.beta[t] = {(p.a[0][0] * v0 + p.a[0][1] * v1) / c, (p.a[1][0] * v0 + p.a[1][1] * v1) / c};
  }
  return loglik;
}

inline Matrix2 transition_posterior(const HmmParams& p, const Workspace& ws, std::size_t t) noexcept {
  const auto& al = ws.alpha[t];
  const auto& e = ws.emit[t + 1];
  const auto& b = ws.beta[t + 1];
  const double inv_c = 1.0 / ws.scale[t + 1];
  Matrix2 xi;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) xi[i][j] = al[i] * p.a[i][j] * e[j] * b[j] * inv_c;
  }
  return xi;
}

void check_chain(std::span<const double> chain) {
  if (chain.empty()) throw Error(Errc::empty_input, "chain must have at least one element");
}

// Linear-interpolated quantile of an already sorted range.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Same, without sorting everything.
double select_quantile(std::vector<double> values, double q) {
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double v_lo = values[lo];
  if (lo + 1 >= values.size()) return v_lo;
  const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo + 1), values.end());
  return v_lo + (pos - static_cast<double>(lo)) * (v_hi - v_lo);
}

}  // namespace

void validate(const HmmParams& p) {
  auto is_prob_vector = [](double x, double y) {
    return x >= 0.0 && y >= 0.0 && x <= 1.0 && y <= 1.0 && std::abs(x + y - 1.0) <= 1e-12;
  };
  if (!is_prob_vector(p.pi[0], p.pi[1])) throw Error(Errc::invalid_argument, "pi is not a probability vector");
  for (const auto& row : p.a) {
    if (!is_prob_vector(row[0], row[1])) throw Error(Errc::invalid_argument, "transition row does not sum to 1");
  }
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw Error(Errc::invalid_argument, "sigma must be positive");
  if (!(p.phi > 0.0) || !std::isfinite(p.phi)) throw Error(Errc::invalid_argument, "phi must be positive");
}

HmmParams swap_labels(const HmmParams& p) {
  HmmParams q = p;
  q.pi = {p.pi[1], p.pi[0]};
  q.a = {{{p.a[1][1], p.a[1][0]}, {p.a[0][1], p.a[0][0]}}};
  q.swapped = !p.swapped;
  return q;
}

double emission_logpdf(double w, State state, const HmmParams& params) {
  return EmissionModel(params).log_density(w)[static_cast<int>(state)];
}

ChainStats forward_backward(std::span<const double> chain, const HmmParams& params) {
  check_chain(chain);
  const EmissionModel model(params);
  Workspace ws;
  ChainStats out;
  out.loglik = forward_backward_scaled(chain, params, model, ws);
  out.gamma.resize(chain.size());
  for (std::size_t t = 0; t < chain.size(); ++t) {
    out.gamma[t] = {ws.alpha[t][0] * ws.beta[t][0], ws.alpha[t][1] * ws.beta[t][1]};
  }
  out.xi.reserve(chain.size() - 1);
  for (std::size_t t = 0; t + 1 < chain.size(); ++t) out.xi.push_back(transition_posterior(params, ws, t));
  return out;
}

std::vector<State> viterbi(std::span<const double> chain, const HmmParams& params) {
  check_chain(chain);
  const EmissionModel model(params);
  const std::size_t n = chain.size();
  Matrix2 log_a;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) log_a[i][j] = std::log(params.a[i][j]);
  }
  std::vector<std::array<std::uint8_t, 2>> back(n);
  auto ld = model.log_density(chain[0]);
  std::array<double, 2> delta{std::log(params.pi[0]) + ld[0], std::log(params.pi[1]) + ld[1]};
  for (std::size_t t = 1; t < n; ++t) {
    ld = model.log_density(chain[t]);
    std::array<double, 2> next;
    for (int j = 0; j < 2; ++j) {
      const double from0 = delta[0] + log_a[0][j];
      const double from1 = delta[1] + log_a[1][j];
      const bool pick1 = from1 > from0;
      back[t][j] = pick1 ? 1 : 0;
      next[j] = (pick1 ? from1 : from0) + ld[j];
    }
    delta = next;
  }
  std::vector<State> path(n);
  std::uint8_t s = delta[1] > delta[0] ? 1 : 0;
  for (std::size_t t = n; t-- > 0;) {
    path[t] = static_cast<State>(s);
    if (t > 0) s = back[t][s];
  }
  return path;
}

ChainSet::ChainSet(std::size_t length, std::vector<double> values) : length_(length), values_(std::move(values)) {
  if (length_ == 0) throw Error(Errc::invalid_argument, "chain length must be positive");
  if (values_.empty()) throw Error(Errc::empty_input, "chain collection is empty");
  if (values_.size() % length_ != 0) {
    throw Error(Errc::dimension_mismatch, "value count is not a multiple of the chain length");
  }
}

ChainSet ChainSet::from_sequences(const std::vector<std::vector<double>>& sequences) {
  if (sequences.empty()) throw Error(Errc::empty_input, "chain collection is empty");
  const std::size_t length = sequences.front().size();
  std::vector<double> flat;
  flat.reserve(length * sequences.size());
  for (const auto& s : sequences) {
    if (s.size() != length) throw Error(Errc::dimension_mismatch, "chains have inconsistent lengths");
    flat.insert(flat.end(), s.begin(), s.end());
  }
  return ChainSet(length, std::move(flat));
}

Floors parameter_floors(std::span<const double> coeffs) {
  double base = 1e-8;
  if (!coeffs.empty()) {
    std::vector<double> mags(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), mags.begin(), [](double w) { return std::abs(w); });
    base = std::max(1e-4 * select_quantile(std::move(mags), 0.99), 1e-8);
  }
  return {base, 2.0 * base};
}

void SufficientStats::merge(const SufficientStats& o) noexcept {
  for (int i = 0; i < 2; ++i) {
    initial[i] += o.initial[i];
    departures[i] += o.departures[i];
    occupancy[i] += o.occupancy[i];
    abs_moment[i] += o.abs_moment[i];
    sq_moment[i] += o.sq_moment[i];
    for (int j = 0; j < 2; ++j) transitions[i][j] += o.transitions[i][j];
  }
  loglik += o.loglik;
  chains += o.chains;
}

SufficientStats expectation_step(const ChainSet& chains, const HmmParams& params, std::size_t workers) {
  const EmissionModel model(params);
  const std::size_t count = chains.size();
  const std::size_t n_chunks = (count + kChunk - 1) / kChunk;
  std::vector<SufficientStats> partial(n_chunks);

  parallel_for(n_chunks, workers, [&](std::size_t c0, std::size_t c1) {
    Workspace ws;
    for (std::size_t c = c0; c < c1; ++c) {
      SufficientStats& acc = partial[c];
      const std::size_t end = std::min(count, (c + 1) * kChunk);
      for (std::size_t k = c * kChunk; k < end; ++k) {
        const auto chain = chains[k];
        acc.loglik += forward_backward_scaled(chain, params, model, ws);
        for (std::size_t t = 0; t < chain.size(); ++t) {
          const double g0 = ws.alpha[t][0] * ws.beta[t][0];
          const double g1 = ws.alpha[t][1] * ws.beta[t][1];
          const double w = chain[t];
          if (t == 0) {
            acc.initial[0] += g0;
            acc.initial[1] += g1;
          }
          if (t + 1 < chain.size()) {
            acc.departures[0] += g0;
            acc.departures[1] += g1;
            const Matrix2 xi = transition_posterior(params, ws, t);
            for (int i = 0; i < 2; ++i) {
              for (int j = 0; j < 2; ++j) acc.transitions[i][j] += xi[i][j];
            }
          }
          acc.occupancy[0] += g0;
          acc.occupancy[1] += g1;
          acc.abs_moment[0] += g0 * std::abs(w);
          acc.abs_moment[1] += g1 * std::abs(w);
          acc.sq_moment[0] += g0 * w * w;
          acc.sq_moment[1] += g1 * w * w;
        }
        ++acc.chains;
      }
    }
  });

  SufficientStats total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

HmmParams maximization_step(const SufficientStats& s, const HmmParams& previous, const Floors& floors) {
  HmmParams next = previous;
  if (s.chains == 0) return next;

  const double n = static_cast<double>(s.chains);
  const double pi0 = s.initial[0] / n;
  const double pi1 = s.initial[1] / n;
  const double pi_sum = pi0 + pi1;
  next.pi = {pi0 / pi_sum, pi1 / pi_sum};

  for (int i = 0; i < 2; ++i) {
    if (s.departures[i] > 0.0) {
      const double r0 = s.transitions[i][0] / s.departures[i];
      const double r1 = s.transitions[i][1] / s.departures[i];
      const double sum = r0 + r1;
      if (sum > 0.0 && std::isfinite(sum)) next.a[i] = {r0 / sum, r1 / sum};
    }
  }

  const int g = previous.swapped ? 1 : 0;
  const int l = 1 - g;
  if (s.occupancy[g] > 0.0) next.sigma = std::sqrt(s.sq_moment[g] / s.occupancy[g]);
  if (s.occupancy[l] > 0.0) next.phi = kSqrt2 * s.abs_moment[l] / s.occupancy[l];
  next.sigma = std::max(next.sigma, floors.sigma);
  next.phi = std::max(next.phi, floors.phi);
  return next;
}

FitReport em_fit(const ChainSet& chains, const HmmParams& init, const EmOptions& options) {
  validate(init);
  if (options.max_iter < 0) throw Error(Errc::invalid_argument, "max_iter must be non-negative");
  const Floors floors = options.floors ? *options.floors : parameter_floors(chains.values());

  FitReport report;
  HmmParams params = init;
  params.sigma = std::max(params.sigma, floors.sigma);
  params.phi = std::max(params.phi, floors.phi);

  for (int iter = 0;; ++iter) {
    const SufficientStats stats = expectation_step(chains, params, options.workers);
    report.loglik_trace.push_back(stats.loglik);
    if (iter > 0) {
      const double prev = report.loglik_trace[static_cast<std::size_t>(iter - 1)];
      if (stats.loglik - prev <= options.tol * std::abs(prev)) {
        report.converged = true;
        break;
      }
    }
    if (iter == options.max_iter) break;
    params = maximization_step(stats, params, floors);
    ++report.iterations;
  }

  // The edge label owns the emission with the larger standard deviation.
  if ((params.phi < params.sigma) != params.swapped) params = swap_labels(params);
  report.params = params;
  return report;
}

HistogramInit init_from_histogram(std::span<const double> coeffs) {
  if (coeffs.size() < 100) {
    throw Error(Errc::empty_input, "init_from_histogram needs at least 100 coefficients, got " +
                                       std::to_string(coeffs.size()));
  }
  const Floors floors = parameter_floors(coeffs);

  std::vector<double> sorted(coeffs.begin(), coeffs.end());
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted_quantile(sorted, 0.5);
  std::vector<double> dev(sorted.size());
  std::transform(sorted.begin(), sorted.end(), dev.begin(), [&](double w) { return std::abs(w - median); });
  std::sort(dev.begin(), dev.end());
  const double sigma0 = 1.4826 * sorted_quantile(dev, 0.5);

  std::vector<double> mags(sorted.size());
  std::transform(sorted.begin(), sorted.end(), mags.begin(), [](double w) { return std::abs(w); });
  std::sort(mags.begin(), mags.end());
  const double p90 = sorted_quantile(mags, 0.9);
  double tail_sum = 0.0;
  std::size_t tail_count = 0;
  for (double m : mags) {
    if (m > p90) {
      tail_sum += m;
      ++tail_count;
    }
  }
  const double phi0 = tail_count > 0 ? tail_sum / static_cast<double>(tail_count) / std::numbers::sqrt2 : 0.0;
  return {std::max(sigma0, floors.sigma), std::max(phi0, floors.phi)};
}

std::string format_fit_report(const FitReport& r) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const auto& p = r.params;
  out << "pi = " << num(p.pi[0]) << ' ' << num(p.pi[1]) << '\n';
  out << "a = " << num(p.a[0][0]) << ' ' << num(p.a[0][1]) << ' ' << num(p.a[1][0]) << ' ' << num(p.a[1][1])
      << '\n';
  out << "sigma = " << num(p.sigma) << '\n';
  out << "phi = " << num(p.phi) << '\n';
  out << "swapped = " << (p.swapped ? 1 : 0) << '\n';
  out << "iterations = " << r.iterations << '\n';
  out << "converged = " << (r.converged ? 1 : 0) << '\n';
  out << "loglik_trace =";
  for (double v : r.loglik_trace) out << ' ' << num(v);
  out << '\n';
  return out.str();
}

FitReport parse_fit_report(std::string_view text) {
  FitReport r;
  std::istringstream in{std::string(text)};
  std::string line;
  bool seen_sigma = false;
  bool seen_phi = false;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw Error(Errc::invalid_argument, "fit report: malformed line '" + line + "'");
      }
      continue;
    }
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    std::vector<double> values;
    const std::string rest = line.substr(eq + 1);
    const char* cur = rest.c_str();
    char* end = nullptr;
    for (double v = std::strtod(cur, &end); end != cur; v = std::strtod(cur, &end)) {
      values.push_back(v);
      cur = end;
    }
    if (std::string_view(cur).find_first_not_of(" \t\r") != std::string_view::npos) {
      throw Error(Errc::invalid_argument, "fit report: bad number in '" + key + "'");
    }
    auto expect = [&](std::size_t n) {
      if (values.size() != n) throw Error(Errc::invalid_argument, "fit report: wrong arity for '" + key + "'");
    };
    if (key == "pi") {
      expect(2);
      r.params.pi = {values[0], values[1]};
    } else if (key == "a") {
      expect(4);
      r.params.a = {{{values[0], values[1]}, {values[2], values[3]}}};
    } else if (key == "sigma") {
      expect(1);
      r.params.sigma = values[0];
      seen_sigma = true;
    } else if (key == "phi") {
      expect(1);
      r.params.phi = values[0];
      seen_phi = true;
    } else if (key == "swapped") {
      expect(1);
      r.params.swapped = values[0] != 0.0;
    } else if (key == "iterations") {
      expect(1);
      r.iterations = static_cast<int>(values[0]);
    } else if (key == "converged") {
      expect(1);
      r.converged = values[0] != 0.0;
    } else if (key == "loglik_trace") {
      r.loglik_trace = std::move(values);
    } else {
      throw Error(Errc::invalid_argument, "fit report: unknown key '" + key + "'");
    }
  }
  if (!seen_sigma || !seen_phi) throw Error(Errc::invalid_argument, "fit report: missing sigma or phi");
  validate(r.params);
  return r;
}

}  // namespace wbnd
