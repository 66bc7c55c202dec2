#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wbnd {

/// Hidden state label of one chain position.
enum class State : std::uint8_t { no_edge = 0, edge = 1 };

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Two-state chain model tied across every pixel chain of a band.
///
/// Arrays are indexed by label (0 = no-edge, 1 = edge); a[i][j] is
/// P(S_{t+1} = j | S_t = i). Normally no-edge emits a zero-mean Gaussian with
/// standard deviation `sigma` and edge emits a zero-mean Laplacian
///   f(w) = exp(-sqrt(2)|w| / phi) / (sqrt(2) phi),
/// whose standard deviation is `phi`. `swapped` exchanges which label owns
/// which emission family; fitting sets it so that the edge label always owns
/// the larger-scale emission.
struct HmmParams {
  std::array<double, 2> pi{0.5, 0.5};
  Matrix2 a{{{0.95, 0.05}, {0.2, 0.8}}};
  double sigma = 1.0;
  double phi = 1.0;
  bool swapped = false;
};

/// Throws Errc::invalid_argument unless pi and the rows of a are probability
/// vectors (1e-12) and sigma, phi are positive and finite.
void validate(const HmmParams& params);

/// Relabels the states: permutes pi and a and flips `swapped`. The model's
/// likelihood is unchanged.
HmmParams swap_labels(const HmmParams& params);

double emission_logpdf(double w, State state, const HmmParams& params);

/// Posterior quantities of one chain. gamma[t][i] = P(S_t = i | W),
/// xi[t][i][j] = P(S_t = i, S_{t+1} = j | W), loglik = ln P(W).
struct ChainStats {
  std::vector<std::array<double, 2>> gamma;
  std::vector<Matrix2> xi;
  double loglik = 0.0;
};

/// Forward-backward with per-step normalization. Throws on an empty chain.
ChainStats forward_backward(std::span<const double> chain, const HmmParams& params);

/// Most probable state path, computed in the log domain. On exactly equal
/// scores the no-edge alternative wins, both for the final state and for each
/// back-pointer.
std::vector<State> viterbi(std::span<const double> chain, const HmmParams& params);

/// A collection of equal-length chains stored contiguously.
class ChainSet {
 public:
  ChainSet(std::size_t length, std::vector<double> values);

  static ChainSet from_sequences(const std::vector<std::vector<double>>& sequences);

  std::size_t length() const noexcept { return length_; }
  std::size_t size() const noexcept { return values_.size() / length_; }
  std::span<const double> operator[](std::size_t i) const noexcept {
    return std::span<const double>(values_).subspan(i * length_, length_);
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t length_;
  std::vector<double> values_;
};

/// Lower bounds applied to the emission scales. The edge floor is twice the
/// no-edge floor, so on all-zero data the Gaussian (no-edge) density is the
/// larger one at w = 0.
struct Floors {
  double sigma;
  double phi;
};

/// sigma floor = max(1e-4 * P99(|w|), 1e-8); phi floor = 2 * sigma floor.
Floors parameter_floors(std::span<const double> coeffs);

/// Per-label sums of the E-step. Combined in a fixed order, so the totals do
/// not depend on how chains were distributed over workers.
struct SufficientStats {
  std::array<double, 2> initial{};    // sum gamma[1][i]
  Matrix2 transitions{};              // sum_{t<T} xi[t][i][j]
  std::array<double, 2> departures{}; // sum_{t<T} gamma[t][i]
  std::array<double, 2> occupancy{};  // sum_t gamma[t][i]
  std::array<double, 2> abs_moment{}; // sum_t gamma[t][i] |w_t|
  std::array<double, 2> sq_moment{};  // sum_t gamma[t][i] w_t^2
  double loglik = 0.0;
  std::size_t chains = 0;

  void merge(const SufficientStats& other) noexcept;
};

SufficientStats expectation_step(const ChainSet& chains, const HmmParams& params, std::size_t workers = 1);

/// Closed-form re-estimation from E-step sums, then projection onto the floors.
/// The Gaussian scale is the square root of the weighted second moment.
/// Rows of `a` with no departure mass keep their previous values.
HmmParams maximization_step(const SufficientStats& stats, const HmmParams& previous, const Floors& floors);

struct EmOptions {
  double tol = 1e-6;  // relative log-likelihood improvement
  int max_iter = 100;
  std::optional<Floors> floors;  // derived from the chains when empty
  std::size_t workers = 1;
};

struct FitReport {
  HmmParams params;
  std::vector<double> loglik_trace;  // total log-likelihood of each evaluated model
  int iterations = 0;                // M-steps applied
  bool converged = false;
};

FitReport em_fit(const ChainSet& chains, const HmmParams& init, const EmOptions& options = {});

struct HistogramInit {
  double sigma0;
  double phi0;
};

/// Robust starting scales from the empirical coefficient distribution:
/// sigma0 = 1.4826 * MAD, phi0 = mean(|w| over |w| > P90(|w|)) / sqrt(2),
/// both floored. Needs at least 100 coefficients.
HistogramInit init_from_histogram(std::span<const double> coeffs);

/// Plain-text key/value form, all reals at full (round-trip) precision.
std::string format_fit_report(const FitReport& report);
FitReport parse_fit_report(std::string_view text);

}  // namespace wbnd
