#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phhmm/expand.hpp"

namespace phhmm {

// Scaled forward-backward quantities for one observation series.
//
// Row t of `forward` is the scaled state law at time t: row 0 is the
// initial law beta~ (before any emission), rows 1..N follow the recursion
// F_t = (F_{t-1} P~) .* g(., Y_t) with per-step normalization. `scale[t]`
// is the step-t normalizer (scale[0] = 1) and the series log-likelihood is
// sum(log scale). `backward` rows satisfy B_N = 1 with the matching scaled
// recursion, so gamma_t = F_t .* B_t is already normalized.
struct Trellis {
  Matrix forward;   // (N+1) x d~
  Matrix backward;  // (N+1) x d~
  Vec scale;        // length N+1, scale[0] = 1
  double loglik = 0.0;
};

// Forward half plus scale and loglik. Throws NumericError naming the first
// 1-based step whose observation has zero likelihood under every regime.
Trellis forward_pass(const ExtendedHmm& e, const std::vector<double>& obs);

// Fills the backward half using the scale vector from the forward half.
void backward_pass(const ExtendedHmm& e, const std::vector<double>& obs, Trellis& t);

struct Posteriors {
  // gamma(t, s) = P(X~_t = s | Y_1..Y_N), t = 0..N.
  Matrix gamma;
  // xi[n-1](s, s') = P(X~_{n-1} = s, X~_n = s' | Y_1..Y_N), n = 1..N.
  std::vector<Matrix> xi;
};

Posteriors posteriors(const Trellis& t, const ExtendedHmm& e, const std::vector<double>& obs);

struct MStepResult {
  ExtendedHmm model;
  std::size_t dead_rows = 0;  // rows with no expected visits, left unchanged
};

// Closed-form maximizers of the expected complete-data log-likelihood:
// transition rows become expected-count ratios (structural zeros persist),
// the initial law becomes gamma_0, and each regime's emission parameters
// are re-fit by weighted maximum likelihood within their family. The two
// flags hold the emission laws or the initial law at their current values.
MStepResult m_step(const Posteriors& post, const std::vector<double>& obs, const ExtendedHmm& e,
                   bool update_emissions = true, bool update_initial_law = true);

enum class FitFamily { Degenerate, Categorical, Poisson, Exponential };

struct FitConfig {
  std::vector<std::size_t> phase_layout;  // phases per regime
  FitFamily family = FitFamily::Categorical;
  long max_iterations = 500;
  double tol = 1e-8;  // relative log-likelihood change
  int restarts = 20;
  std::uint64_t seed = 1;
  int workers = 1;  // parallel restarts; results do not depend on the count
  // Optional structural-zero mask for the embedded jump matrix:
  // jump_mask[i][j] = false forbids regime transitions i -> j. Empty means
  // every off-diagonal transition is allowed.
  std::vector<std::vector<bool>> jump_mask;
  // Optional warm start: restart 0 begins at this model's expansion (its
  // emissions converted to the fit family); later restarts stay random.
  // The phase layout must match. Used by estimator-consistency studies,
  // where the fit should track the local optimum around a known truth.
  std::optional<PhTypeHmm> initial_model;
  // Hold the emission laws at their initial values (estimate the hidden
  // chain only). Requires initial_model for the laws to come from.
  bool fix_emissions = false;
  // Re-estimate the initial law as gamma_0 each iteration.
  bool update_initial_law = true;
  // Reorder each recovered sojourn law's phases into the canonical
  // (descending-alpha) form. Warm-started consistency studies turn this
  // off: their phase labels stay anchored to the starting model.
  bool canonicalize_phases = true;
  // Rank-one recovery rule for the sojourn initial vectors.
  AlphaRecovery alpha_recovery = AlphaRecovery::MassPooled;
};

struct FitReport {
  PhTypeHmm model;              // collapsed, regimes ordered by emission mean
  ExtendedHmm extended;         // unconstrained EM estimate, same regime order
  double loglik = 0.0;          // of `extended` on the data
  double aic = 0.0;
  std::size_t parameter_count = 0;
  Vec trace;                    // per-iteration loglik, nondecreasing
  long iterations = 0;
  Vec restart_logliks;          // final loglik per restart (NaN for failures)
  int failed_restarts = 0;
  int best_restart = 0;
  std::size_t dead_row_events = 0;
};

// Fits the extended HMM by EM over restarts and recovers the structured
// model. Restart r draws its transition matrix from the substream
// (seed, r); emission parameters start from quantile splits of the data.
FitReport fit(const std::vector<double>& obs, const FitConfig& cfg);

inline double aic(double loglik, std::size_t k) {
  return -2.0 * loglik + 2.0 * static_cast<double>(k);
}

// Free parameters of the unconstrained extended fit: d~-1 initial-law
// entries, each transition row's allowed entries minus one, and the
// emission parameters of the family (s-1 for categorical over s signals,
// 1 for poisson/exponential, 0 for degenerate).
std::size_t free_parameter_count(const std::vector<std::size_t>& phase_layout,
                                 const std::vector<std::vector<bool>>& jump_mask,
                                 FitFamily family, std::size_t alphabet_size);

}  // namespace phhmm
