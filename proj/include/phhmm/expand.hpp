#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "phhmm/model.hpp"

namespace phhmm {

// Ordinary HMM on the regime-phase product space. States are ordered
// regime-major, phase-minor: (1,1)..(1,F1),(2,1)..(2,F2),... and that
// ordering is part of the contract, since transition-matrix indexing
// depends on it. The emission law of a state depends only on its regime.
struct ExtendedHmm {
  std::vector<std::pair<std::size_t, std::size_t>> labels;  // (regime, phase), 0-based
  Matrix ptilde;                                            // row-stochastic, size d~ x d~
  Vec beta_tilde;
  std::vector<EmissionLaw> emission;  // one per regime

  std::size_t size() const { return labels.size(); }
  std::size_t num_regimes() const { return emission.size(); }
  std::size_t regime_of(std::size_t state) const { return labels[state].first; }

  std::vector<std::size_t> phase_layout() const;
  // First extended state of each regime block.
  std::vector<std::size_t> block_offsets() const;

  const EmissionLaw& law_of_state(std::size_t state) const { return emission[regime_of(state)]; }

  // Per-regime sums of an extended-state vector (e.g. beta_tilde or a
  // stationary law aggregated to regime masses).
  Vec aggregate_by_regime(const Vec& v) const;
};

// Row-sum and shape checks for an extended model assembled by hand.
void extended_validate(const ExtendedHmm& e);

// Builds the extended HMM of a PH-HMM:
//   diagonal block i            = T_i
//   off-diagonal block (i, j)   = T_i0 (p_ij alpha_j)   (outer product)
//   beta~                       = (beta_1 alpha_1, ..., beta_d alpha_d)
// A single-regime model renews its own sojourn: P~ = T_1 + T_10 alpha_1.
ExtendedHmm expand_model(const PhTypeHmm& m);

// How the sojourn initial vectors are reconstructed from the off-diagonal
// blocks when EM noise has broken their rank-one structure. Both rules are
// exact on exactly rank-one blocks.
//   MassPooled    alpha_j(k) proportional to sum_i sum_f B_ij(f,k)
//                 (heavier exit rows weigh more)
//   RowAveraged   each block row normalized first, then averaged
//                 (every exit row counts equally)
//   InitialLaw    alpha_j from the initial-law block, beta~(j,.) normalized
//                 (exact because beta~ = beta (x) alpha by construction)
enum class AlphaRecovery { MassPooled, RowAveraged, InitialLaw };

// Recovers structured PH-HMM parameters from an extended transition matrix.
//
// The diagonal blocks give T_i directly and T_i0 = (I - T_i) e. Each
// off-diagonal block B_ij = T_i0 (p_ij alpha_j) is rank one; the jump
// probabilities come from the block masses, p_ij proportional to
// sum(B_ij) normalized over j != i, and the alpha_j by the rule above.
//
// `emission_override` replaces the extended model's emissions (used when a
// caller re-fits emissions separately); pass empty to keep them.
PhTypeHmm collapse_parameters(const ExtendedHmm& e, const std::vector<std::size_t>& phase_layout,
                              std::vector<std::string> regime_labels = {},
                              std::vector<EmissionLaw> emission_override = {},
                              AlphaRecovery recovery = AlphaRecovery::MassPooled);

}  // namespace phhmm
