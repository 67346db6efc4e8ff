#pragma once

#include <string>
#include <vector>

#include "phhmm/dph.hpp"
#include "phhmm/emission.hpp"
#include "phhmm/linalg.hpp"

namespace phhmm {

// Hidden phase-type Markov model: a semi-Markov regime chain whose sojourn
// times are DPH-distributed, observed through per-regime emission laws.
//
//   regimes   labels 1..d (stored as strings for reporting)
//   beta      initial regime law
//   jump      embedded chain (p_ij): zero diagonal, rows sum to 1
//   sojourn   one DPH per regime; phase counts may differ between regimes
//   emission  one law per regime, all sharing a signal kind
//
// A single-regime model is accepted as a degenerate special case with an
// empty jump matrix (the regime simply renews its sojourn forever).
class PhTypeHmm {
public:
  // Empty placeholder (zero regimes); usable models come from validate().
  PhTypeHmm() = default;

  static PhTypeHmm validate(std::vector<std::string> regime_labels, Vec beta, Matrix jump,
                            std::vector<DiscretePhaseType> sojourn,
                            std::vector<EmissionLaw> emission,
                            std::vector<std::string>* warnings = nullptr);

  std::size_t num_regimes() const { return beta_.size(); }
  const std::vector<std::string>& regime_labels() const { return labels_; }
  const Vec& beta() const { return beta_; }
  const Matrix& jump() const { return jump_; }
  const std::vector<DiscretePhaseType>& sojourn() const { return sojourn_; }
  const std::vector<EmissionLaw>& emission() const { return emission_; }
  SignalKind signal_kind() const { return kind_; }

  std::vector<std::size_t> phase_layout() const;
  std::size_t extended_size() const;

  bool operator==(const PhTypeHmm& other) const = default;

private:
  std::vector<std::string> labels_;
  Vec beta_;
  Matrix jump_;
  std::vector<DiscretePhaseType> sojourn_;
  std::vector<EmissionLaw> emission_;
  SignalKind kind_ = SignalKind::Count;
};

// Semi-Markov kernel Q_ij(n): probability that the regime chain jumps from
// i to j after exactly n periods in i. Zero on the diagonal; regimes are
// 0-based indices here.
double semi_markov_kernel(const PhTypeHmm& m, std::size_t i, std::size_t j, long n);

// Regimes reordered by ascending emission mean (the canonical reporting
// order, so fitted and true models can be compared label-free).
PhTypeHmm canonical_regime_order(const PhTypeHmm& m);

// Phases of each regime reordered by descending alpha entry, ties broken by
// descending T diagonal. Phase relabeling does not change the law.
PhTypeHmm canonical_phase_order(const PhTypeHmm& m);

}  // namespace phhmm
