#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phhmm/linalg.hpp"
#include "phhmm/rng.hpp"

namespace phhmm {

// Discrete phase-type distribution: the law of the absorption time of a
// finite discrete-time Markov chain with transient phase set {1..F}, initial
// phase law `alpha` and transient transition block `T`. Values are immutable
// after validation, so instances can be shared across threads.
class DiscretePhaseType {
public:
  // Validates and renormalizes (alpha, T). Entries within kStochasticTol of
  // the constraints are snapped onto them; anything further off is rejected
  // with a DataError naming the violation. Phases that carry no alpha mass
  // and are unreachable through T are allowed even when they have no exit
  // probability; they are reported through `warnings` when provided.
  static DiscretePhaseType validate(Vec alpha, Matrix t,
                                    std::vector<std::string>* warnings = nullptr);

  std::size_t num_phases() const { return alpha_.size(); }
  const Vec& alpha() const { return alpha_; }
  const Matrix& transient() const { return t_; }

  // Exit vector T0 = (I - T) e.
  Vec exit_vector() const;

  // P(tau = n) = alpha T^{n-1} T0, n >= 1. Computed by propagating the
  // phase-occupancy row vector, never by explicit matrix powers.
  double pmf(long n) const;

  // P(tau <= n) = 1 - alpha T^n e, n >= 0.
  double cdf(long n) const;

  // pmf(1..n_max) in one propagation sweep.
  Vec pmf_table(long n_max) const;

  // E[tau] = alpha (I - T)^{-1} e, restricted to reachable phases.
  double mean() const;

  // Draws tau >= 1 by simulating the absorbing phase chain step by step.
  long sample(RandomStream& rng) const;

  // Phase indices reachable from a positive-alpha phase through T.
  std::vector<bool> reachable_phases() const;

  bool operator==(const DiscretePhaseType& other) const = default;

private:
  DiscretePhaseType(Vec alpha, Matrix t) : alpha_(std::move(alpha)), t_(std::move(t)) {}

  Vec alpha_;
  Matrix t_;
};

// Convenience constructors for the degenerate one-step law and the
// geometric law with success probability p (alpha = (1), T = (1 - p)).
DiscretePhaseType dph_degenerate_one_step();
DiscretePhaseType dph_geometric(double success_prob);

}  // namespace phhmm
