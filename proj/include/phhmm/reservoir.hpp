#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "phhmm/expand.hpp"

namespace phhmm {

// Annual inflow law binned against the release volume omega:
//   zero_mass   P(Y in the "effectively zero" band)
//   bins[k]     P(k omega < Y <= (k+1) omega), k = 0..n0-1 (zero band removed
//               from bins[0])
//   tail        P(Y > n0 omega)
struct InflowLaw {
  double omega = 0.0;
  double zero_mass = 0.0;
  Vec bins;
  double tail = 0.0;

  std::size_t n0() const { return bins.size(); }
  // P(Y > m * omega).
  double above(std::size_t m) const;
};

// Storage Markov chain for a reservoir with fixed annual release omega and
// capacity C. States are supply-year counts 0..k-1; state v means stored
// volume covers at least v years of demand, and the last state pools every
// level at or beyond k-1 years. The matrix has the banded layout in which
// a level can drop at most one state per year.
struct MoranChain {
  double omega = 0.0;
  double capacity = 0.0;
  std::size_t n0 = 0;  // floor(capacity / omega)
  Matrix p;            // k x k, row-stochastic

  std::size_t num_states() const { return p.rows(); }

  // Wraps an externally produced matrix (e.g. a published fit), checking
  // stochasticity and the band structure.
  static MoranChain from_matrix(Matrix p, double omega, double capacity);
};

// Stationary law of the extended chain: pi P~ = pi on the single recurrent
// communicating class, zero elsewhere. Throws NumericError when the chain
// has several recurrent classes (the caller must pick one).
Vec stationary_law(const ExtendedHmm& e);

// Marginal inflow law under the stationary regime mix, binned for a Moran
// chain with release omega and n0 interior bins. Density-type emissions
// treat inflow below `zero_band_edge` as zero inflow.
InflowLaw marginal_inflow_law(const ExtendedHmm& e, double omega, std::size_t n0,
                              double zero_band_edge = 1.0);

// Builds the Moran transition matrix from a binned inflow law. The chain
// has min(max_states, n0 + 1) states (all levels >= the last state pooled).
MoranChain moran_build(const InflowLaw& law, double omega, double capacity,
                       std::optional<std::size_t> max_states = std::nullopt);

// P(reservoir avoids the empty state through time n | V_0 = v), with the
// empty state removed (absorbing failure). v >= 1. Nonincreasing in n.
double reliability(const MoranChain& c, std::size_t v, long n);

// P(reservoir is non-empty at time n | V_0 = v) under the full chain;
// recovery from empty is allowed, so availability dominates reliability.
double availability(const MoranChain& c, std::size_t v, long n);

// Mean time to first reach the empty state from v >= 1, by the
// fundamental-matrix identity 1_v (I - P_0)^{-1} e. Throws NumericError
// when the empty state is unreachable from v (infinite MTTF).
double mttf(const MoranChain& c, std::size_t v);

// Yearly water-balance audit against recorded volumes.
struct BalanceAudit {
  Vec computed;     // V~_n = min(max(0, V_{n-1} + Y_{n-1} - O_{n-1}), C1), n = 1..N
  Vec recorded;     // V_n as reported
  Vec discrepancy;  // computed - recorded
};

// `recorded` holds V_1..V_N; inflows and outflows hold Y_0..Y_{N-1} and
// O_0..O_{N-1}. The recursion uses the recorded volume of the previous
// year on the right-hand side (v0 for the first step).
BalanceAudit balance_audit(double v0, const Vec& inflows, const Vec& outflows,
                           const Vec& recorded, double c1);

}  // namespace phhmm
