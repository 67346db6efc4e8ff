#pragma once

#include <variant>
#include <vector>

#include "phhmm/linalg.hpp"
#include "phhmm/rng.hpp"

namespace phhmm {

// Signal domains an emission law can live on. Likelihoods may mix masses
// with masses or densities with densities, never both, so a model requires
// one kind across all regimes.
enum class SignalKind { Count, Categorical, Density };

struct DegenerateEmission {
  double value = 0.0;
  bool operator==(const DegenerateEmission&) const = default;
};

struct CategoricalEmission {
  Vec alphabet;  // finite signal values y_1..y_s
  Vec probs;     // same length, nonnegative, sums to 1
  bool operator==(const CategoricalEmission&) const = default;
};

struct PoissonEmission {
  double lambda = 1.0;
  bool operator==(const PoissonEmission&) const = default;
};

// Exponential density w.r.t. Lebesgue measure, in 1/hm^3.
struct ExponentialEmission {
  double rate = 1.0;
  bool operator==(const ExponentialEmission&) const = default;
};

using EmissionLaw =
    std::variant<DegenerateEmission, CategoricalEmission, PoissonEmission, ExponentialEmission>;

// Checks parameter invariants, renormalizing categorical probabilities
// within kStochasticTol. Throws DataError otherwise.
EmissionLaw emission_validate(EmissionLaw law);

SignalKind emission_kind(const EmissionLaw& law);

// Probability mass (Count/Categorical) or Lebesgue density (Density) at y.
// A categorical law throws DataError when y is not in its alphabet.
double emission_eval(const EmissionLaw& law, double y);

double emission_sample(const EmissionLaw& law, RandomStream& rng);

double emission_mean(const EmissionLaw& law);

// P(Y <= y).
double emission_cdf(const EmissionLaw& law, double y);

// Mass of the "effectively zero" inflow band. Exact point mass at 0 for
// discrete laws; P(Y < zero_band_edge) for density laws, where the edge is
// the configured cutoff below which an annual inflow counts as none.
double emission_zero_mass(const EmissionLaw& law, double zero_band_edge);

const char* emission_family_name(const EmissionLaw& law);

}  // namespace phhmm
