#include "phhmm/emission.hpp"

#include <cmath>

#include "phhmm/common.hpp"

namespace phhmm {

namespace {

bool is_count(double y) { return y >= 0.0 && std::floor(y) == y; }

double poisson_pmf(double lambda, double y) {
  if (!is_count(y)) return 0.0;
  return std::exp(-lambda + y * std::log(lambda) - std::lgamma(y + 1.0));
}

}  // namespace

EmissionLaw emission_validate(EmissionLaw law) {
  if (auto* c = std::get_if<CategoricalEmission>(&law)) {
    if (c->alphabet.empty()) throw DataError("categorical emission: empty alphabet");
    if (c->alphabet.size() != c->probs.size())
      throw DataError("categorical emission: alphabet and probs lengths differ");
    double s = 0.0;
    for (double p : c->probs) {
      if (std::isnan(p) || p < -kStochasticTol)
        throw DataError("categorical emission: negative probability");
      s += p;
    }
    if (std::abs(s - 1.0) > kStochasticTol)
      throw DataError("categorical emission: probabilities sum to " + format_double_exact(s));
    for (double& p : c->probs) p = std::max(p, 0.0) / s;
    for (std::size_t i = 1; i < c->alphabet.size(); ++i)
      if (c->alphabet[i] <= c->alphabet[i - 1])
        throw DataError("categorical emission: alphabet must be strictly increasing");
  } else if (auto* p = std::get_if<PoissonEmission>(&law)) {
    if (!(p->lambda > 0.0) || !std::isfinite(p->lambda))
      throw DataError("poisson emission: lambda must be positive");
  } else if (auto* e = std::get_if<ExponentialEmission>(&law)) {
    if (!(e->rate > 0.0) || !std::isfinite(e->rate))
      throw DataError("exponential emission: rate must be positive");
  }
  return law;
}

SignalKind emission_kind(const EmissionLaw& law) {
  if (std::holds_alternative<CategoricalEmission>(law)) return SignalKind::Categorical;
  if (std::holds_alternative<ExponentialEmission>(law)) return SignalKind::Density;
  return SignalKind::Count;
}

double emission_eval(const EmissionLaw& law, double y) {
  if (const auto* d = std::get_if<DegenerateEmission>(&law)) return y == d->value ? 1.0 : 0.0;
  if (const auto* c = std::get_if<CategoricalEmission>(&law)) {
    for (std::size_t i = 0; i < c->alphabet.size(); ++i)
      if (c->alphabet[i] == y) return c->probs[i];
    throw DataError("categorical emission: signal " + format_double(y) + " not in alphabet");
  }
  if (const auto* p = std::get_if<PoissonEmission>(&law)) return poisson_pmf(p->lambda, y);
  const auto& e = std::get<ExponentialEmission>(law);
  return y >= 0.0 ? e.rate * std::exp(-e.rate * y) : 0.0;
}

double emission_sample(const EmissionLaw& law, RandomStream& rng) {
  if (const auto* d = std::get_if<DegenerateEmission>(&law)) return d->value;
  if (const auto* c = std::get_if<CategoricalEmission>(&law))
    return c->alphabet[rng.pick(c->probs)];
  if (const auto* p = std::get_if<PoissonEmission>(&law))
    return static_cast<double>(rng.poisson(p->lambda));
  return rng.exponential(std::get<ExponentialEmission>(law).rate);
}

double emission_mean(const EmissionLaw& law) {
  if (const auto* d = std::get_if<DegenerateEmission>(&law)) return d->value;
  if (const auto* c = std::get_if<CategoricalEmission>(&law)) return dot(c->alphabet, c->probs);
  if (const auto* p = std::get_if<PoissonEmission>(&law)) return p->lambda;
  return 1.0 / std::get<ExponentialEmission>(law).rate;
}

double emission_cdf(const EmissionLaw& law, double y) {
  if (const auto* d = std::get_if<DegenerateEmission>(&law)) return y >= d->value ? 1.0 : 0.0;
  if (const auto* c = std::get_if<CategoricalEmission>(&law)) {
    double s = 0.0;
    for (std::size_t i = 0; i < c->alphabet.size(); ++i)
      if (c->alphabet[i] <= y) s += c->probs[i];
    return s;
  }
  if (const auto* p = std::get_if<PoissonEmission>(&law)) {
    if (y < 0.0) return 0.0;
    const long top = static_cast<long>(std::floor(y));
    double term = std::exp(-p->lambda);
    double s = term;
    for (long k = 1; k <= top; ++k) {
      term *= p->lambda / static_cast<double>(k);
      s += term;
    }
    return s < 1.0 ? s : 1.0;
  }
  const auto& e = std::get<ExponentialEmission>(law);
  return y >= 0.0 ? -std::expm1(-e.rate * y) : 0.0;
}

double emission_zero_mass(const EmissionLaw& law, double zero_band_edge) {
  if (emission_kind(law) == SignalKind::Density)
    return emission_cdf(law, zero_band_edge);
  return emission_cdf(law, 0.0);
}

const char* emission_family_name(const EmissionLaw& law) {
  switch (law.index()) {
    case 0: return "degenerate";
    case 1: return "categorical";
    case 2: return "poisson";
    default: return "exponential";
  }
}

}  // namespace phhmm
