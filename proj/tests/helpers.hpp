#pragma once

// Test-only oracles, independent of the library implementation paths they
// check: brute-force hidden-path likelihoods and posteriors, chi-square
// goodness-of-fit machinery, and random model generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "phhmm/expand.hpp"
#include "phhmm/model.hpp"
#include "phhmm/rng.hpp"

namespace testutil {

using phhmm::EmissionLaw;
using phhmm::ExtendedHmm;
using phhmm::Matrix;
using phhmm::PhTypeHmm;
using phhmm::RandomStream;
using phhmm::Vec;

// ---------------------------------------------------------------------------
// Brute-force path enumeration over hidden extended-state paths.
// Joint weight of (s_0..s_N): beta~(s_0) prod_n P~(s_{n-1}, s_n) g(s_n, Y_n).

struct EnumerationOracle {
  double loglik;
  Matrix gamma;                // (N+1) x d~ posteriors
  std::vector<Matrix> xi;      // N slices, d~ x d~
};

inline EnumerationOracle enumerate_paths(const ExtendedHmm& e, const std::vector<double>& obs) {
  const std::size_t n_states = e.size();
  const std::size_t n = obs.size();

  // Precompute emission values.
  Matrix g(n, n_states);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t s = 0; s < n_states; ++s)
      g(t, s) = phhmm::emission_eval(e.emission[e.regime_of(s)], obs[t]);

  EnumerationOracle oracle;
  oracle.gamma = Matrix(n + 1, n_states);
  oracle.xi.assign(n, Matrix(n_states, n_states));

  std::vector<std::size_t> path(n + 1, 0);
  double total = 0.0;
  for (;;) {
    double w = e.beta_tilde[path[0]];
    for (std::size_t t = 1; t <= n && w > 0.0; ++t)
      w *= e.ptilde(path[t - 1], path[t]) * g(t - 1, path[t]);
    if (w > 0.0) {
      total += w;
      for (std::size_t t = 0; t <= n; ++t) oracle.gamma(t, path[t]) += w;
      for (std::size_t t = 1; t <= n; ++t) oracle.xi[t - 1](path[t - 1], path[t]) += w;
    }
    // Next path in lexicographic order.
    std::size_t pos = 0;
    while (pos <= n && ++path[pos] == n_states) path[pos++] = 0;
    if (pos > n) break;
  }
  oracle.loglik = std::log(total);
  for (std::size_t t = 0; t <= n; ++t)
    for (std::size_t s = 0; s < n_states; ++s) oracle.gamma(t, s) /= total;
  for (auto& slice : oracle.xi)
    for (std::size_t a = 0; a < n_states; ++a)
      for (std::size_t b = 0; b < n_states; ++b) slice(a, b) /= total;
  return oracle;
}

// ---------------------------------------------------------------------------
// Chi-square upper quantile via the regularized lower incomplete gamma
// function (series + continued fraction) and bisection.

inline double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double acc = term;
    for (int k = 1; k < 10000; ++k) {
      term *= x / (a + k);
      acc += term;
      if (term < acc * 1e-16) break;
    }
    return acc * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  // Continued fraction for Q(a, x) (Lentz's method).
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k < 10000; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - log_gamma_a) * h;
  return 1.0 - q;
}

inline double chi_square_quantile(double p, double dof) {
  double lo = 0.0, hi = dof + 200.0 * std::sqrt(2.0 * dof) + 200.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_gamma_p(dof / 2.0, mid / 2.0) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Pearson statistic of observed counts vs expected probabilities, merging
// tail cells with expected count below `min_expected` into one bin.
// Returns true when the statistic stays below the (1 - alpha) quantile.
inline bool chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                           double alpha, double min_expected = 5.0) {
  double stat = 0.0;
  double merged_obs = 0.0, merged_exp = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < min_expected) {
      merged_obs += observed[i];
      merged_exp += expected[i];
      continue;
    }
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    ++cells;
  }
  if (merged_exp > 0.0) {
    stat += (merged_obs - merged_exp) * (merged_obs - merged_exp) / merged_exp;
    ++cells;
  }
  if (cells < 2) return true;
  const double crit = chi_square_quantile(1.0 - alpha, static_cast<double>(cells - 1));
  return stat < crit;
}

// ---------------------------------------------------------------------------
// Random model generators. Jump entries are kept away from zero so every
// regime stays enterable and alpha recovery is well-posed.

inline phhmm::DiscretePhaseType random_dph(std::size_t phases, RandomStream& rng) {
  Vec alpha(phases);
  double total = 0.0;
  for (auto& a : alpha) {
    a = 0.1 + rng.uniform();
    total += a;
  }
  for (auto& a : alpha) a /= total;

  Matrix t(phases, phases);
  for (std::size_t r = 0; r < phases; ++r) {
    Vec w(phases + 1);
    double wt = 0.0;
    for (auto& x : w) {
      x = rng.uniform();
      wt += x;
    }
    w[phases] += 0.25 * wt;  // keep a healthy exit probability
    wt += 0.25 * wt;
    for (std::size_t c = 0; c < phases; ++c) t(r, c) = w[c] / wt;
  }
  return phhmm::DiscretePhaseType::validate(std::move(alpha), std::move(t));
}

enum class RandomEmission { Categorical, Poisson, Exponential };

inline EmissionLaw random_emission(RandomEmission family, RandomStream& rng, double scale) {
  switch (family) {
    case RandomEmission::Poisson:
      return phhmm::PoissonEmission{0.5 + scale * rng.uniform()};
    case RandomEmission::Exponential:
      return phhmm::ExponentialEmission{0.2 + 2.0 * rng.uniform()};
    case RandomEmission::Categorical:
    default: {
      const Vec alphabet{0.0, 1.0, 2.0, 3.0};
      Vec probs(alphabet.size());
      double total = 0.0;
      for (auto& p : probs) {
        p = 0.05 + rng.uniform();
        total += p;
      }
      for (auto& p : probs) p /= total;
      return phhmm::CategoricalEmission{alphabet, probs};
    }
  }
}

inline PhTypeHmm random_model(const std::vector<std::size_t>& layout, RandomEmission family,
                              RandomStream& rng) {
  const std::size_t d = layout.size();
  Vec beta(d);
  double total = 0.0;
  for (auto& b : beta) {
    b = 0.1 + rng.uniform();
    total += b;
  }
  for (auto& b : beta) b /= total;

  Matrix jump;
  if (d > 1) {
    jump = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      double rt = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        if (i == j) continue;
        jump(i, j) = 0.1 + rng.uniform();
        rt += jump(i, j);
      }
      for (std::size_t j = 0; j < d; ++j) jump(i, j) /= rt;
      jump(i, i) = 0.0;
    }
  }

  std::vector<phhmm::DiscretePhaseType> sojourn;
  std::vector<EmissionLaw> emission;
  for (std::size_t i = 0; i < d; ++i) {
    sojourn.push_back(random_dph(layout[i], rng));
    emission.push_back(random_emission(family, rng, 4.0 + 3.0 * double(i)));
  }
  return PhTypeHmm::validate({}, std::move(beta), std::move(jump), std::move(sojourn),
                             std::move(emission));
}

inline double mean_of(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

inline double sd_of(const Vec& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() > 1 ? std::sqrt(s / double(v.size() - 1)) : 0.0;
}

}  // namespace testutil
