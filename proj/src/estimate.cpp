#include "phhmm/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phhmm/common.hpp"
#include "phhmm/parallel.hpp"
#include "phhmm/rng.hpp"

namespace phhmm {

namespace {

// Emission value of every extended state for one observation, cached per
// regime since states of a regime share the law.
Vec state_emissions(const ExtendedHmm& e, double y) {
  Vec per_regime(e.num_regimes());
  for (std::size_t i = 0; i < e.num_regimes(); ++i)
    per_regime[i] = emission_eval(e.emission[i], y);
  Vec out(e.size());
  for (std::size_t s = 0; s < e.size(); ++s) out[s] = per_regime[e.regime_of(s)];
  return out;
}

}  // namespace

Trellis forward_pass(const ExtendedHmm& e, const std::vector<double>& obs) {
  const std::size_t n_states = e.size();
  const std::size_t n_obs = obs.size();
  if (n_obs == 0) throw DataError("forward_pass: empty observation series");

  Trellis t;
  t.forward = Matrix(n_obs + 1, n_states);
  t.scale.assign(n_obs + 1, 1.0);

  Vec v = e.beta_tilde;
  for (std::size_t s = 0; s < n_states; ++s) t.forward(0, s) = v[s];

  for (std::size_t step = 1; step <= n_obs; ++step) {
    Vec w = vec_mat(v, e.ptilde);
    const Vec g = state_emissions(e, obs[step - 1]);
    double total = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      w[s] *= g[s];
      total += w[s];
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw NumericError("forward_pass: observation at step " + std::to_string(step) +
                         " (value " + format_double(obs[step - 1]) +
                         ") has zero likelihood under every regime");
    for (std::size_t s = 0; s < n_states; ++s) {
      w[s] /= total;
      t.forward(step, s) = w[s];
    }
    t.scale[step] = total;
    v = std::move(w);
  }

  t.loglik = 0.0;
  for (std::size_t step = 1; step <= n_obs; ++step) t.loglik += std::log(t.scale[step]);
  return t;
}

void backward_pass(const ExtendedHmm& e, const std::vector<double>& obs, Trellis& t) {
  const std::size_t n_states = e.size();
  const std::size_t n_obs = obs.size();
  if (t.scale.size() != n_obs + 1)
    throw DataError("backward_pass: scale vector does not match the observation series");

  t.backward = Matrix(n_obs + 1, n_states);
  for (std::size_t s = 0; s < n_states; ++s) t.backward(n_obs, s) = 1.0;

  for (std::size_t step = n_obs; step-- > 0;) {
    const Vec g = state_emissions(e, obs[step]);  // emission of time step+1
    const double inv_scale = 1.0 / t.scale[step + 1];
    for (std::size_t s = 0; s < n_states; ++s) {
      double acc = 0.0;
      for (std::size_t s2 = 0; s2 < n_states; ++s2)
        acc += e.ptilde(s, s2) * g[s2] * t.backward(step + 1, s2);
      t.backward(step, s) = acc * inv_scale;
    }
  }
}

Posteriors posteriors(const Trellis& t, const ExtendedHmm& e, const std::vector<double>& obs) {
  const std::size_t n_states = e.size();
  const std::size_t n_obs = obs.size();
  if (t.backward.rows() != n_obs + 1)
    throw DataError("posteriors: incomplete trellis");

  Posteriors post;
  post.gamma = Matrix(n_obs + 1, n_states);
  for (std::size_t step = 0; step <= n_obs; ++step)
    for (std::size_t s = 0; s < n_states; ++s)
      post.gamma(step, s) = t.forward(step, s) * t.backward(step, s);

  post.xi.reserve(n_obs);
  for (std::size_t step = 1; step <= n_obs; ++step) {
    const Vec g = state_emissions(e, obs[step - 1]);
    Matrix xi(n_states, n_states);
    const double inv_scale = 1.0 / t.scale[step];
    for (std::size_t s = 0; s < n_states; ++s) {
      const double f = t.forward(step - 1, s);
      if (f == 0.0) continue;
      for (std::size_t s2 = 0; s2 < n_states; ++s2) {
        const double p = e.ptilde(s, s2);
        if (p == 0.0) continue;
        xi(s, s2) = f * p * g[s2] * t.backward(step, s2) * inv_scale;
      }
    }
    post.xi.push_back(std::move(xi));
  }
  return post;
}

MStepResult m_step(const Posteriors& post, const std::vector<double>& obs, const ExtendedHmm& e,
                   bool update_emissions, bool update_initial_law) {
  const std::size_t n_states = e.size();
  const std::size_t n_obs = obs.size();

  MStepResult result;
  result.model = e;

  // Transition rows: expected transition counts over expected visits.
  Matrix xi_sum(n_states, n_states);
  for (const Matrix& xi : post.xi)
    for (std::size_t s = 0; s < n_states; ++s)
      for (std::size_t s2 = 0; s2 < n_states; ++s2) xi_sum(s, s2) += xi(s, s2);
  for (std::size_t s = 0; s < n_states; ++s) {
    double visits = 0.0;
    for (std::size_t step = 0; step < n_obs; ++step) visits += post.gamma(step, s);
    if (visits <= 1e-290) {
      ++result.dead_rows;  // state never visited in expectation: keep its row
      continue;
    }
    // Normalize by the row total of xi_sum rather than the visit count; the
    // two agree analytically and the former keeps the row stochastic to the
    // last bit.
    const double row_total = xi_sum.row_sum(s);
    if (row_total <= 0.0) {
      ++result.dead_rows;
      continue;
    }
    for (std::size_t s2 = 0; s2 < n_states; ++s2)
      result.model.ptilde(s, s2) = xi_sum(s, s2) / row_total;
  }

  // Initial law.
  if (update_initial_law)
    for (std::size_t s = 0; s < n_states; ++s) result.model.beta_tilde[s] = post.gamma(0, s);

  // Emission parameters, weighted by per-regime posterior mass at each
  // emission time.
  if (!update_emissions) return result;
  const std::size_t d = e.num_regimes();
  Vec w_total(d, 0.0), wy_total(d, 0.0);
  std::vector<Vec> cat_counts;
  const CategoricalEmission* cat0 = std::get_if<CategoricalEmission>(&e.emission[0]);
  if (cat0) cat_counts.assign(d, Vec(cat0->alphabet.size(), 0.0));

  for (std::size_t step = 1; step <= n_obs; ++step) {
    const double y = obs[step - 1];
    Vec w(d, 0.0);
    for (std::size_t s = 0; s < n_states; ++s) w[e.regime_of(s)] += post.gamma(step, s);
    for (std::size_t i = 0; i < d; ++i) {
      w_total[i] += w[i];
      wy_total[i] += w[i] * y;
      if (cat0) {
        const auto& alphabet = cat0->alphabet;
        const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), y);
        if (it != alphabet.end() && *it == y)
          cat_counts[i][static_cast<std::size_t>(it - alphabet.begin())] += w[i];
      }
    }
  }

  for (std::size_t i = 0; i < d; ++i) {
    if (w_total[i] <= 1e-290) continue;  // dead regime: keep previous law
    EmissionLaw& law = result.model.emission[i];
    if (auto* p = std::get_if<PoissonEmission>(&law)) {
      p->lambda = std::max(wy_total[i] / w_total[i], 1e-12);
    } else if (auto* x = std::get_if<ExponentialEmission>(&law)) {
      x->rate = std::min(w_total[i] / std::max(wy_total[i], 1e-300), 1e9);
    } else if (auto* c = std::get_if<CategoricalEmission>(&law)) {
      for (std::size_t k = 0; k < c->probs.size(); ++k) c->probs[k] = cat_counts[i][k] / w_total[i];
    }
    // Degenerate has no free parameter.
  }
  return result;
}

std::size_t free_parameter_count(const std::vector<std::size_t>& phase_layout,
                                 const std::vector<std::vector<bool>>& jump_mask,
                                 FitFamily family, std::size_t alphabet_size) {
  const std::size_t d = phase_layout.size();
  std::size_t n_states = 0;
  for (std::size_t f : phase_layout) n_states += f;

  std::size_t k = n_states - 1;  // free initial-law entries
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t allowed_cols = phase_layout[i];  // own block always allowed
    for (std::size_t j = 0; j < d; ++j) {
      if (j == i) continue;
      const bool open = jump_mask.empty() || jump_mask[i][j];
      if (open) allowed_cols += phase_layout[j];
    }
    if (d == 1) allowed_cols = phase_layout[0];
    k += phase_layout[i] * (allowed_cols - 1);  // each row loses one to normalization
  }
  switch (family) {
    case FitFamily::Degenerate: break;
    case FitFamily::Categorical: k += d * (alphabet_size - 1); break;
    case FitFamily::Poisson:
    case FitFamily::Exponential: k += d; break;
  }
  return k;
}

namespace {

struct RestartOutcome {
  bool ok = false;
  std::string error;
  ExtendedHmm model;
  Vec trace;
  std::size_t dead_rows = 0;
};

std::vector<double> sorted_distinct(const std::vector<double>& obs) {
  std::vector<double> v = obs;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Quantile split of the sorted observations into d groups; group g seeds
// the emission parameters of regime g. Deterministic, so restarts differ
// only through the random transition matrix.
std::vector<EmissionLaw> initial_emissions(const std::vector<double>& obs, std::size_t d,
                                           FitFamily family, const Vec& alphabet) {
  std::vector<double> sorted = obs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  std::vector<EmissionLaw> laws;
  laws.reserve(d);
  for (std::size_t g = 0; g < d; ++g) {
    const std::size_t lo = g * n / d;
    const std::size_t hi = std::max((g + 1) * n / d, lo + 1);
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t idx = lo; idx < hi && idx < n; ++idx) {
      mean += sorted[idx];
      ++count;
    }
    mean = count ? mean / static_cast<double>(count) : sorted[n / 2];

    switch (family) {
      case FitFamily::Degenerate:
        laws.push_back(DegenerateEmission{mean});
        break;
      case FitFamily::Poisson:
        laws.push_back(PoissonEmission{std::max(mean, 0.05)});
        break;
      case FitFamily::Exponential:
        laws.push_back(ExponentialEmission{1.0 / std::max(mean, 1e-6)});
        break;
      case FitFamily::Categorical: {
        // Group histogram blended with the global one so every observed
        // signal keeps positive probability under every regime at start.
        Vec probs(alphabet.size(), 0.0);
        Vec global(alphabet.size(), 0.0);
        for (double y : obs) {
          const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), y);
          global[static_cast<std::size_t>(it - alphabet.begin())] += 1.0 / double(n);
        }
        for (std::size_t idx = lo; idx < hi && idx < n; ++idx) {
          const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), sorted[idx]);
          probs[static_cast<std::size_t>(it - alphabet.begin())] += 1.0 / double(count);
        }
        for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = 0.9 * probs[k] + 0.1 * global[k];
        laws.push_back(CategoricalEmission{alphabet, std::move(probs)});
        break;
      }
    }
  }
  return laws;
}

// Emission law of the warm-start model converted to the family being fit.
EmissionLaw convert_to_family(const EmissionLaw& law, FitFamily family, const Vec& alphabet) {
  const double mean = emission_mean(law);
  switch (family) {
    case FitFamily::Degenerate:
      return DegenerateEmission{mean};
    case FitFamily::Poisson:
      return PoissonEmission{std::max(mean, 1e-6)};
    case FitFamily::Exponential:
      return ExponentialEmission{1.0 / std::max(mean, 1e-9)};
    case FitFamily::Categorical:
    default: {
      Vec probs(alphabet.size());
      double total = 0.0;
      for (std::size_t k = 0; k < alphabet.size(); ++k) {
        probs[k] = emission_eval(law, alphabet[k]);
        total += probs[k];
      }
      if (total <= 0.0)
        throw NumericError("fit: warm-start emission law has no mass on the observed signals");
      for (double& p : probs) p /= total;
      return CategoricalEmission{alphabet, std::move(probs)};
    }
  }
}

ExtendedHmm warm_start_extended(const FitConfig& cfg, const Vec& alphabet) {
  const PhTypeHmm& m = *cfg.initial_model;
  if (m.phase_layout() != cfg.phase_layout)
    throw DataError("fit: warm-start model phase layout does not match the configuration");
  ExtendedHmm e = expand_model(m);
  for (std::size_t i = 0; i < e.emission.size(); ++i)
    e.emission[i] = convert_to_family(e.emission[i], cfg.family, alphabet);
  return e;
}

ExtendedHmm initial_extended(const FitConfig& cfg, const std::vector<EmissionLaw>& emissions,
                             RandomStream& rng) {
  const std::size_t d = cfg.phase_layout.size();
  ExtendedHmm e;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t f = 0; f < cfg.phase_layout[i]; ++f) e.labels.emplace_back(i, f);
  const std::size_t n = e.labels.size();
  e.emission = emissions;
  e.beta_tilde.assign(n, 1.0 / double(n));
  e.ptilde = Matrix(n, n);

  const auto offsets = e.block_offsets();
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = e.regime_of(s);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const bool open = (i == j) || cfg.jump_mask.empty() || cfg.jump_mask[i][j];
      if (!open) continue;
      for (std::size_t k = 0; k < cfg.phase_layout[j]; ++k) {
        const double u = rng.uniform();
        e.ptilde(s, offsets[j] + k) = u;
        total += u;
      }
    }
    if (total <= 0.0) throw NumericError("fit: empty support row in initial transition matrix");
    for (std::size_t c = 0; c < n; ++c) e.ptilde(s, c) /= total;
  }
  return e;
}

RestartOutcome run_em(const std::vector<double>& obs, const FitConfig& cfg,
                      const std::vector<EmissionLaw>& emissions, const Vec& alphabet,
                      std::size_t restart, std::uint64_t stream_seed) {
  RestartOutcome out;
  try {
    RandomStream rng(stream_seed);
    ExtendedHmm current = (cfg.initial_model && restart == 0)
                              ? warm_start_extended(cfg, alphabet)
                              : initial_extended(cfg, emissions, rng);
    double previous = -std::numeric_limits<double>::infinity();
    for (long iter = 0; iter < cfg.max_iterations; ++iter) {
      Trellis trellis = forward_pass(current, obs);
      if (!std::isfinite(trellis.loglik)) throw NumericError("fit: non-finite log-likelihood");
      out.trace.push_back(trellis.loglik);
      const double rel = std::abs(trellis.loglik - previous) / (1.0 + std::abs(trellis.loglik));
      if (iter > 0 && rel < cfg.tol) break;
      previous = trellis.loglik;
      // The reported model must be the one scored by trace.back(), so the
      // last allowed iteration stops after its E-step.
      if (iter == cfg.max_iterations - 1) break;

      backward_pass(current, obs, trellis);
      const Posteriors post = posteriors(trellis, current, obs);
      MStepResult step = m_step(post, obs, current, !cfg.fix_emissions, cfg.update_initial_law);
      out.dead_rows += step.dead_rows;
      current = std::move(step.model);
    }
    out.model = std::move(current);
    out.ok = true;
  } catch (const std::exception& ex) {
    out.error = ex.what();
  }
  return out;
}

// Reorders the extended model's regime blocks (used to apply the canonical
// emission-mean ordering before collapsing).
ExtendedHmm permute_regimes(const ExtendedHmm& e, const std::vector<std::size_t>& order) {
  const auto layout = e.phase_layout();
  const auto offsets = e.block_offsets();
  std::vector<std::size_t> state_map;  // new state index -> old state index
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    for (std::size_t f = 0; f < layout[order[pos]]; ++f)
      state_map.push_back(offsets[order[pos]] + f);

  ExtendedHmm out;
  const std::size_t n = e.size();
  out.ptilde = Matrix(n, n);
  out.beta_tilde.resize(n);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    for (std::size_t f = 0; f < layout[order[pos]]; ++f) out.labels.emplace_back(pos, f);
  for (std::size_t s = 0; s < n; ++s) {
    out.beta_tilde[s] = e.beta_tilde[state_map[s]];
    for (std::size_t s2 = 0; s2 < n; ++s2) out.ptilde(s, s2) = e.ptilde(state_map[s], state_map[s2]);
  }
  out.emission.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) out.emission.push_back(e.emission[order[pos]]);
  return out;
}

}  // namespace

FitReport fit(const std::vector<double>& obs, const FitConfig& cfg) {
  if (obs.size() < 2) throw DataError("fit: need at least two observations");
  if (cfg.phase_layout.empty()) throw DataError("fit: empty phase layout");
  if (cfg.max_iterations < 1 || !(cfg.tol > 0.0) || cfg.restarts < 1)
    throw DataError("fit: max_iterations >= 1, tol > 0 and restarts >= 1 required");
  if (cfg.fix_emissions && !cfg.initial_model)
    throw DataError("fit: fix_emissions requires an initial model to take the laws from");
  if (cfg.initial_model && cfg.initial_model->phase_layout() != cfg.phase_layout)
    throw DataError("fit: warm-start model phase layout does not match the configuration");
  const std::size_t d = cfg.phase_layout.size();
  if (!cfg.jump_mask.empty()) {
    if (cfg.jump_mask.size() != d) throw DataError("fit: jump mask must be d x d");
    for (const auto& row : cfg.jump_mask)
      if (row.size() != d) throw DataError("fit: jump mask must be d x d");
  }

  Vec alphabet;
  if (cfg.family == FitFamily::Categorical) alphabet = sorted_distinct(obs);
  const std::vector<EmissionLaw> emissions = initial_emissions(obs, d, cfg.family, alphabet);

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(cfg.restarts));
  parallel_for(static_cast<std::size_t>(cfg.restarts), cfg.workers, [&](std::size_t r) {
    outcomes[r] = run_em(obs, cfg, emissions, alphabet, r, derive_seed(cfg.seed, r));
  });

  FitReport report;
  report.restart_logliks.assign(outcomes.size(), std::numeric_limits<double>::quiet_NaN());
  int best = -1;
  std::string first_error;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!outcomes[r].ok) {
      ++report.failed_restarts;
      if (first_error.empty()) first_error = outcomes[r].error;
      continue;
    }
    report.restart_logliks[r] = outcomes[r].trace.back();
    report.dead_row_events += outcomes[r].dead_rows;
    if (best < 0 || outcomes[r].trace.back() > outcomes[static_cast<std::size_t>(best)].trace.back())
      best = static_cast<int>(r);
  }
  if (best < 0) throw NumericError("fit: every restart failed; first error: " + first_error);

  RestartOutcome& winner = outcomes[static_cast<std::size_t>(best)];
  report.best_restart = best;
  report.trace = winner.trace;
  report.iterations = static_cast<long>(winner.trace.size());
  report.loglik = winner.trace.back();

  // Canonical regime order (ascending emission mean), applied to the
  // extended model before collapsing so both reported forms agree.
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return emission_mean(winner.model.emission[a]) < emission_mean(winner.model.emission[b]);
  });
  report.extended = permute_regimes(winner.model, order);

  std::vector<std::size_t> layout(d);
  for (std::size_t i = 0; i < d; ++i) layout[i] = cfg.phase_layout[order[i]];
  PhTypeHmm collapsed = collapse_parameters(report.extended, layout, {}, {}, cfg.alpha_recovery);
  report.model = cfg.canonicalize_phases ? canonical_phase_order(collapsed) : collapsed;

  report.parameter_count =
      free_parameter_count(cfg.phase_layout, cfg.jump_mask, cfg.family, alphabet.size());
  report.aic = aic(report.loglik, report.parameter_count);
  return report;
}

}  // namespace phhmm
