#include "phhmm/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "phhmm/common.hpp"
#include "phhmm/parallel.hpp"

namespace phhmm {

SamplePath sample_path(const PhTypeHmm& m, std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  return sample_path(m, n, rng);
}

SamplePath sample_path(const PhTypeHmm& m, std::size_t n, RandomStream& rng) {
  if (n < 1) throw DataError("sample_path: need at least one step");
  const std::size_t d = m.num_regimes();
  const auto layout = m.phase_layout();
  std::vector<std::size_t> offsets(d, 0);
  for (std::size_t i = 1; i < d; ++i) offsets[i] = offsets[i - 1] + layout[i - 1];

  SamplePath path;
  path.regime.reserve(n);
  path.extended_state.reserve(n);
  path.signal.reserve(n);

  std::size_t x = rng.pick(m.beta());
  std::size_t entry = 0;
  // Running the phase chain step by step draws the sojourn and the
  // extended state trajectory in one go: absorb -> jump to the next regime.
  std::size_t phase = rng.pick(m.sojourn()[x].alpha());
  std::vector<double> w;
  for (std::size_t t = 0; t < n; ++t) {
    path.regime.push_back(x);
    path.extended_state.push_back(offsets[x] + phase);
    path.signal.push_back(emission_sample(m.emission()[x], rng));

    const auto& dph = m.sojourn()[x];
    const std::size_t f = dph.num_phases();
    const Vec exit = dph.exit_vector();
    w.assign(f + 1, 0.0);
    for (std::size_t k = 0; k < f; ++k) w[k] = dph.transient()(phase, k);
    w[f] = exit[phase];
    const std::size_t next = rng.pick(w);
    if (next < f) {
      phase = next;
      continue;
    }
    // Sojourn over: jump (or renew, for a single-regime model).
    path.segments.push_back({x, entry, t - entry + 1, false});
    std::size_t next_regime = x;
    if (d > 1) next_regime = rng.pick(m.jump().row(x));
    x = next_regime;
    entry = t + 1;
    phase = rng.pick(m.sojourn()[x].alpha());
  }
  if (entry < n) path.segments.push_back({x, entry, n - entry, true});
  return path;
}

namespace {

Matrix zeros_like(std::size_t r, std::size_t c) { return Matrix(r, c); }

void add_scaled(Matrix& acc, const Matrix& m, double w) {
  for (std::size_t r = 0; r < acc.rows(); ++r)
    for (std::size_t c = 0; c < acc.cols(); ++c) acc(r, c) += w * m(r, c);
}

void scale_in_place(Matrix& m, double w) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) *= w;
}

struct ReplicateResult {
  bool ok = false;
  std::string error;
  std::vector<Vec> alpha;
  std::vector<Matrix> transient;
  Matrix jump;
  Matrix ptilde;
  Matrix moran;
  Matrix rel;    // (k-1) x (horizon+1)
  Matrix avail;  // k x (horizon+1)
  Vec mttf_v;    // per non-empty state; an unreachable empty state fails the replicate
};

}  // namespace

ReplicationReport replication_study(const PhTypeHmm& true_model, const ReplicationConfig& cfg) {
  if (cfg.replicates < 1) throw DataError("replication_study: need at least one replicate");

  const ExtendedHmm true_extended = expand_model(true_model);
  const std::size_t n0 =
      static_cast<std::size_t>(std::floor(cfg.capacity / cfg.omega));
  const InflowLaw true_law =
      marginal_inflow_law(true_extended, cfg.omega, n0, cfg.zero_band_edge);
  const MoranChain true_chain = moran_build(true_law, cfg.omega, cfg.capacity, cfg.max_states);
  const std::size_t k = true_chain.num_states();

  auto dependability = [&](const MoranChain& chain, Matrix& rel, Matrix& avail, Vec& mttf_v) {
    rel = Matrix(k - 1, static_cast<std::size_t>(cfg.horizon) + 1);
    avail = Matrix(k, static_cast<std::size_t>(cfg.horizon) + 1);
    mttf_v.assign(k - 1, 0.0);
    for (std::size_t v = 1; v < k; ++v) {
      for (long h = 0; h <= cfg.horizon; ++h)
        rel(v - 1, static_cast<std::size_t>(h)) = reliability(chain, v, h);
      mttf_v[v - 1] = mttf(chain, v);
    }
    for (std::size_t v = 0; v < k; ++v)
      for (long h = 0; h <= cfg.horizon; ++h)
        avail(v, static_cast<std::size_t>(h)) = availability(chain, v, h);
  };

  ReplicationReport report;
  dependability(true_chain, report.true_reliability, report.true_availability, report.true_mttf);
  report.true_moran = true_chain.p;

  std::vector<ReplicateResult> results(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    ReplicateResult& res = results[r];
    try {
      RandomStream rng = RandomStream::substream(cfg.seed, r);
      const SamplePath path = sample_path(true_model, cfg.path_length, rng);

      FitConfig fit_cfg = cfg.fit;
      fit_cfg.seed = derive_seed(cfg.seed, cfg.replicates + r);  // fit streams disjoint from paths
      fit_cfg.workers = 1;                                       // replicates already fan out
      if (cfg.warm_start_at_truth) {
        fit_cfg.initial_model = true_model;
        if (fit_cfg.phase_layout.empty()) fit_cfg.phase_layout = true_model.phase_layout();
        // Labels stay anchored to the truth's representation; reordering
        // phases would scramble the replicate averages.
        fit_cfg.canonicalize_phases = false;
      }
      const FitReport fitted = fit(path.signal, fit_cfg);

      res.alpha.reserve(fitted.model.num_regimes());
      res.transient.reserve(fitted.model.num_regimes());
      for (const auto& s : fitted.model.sojourn()) {
        res.alpha.push_back(s.alpha());
        res.transient.push_back(s.transient());
      }
      res.jump = fitted.model.jump();
      res.ptilde = fitted.extended.ptilde;

      const InflowLaw law = marginal_inflow_law(fitted.extended, cfg.omega, n0, cfg.zero_band_edge);
      const MoranChain chain = moran_build(law, cfg.omega, cfg.capacity, cfg.max_states);
      dependability(chain, res.rel, res.avail, res.mttf_v);
      res.moran = chain.p;
      res.ok = true;
    } catch (const std::exception& ex) {
      res.error = ex.what();
    }
  });

  const std::size_t d = true_model.num_regimes();
  report.mean_alpha.assign(d, Vec());
  report.mean_transient.assign(d, Matrix());
  report.mttf_samples.assign(k - 1, Vec());

  bool shapes_ready = false;
  for (const ReplicateResult& res : results) {
    if (!res.ok) {
      ++report.failed;
      report.failures.push_back(res.error);
      continue;
    }
    if (!shapes_ready) {
      for (std::size_t i = 0; i < d; ++i) {
        report.mean_alpha[i].assign(res.alpha[i].size(), 0.0);
        report.mean_transient[i] = zeros_like(res.transient[i].rows(), res.transient[i].cols());
      }
      report.mean_jump = zeros_like(res.jump.rows(), res.jump.cols());
      report.mean_ptilde = zeros_like(res.ptilde.rows(), res.ptilde.cols());
      report.mean_moran = zeros_like(k, k);
      report.mean_reliability = zeros_like(k - 1, static_cast<std::size_t>(cfg.horizon) + 1);
      report.mean_availability = zeros_like(k, static_cast<std::size_t>(cfg.horizon) + 1);
      report.mean_mttf.assign(k - 1, 0.0);
      shapes_ready = true;
    }
    ++report.completed;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t f = 0; f < res.alpha[i].size(); ++f)
        report.mean_alpha[i][f] += res.alpha[i][f];
      add_scaled(report.mean_transient[i], res.transient[i], 1.0);
    }
    if (res.jump.rows()) add_scaled(report.mean_jump, res.jump, 1.0);
    add_scaled(report.mean_ptilde, res.ptilde, 1.0);
    add_scaled(report.mean_moran, res.moran, 1.0);
    add_scaled(report.mean_reliability, res.rel, 1.0);
    add_scaled(report.mean_availability, res.avail, 1.0);
    for (std::size_t v = 0; v + 1 < k; ++v) {
      report.mean_mttf[v] += res.mttf_v[v];
      report.mttf_samples[v].push_back(res.mttf_v[v]);
    }
  }
  if (report.completed == 0)
    throw NumericError("replication_study: every replicate failed; first error: " +
                       (report.failures.empty() ? std::string("none") : report.failures.front()));

  const double inv = 1.0 / static_cast<double>(report.completed);
  for (std::size_t i = 0; i < d; ++i) {
    for (double& x : report.mean_alpha[i]) x *= inv;
    scale_in_place(report.mean_transient[i], inv);
  }
  scale_in_place(report.mean_jump, inv);
  scale_in_place(report.mean_ptilde, inv);
  scale_in_place(report.mean_moran, inv);
  scale_in_place(report.mean_reliability, inv);
  scale_in_place(report.mean_availability, inv);
  for (double& x : report.mean_mttf) x *= inv;
  return report;
}

double sample_quantile(Vec values, double level) {
  if (values.empty()) throw DataError("sample_quantile: empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw DataError("sample_quantile: level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = level * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

ForecastBands forecast(const PhTypeHmm& m, const ForecastConfig& cfg) {
  if (cfg.horizon < 1) throw DataError("forecast: horizon must be >= 1");
  if (cfg.replicates < 2) throw DataError("forecast: need at least two bootstrap paths");
  Vec levels = cfg.levels;
  std::sort(levels.begin(), levels.end());
  for (double q : levels)
    if (!(q > 0.0 && q < 1.0)) throw DataError("forecast: quantile levels must lie in (0,1)");

  const ExtendedHmm extended = expand_model(m);

  // Initial extended-state law: filtered terminal posterior of the history
  // when given (forecasting continues the observed series), beta~ otherwise
  // (the first forecast step is then the process start itself).
  Vec init;
  bool advance_before_first_emit = false;
  if (cfg.history) {
    const Trellis t = forward_pass(extended, *cfg.history);
    init = t.forward.row(cfg.history->size());
    advance_before_first_emit = true;
  } else {
    init = extended.beta_tilde;
  }

  std::vector<Vec> paths(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t b) {
    RandomStream rng = RandomStream::substream(cfg.seed, b);
    Vec row(extended.size());
    std::size_t s = rng.pick(init);
    Vec& signals = paths[b];
    signals.reserve(cfg.horizon);
    for (std::size_t h = 0; h < cfg.horizon; ++h) {
      if (h > 0 || advance_before_first_emit) {
        for (std::size_t c = 0; c < extended.size(); ++c) row[c] = extended.ptilde(s, c);
        s = rng.pick(row);
      }
      signals.push_back(emission_sample(extended.law_of_state(s), rng));
    }
  });

  ForecastBands bands;
  bands.horizon = cfg.horizon;
  bands.replicates = cfg.replicates;
  bands.seed = cfg.seed;
  bands.levels = levels;
  bands.mean.assign(cfg.horizon, 0.0);
  bands.quantiles.assign(levels.size(), Vec(cfg.horizon, 0.0));
  Vec column(cfg.replicates);
  for (std::size_t h = 0; h < cfg.horizon; ++h) {
    double acc = 0.0;
    for (std::size_t b = 0; b < cfg.replicates; ++b) {
      column[b] = paths[b][h];
      acc += paths[b][h];
    }
    bands.mean[h] = acc / static_cast<double>(cfg.replicates);
    for (std::size_t q = 0; q < levels.size(); ++q)
      bands.quantiles[q][h] = sample_quantile(column, levels[q]);
  }
  return bands;
}

}  // namespace phhmm
