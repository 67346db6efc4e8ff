#include "phhmm/expand.hpp"

#include <cmath>

#include "phhmm/common.hpp"

namespace phhmm {

std::vector<std::size_t> ExtendedHmm::phase_layout() const {
  std::vector<std::size_t> layout(num_regimes(), 0);
  for (const auto& [regime, phase] : labels) layout[regime] = std::max(layout[regime], phase + 1);
  return layout;
}

std::vector<std::size_t> ExtendedHmm::block_offsets() const {
  std::vector<std::size_t> offsets;
  offsets.reserve(num_regimes());
  std::size_t pos = 0;
  for (std::size_t f : phase_layout()) {
    offsets.push_back(pos);
    pos += f;
  }
  return offsets;
}

Vec ExtendedHmm::aggregate_by_regime(const Vec& v) const {
  Vec out(num_regimes(), 0.0);
  for (std::size_t s = 0; s < size(); ++s) out[regime_of(s)] += v[s];
  return out;
}

void extended_validate(const ExtendedHmm& e) {
  const std::size_t n = e.size();
  if (e.ptilde.rows() != n || e.ptilde.cols() != n || e.beta_tilde.size() != n)
    throw DataError("extended model: inconsistent dimensions");
  if (e.emission.empty()) throw DataError("extended model: no emission laws");
  for (std::size_t r = 0; r < n; ++r) {
    if (std::abs(e.ptilde.row_sum(r) - 1.0) > 1e-10)
      throw DataError("extended model: row " + std::to_string(r) + " sums to " +
                      format_double_exact(e.ptilde.row_sum(r)));
    for (std::size_t c = 0; c < n; ++c)
      if (e.ptilde(r, c) < 0.0)
        throw DataError("extended model: negative transition probability");
  }
  if (std::abs(sum(e.beta_tilde) - 1.0) > 1e-10)
    throw DataError("extended model: initial law does not sum to 1");
}

ExtendedHmm expand_model(const PhTypeHmm& m) {
  const std::size_t d = m.num_regimes();
  const auto layout = m.phase_layout();
  const std::size_t n = m.extended_size();

  ExtendedHmm e;
  e.labels.reserve(n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t f = 0; f < layout[i]; ++f) e.labels.emplace_back(i, f);
  e.ptilde = Matrix(n, n);
  e.beta_tilde.resize(n);
  e.emission = m.emission();

  const auto offsets = e.block_offsets();
  for (std::size_t i = 0; i < d; ++i) {
    const auto& dph = m.sojourn()[i];
    const Vec exit = dph.exit_vector();
    const std::size_t oi = offsets[i];

    for (std::size_t f = 0; f < layout[i]; ++f) {
      e.beta_tilde[oi + f] = m.beta()[i] * dph.alpha()[f];
      for (std::size_t k = 0; k < layout[i]; ++k)
        e.ptilde(oi + f, oi + k) = dph.transient()(f, k);
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (j == i && d > 1) continue;
      // For d == 1 the sojourn restarts in the same regime, so the "jump"
      // re-enters block i with probability 1.
      const double pij = (d == 1) ? 1.0 : m.jump()(i, j);
      if (pij == 0.0) continue;
      const auto& alpha_j = m.sojourn()[j].alpha();
      const std::size_t oj = offsets[j];
      for (std::size_t f = 0; f < layout[i]; ++f)
        for (std::size_t k = 0; k < layout[j]; ++k)
          e.ptilde(oi + f, oj + k) += exit[f] * pij * alpha_j[k];
    }
  }
  return e;
}

PhTypeHmm collapse_parameters(const ExtendedHmm& e, const std::vector<std::size_t>& phase_layout,
                              std::vector<std::string> regime_labels,
                              std::vector<EmissionLaw> emission_override,
                              AlphaRecovery recovery) {
  const std::size_t d = phase_layout.size();
  std::size_t n = 0;
  for (std::size_t f : phase_layout) {
    if (f == 0) throw DataError("collapse: phase layout entry must be >= 1");
    n += f;
  }
  if (n != e.size())
    throw DataError("collapse: phase layout covers " + std::to_string(n) + " states, matrix has " +
                    std::to_string(e.size()));

  std::vector<std::size_t> offsets(d);
  for (std::size_t i = 1; i < d; ++i) offsets[i] = offsets[i - 1] + phase_layout[i - 1];

  std::vector<EmissionLaw> emission =
      emission_override.empty() ? e.emission : std::move(emission_override);
  if (emission.size() != d) throw DataError("collapse: one emission law per regime required");

  // Initial regime law: block sums of beta~.
  Vec beta(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t f = 0; f < phase_layout[i]; ++f) beta[i] += e.beta_tilde[offsets[i] + f];

  // Diagonal blocks are the transient matrices.
  std::vector<Matrix> t_blocks;
  t_blocks.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    Matrix t(phase_layout[i], phase_layout[i]);
    for (std::size_t f = 0; f < phase_layout[i]; ++f)
      for (std::size_t k = 0; k < phase_layout[i]; ++k) {
        double v = e.ptilde(offsets[i] + f, offsets[i] + k);
        if (v < 0.0) {
          if (v < -1e-9) throw NumericError("collapse: negative transient entry beyond tolerance");
          v = 0.0;
        }
        t(f, k) = v;
      }
    t_blocks.push_back(std::move(t));
  }

  if (d == 1) {
    // With one regime the off-diagonal mass folds into the diagonal block,
    // so (alpha, T) is not identifiable; the sojourn law is irrelevant to
    // the process and a one-step placeholder is used.
    std::vector<DiscretePhaseType> sojourn;
    Vec alpha(phase_layout[0], 0.0);
    alpha[0] = 1.0;
    sojourn.push_back(
        DiscretePhaseType::validate(alpha, Matrix(phase_layout[0], phase_layout[0])));
    return PhTypeHmm::validate(std::move(regime_labels), std::move(beta), Matrix(),
                               std::move(sojourn), std::move(emission));
  }

  // Off-diagonal block mass: rowmass(i,j) = sum of B_ij, plus the column
  // masses of each destination regime under the chosen recovery rule.
  const bool row_avg = recovery == AlphaRecovery::RowAveraged;
  Matrix rowmass(d, d);
  std::vector<Vec> colmass(d);
  for (std::size_t j = 0; j < d; ++j) colmass[j].assign(phase_layout[j], 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      for (std::size_t f = 0; f < phase_layout[i]; ++f) {
        double block_row = 0.0;
        for (std::size_t k = 0; k < phase_layout[j]; ++k) {
          const double v = e.ptilde(offsets[i] + f, offsets[j] + k);
          if (v < -1e-9) throw NumericError("collapse: negative off-diagonal entry");
          rowmass(i, j) += std::max(v, 0.0);
          block_row += std::max(v, 0.0);
        }
        for (std::size_t k = 0; k < phase_layout[j]; ++k) {
          const double v = std::max(e.ptilde(offsets[i] + f, offsets[j] + k), 0.0);
          colmass[j][k] += row_avg ? (block_row > 0.0 ? v / block_row : 0.0) : v;
        }
      }
    }

  Matrix jump(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const double total = rowmass.row_sum(i);
    if (total <= 0.0) {
      // No mass ever leaves regime i. Legal only if its exit vector is
      // numerically zero too; otherwise the matrix is inconsistent.
      double exit_mass = 0.0;
      for (std::size_t f = 0; f < phase_layout[i]; ++f)
        exit_mass += 1.0 - t_blocks[i].row_sum(f);
      if (exit_mass > 1e-9)
        throw NumericError("collapse: regime " + std::to_string(i) +
                           " has exit probability but no off-diagonal mass");
      // Absorbing regime: spread the jump row uniformly so the matrix stays
      // stochastic; it is never used.
      for (std::size_t j = 0; j < d; ++j) jump(i, j) = (j == i) ? 0.0 : 1.0 / double(d - 1);
    } else {
      for (std::size_t j = 0; j < d; ++j) jump(i, j) = (j == i) ? 0.0 : rowmass(i, j) / total;
    }
  }

  std::vector<DiscretePhaseType> sojourn;
  sojourn.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    Vec alpha = colmass[j];
    if (recovery == AlphaRecovery::InitialLaw)
      for (std::size_t k = 0; k < phase_layout[j]; ++k)
        alpha[k] = e.beta_tilde[offsets[j] + k];
    const double total = sum(alpha);
    if (total <= 0.0) {
      // Regime never entered from elsewhere; fall back to the initial-law
      // block, and to a point mass on the first phase as a last resort.
      for (std::size_t k = 0; k < phase_layout[j]; ++k)
        alpha[k] = e.beta_tilde[offsets[j] + k];
      if (sum(alpha) <= 0.0) alpha[0] = 1.0;
    }
    const double norm = sum(alpha);
    for (double& a : alpha) a /= norm;
    sojourn.push_back(DiscretePhaseType::validate(std::move(alpha), t_blocks[j]));
  }

  return PhTypeHmm::validate(std::move(regime_labels), std::move(beta), std::move(jump),
                             std::move(sojourn), std::move(emission));
}

}  // namespace phhmm
