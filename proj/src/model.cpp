#include "phhmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phhmm/common.hpp"

namespace phhmm {

PhTypeHmm PhTypeHmm::validate(std::vector<std::string> regime_labels, Vec beta, Matrix jump,
                              std::vector<DiscretePhaseType> sojourn,
                              std::vector<EmissionLaw> emission,
                              std::vector<std::string>* warnings) {
  const std::size_t d = beta.size();
  if (d == 0) throw DataError("model: no regimes");
  if (regime_labels.empty()) {
    for (std::size_t i = 0; i < d; ++i) regime_labels.push_back(std::to_string(i + 1));
  }
  if (regime_labels.size() != d || sojourn.size() != d || emission.size() != d)
    throw DataError("model: labels, beta, sojourn and emission must all have one entry per regime");

  double bsum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (std::isnan(beta[i]) || beta[i] < -kStochasticTol || beta[i] > 1.0 + kStochasticTol)
      throw DataError("model: beta[" + std::to_string(i) + "] outside [0,1]");
    beta[i] = std::max(beta[i], 0.0);
    bsum += beta[i];
  }
  if (std::abs(bsum - 1.0) > kStochasticTol)
    throw DataError("model: beta sums to " + format_double_exact(bsum) + ", expected 1");
  for (double& b : beta) b /= bsum;

  if (d == 1) {
    if (jump.rows() != 0 && !(jump.rows() == 1 && jump.cols() == 1 && jump(0, 0) == 0.0))
      throw DataError("model: single-regime model must have an empty jump matrix");
    jump = Matrix();
  } else {
    if (jump.rows() != d || jump.cols() != d)
      throw DataError("model: jump matrix must be " + std::to_string(d) + "x" + std::to_string(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (jump(i, i) != 0.0)
        throw DataError("model: jump diagonal entry (" + std::to_string(i) + "," +
                        std::to_string(i) + ") must be exactly 0");
      double rsum = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = jump(i, j);
        if (std::isnan(v) || v < -kStochasticTol || v > 1.0 + kStochasticTol)
          throw DataError("model: jump(" + std::to_string(i) + "," + std::to_string(j) +
                          ") outside [0,1]");
        jump(i, j) = std::max(v, 0.0);
        rsum += jump(i, j);
      }
      if (std::abs(rsum - 1.0) > kStochasticTol)
        throw DataError("model: jump row " + std::to_string(i) + " sums to " +
                        format_double_exact(rsum) + ", expected 1");
      for (std::size_t j = 0; j < d; ++j) jump(i, j) /= rsum;
      jump(i, i) = 0.0;
    }
  }

  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::string> dph_warnings;
    sojourn[i] = DiscretePhaseType::validate(sojourn[i].alpha(), sojourn[i].transient(),
                                             &dph_warnings);
    if (warnings)
      for (auto& w : dph_warnings) warnings->push_back("regime " + regime_labels[i] + ": " + w);
    emission[i] = emission_validate(emission[i]);
  }

  const SignalKind kind = emission_kind(emission[0]);
  for (std::size_t i = 1; i < d; ++i) {
    if (emission_kind(emission[i]) != kind)
      throw DataError("model: emission law of regime " + regime_labels[i] +
                      " has a different signal domain kind than regime " + regime_labels[0]);
    if (kind == SignalKind::Categorical &&
        std::get<CategoricalEmission>(emission[i]).alphabet !=
            std::get<CategoricalEmission>(emission[0]).alphabet)
      throw DataError("model: categorical emissions must share one alphabet");
  }

  PhTypeHmm m;
  m.labels_ = std::move(regime_labels);
  m.beta_ = std::move(beta);
  m.jump_ = std::move(jump);
  m.sojourn_ = std::move(sojourn);
  m.emission_ = std::move(emission);
  m.kind_ = kind;
  return m;
}

std::vector<std::size_t> PhTypeHmm::phase_layout() const {
  std::vector<std::size_t> layout;
  layout.reserve(sojourn_.size());
  for (const auto& s : sojourn_) layout.push_back(s.num_phases());
  return layout;
}

std::size_t PhTypeHmm::extended_size() const {
  std::size_t n = 0;
  for (const auto& s : sojourn_) n += s.num_phases();
  return n;
}

double semi_markov_kernel(const PhTypeHmm& m, std::size_t i, std::size_t j, long n) {
  const std::size_t d = m.num_regimes();
  if (i >= d || j >= d) throw DataError("semi_markov_kernel: unknown regime index");
  if (n < 1) throw DataError("semi_markov_kernel: n must be >= 1");
  if (i == j || d == 1) return 0.0;
  return m.jump()(i, j) * m.sojourn()[i].pmf(n);
}

PhTypeHmm canonical_regime_order(const PhTypeHmm& m) {
  const std::size_t d = m.num_regimes();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return emission_mean(m.emission()[a]) < emission_mean(m.emission()[b]);
  });

  std::vector<std::string> labels(d);
  Vec beta(d);
  std::vector<DiscretePhaseType> sojourn;
  std::vector<EmissionLaw> emission;
  sojourn.reserve(d);
  emission.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    labels[i] = m.regime_labels()[order[i]];
    beta[i] = m.beta()[order[i]];
    sojourn.push_back(m.sojourn()[order[i]]);
    emission.push_back(m.emission()[order[i]]);
  }
  Matrix jump;
  if (d > 1) {
    jump = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) jump(i, j) = m.jump()(order[i], order[j]);
  }
  return PhTypeHmm::validate(std::move(labels), std::move(beta), std::move(jump),
                             std::move(sojourn), std::move(emission));
}

PhTypeHmm canonical_phase_order(const PhTypeHmm& m) {
  std::vector<DiscretePhaseType> sojourn;
  sojourn.reserve(m.num_regimes());
  for (const auto& s : m.sojourn()) {
    const std::size_t f = s.num_phases();
    std::vector<std::size_t> order(f);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (s.alpha()[a] != s.alpha()[b]) return s.alpha()[a] > s.alpha()[b];
      return s.transient()(a, a) > s.transient()(b, b);
    });
    Vec alpha(f);
    Matrix t(f, f);
    for (std::size_t a = 0; a < f; ++a) {
      alpha[a] = s.alpha()[order[a]];
      for (std::size_t b = 0; b < f; ++b) t(a, b) = s.transient()(order[a], order[b]);
    }
    sojourn.push_back(DiscretePhaseType::validate(std::move(alpha), std::move(t)));
  }
  return PhTypeHmm::validate(m.regime_labels(), m.beta(), m.jump(), std::move(sojourn),
                             m.emission());
}

}  // namespace phhmm
