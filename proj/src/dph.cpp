#include "phhmm/dph.hpp"

#include <cmath>
#include <sstream>

#include "phhmm/common.hpp"

namespace phhmm {

namespace {

void check_entry_range(double v, const char* what, std::size_t i, std::size_t j, bool is_vec) {
  if (std::isnan(v) || v < -kStochasticTol || v > 1.0 + kStochasticTol) {
    std::ostringstream os;
    os << "dph: " << what;
    if (is_vec)
      os << "[" << i << "]";
    else
      os << "(" << i << "," << j << ")";
    os << " = " << v << " outside [0,1]";
    throw DataError(os.str());
  }
}

}  // namespace

DiscretePhaseType DiscretePhaseType::validate(Vec alpha, Matrix t,
                                              std::vector<std::string>* warnings) {
  const std::size_t f = alpha.size();
  if (f < 1) throw DataError("dph: empty initial phase vector");
  if (t.rows() != f || t.cols() != f)
    throw DataError("dph: alpha has " + std::to_string(f) + " phases but T is " +
                    std::to_string(t.rows()) + "x" + std::to_string(t.cols()));

  for (std::size_t i = 0; i < f; ++i) {
    check_entry_range(alpha[i], "alpha", i, 0, true);
    if (alpha[i] < 0.0) alpha[i] = 0.0;
  }
  double asum = sum(alpha);
  if (std::abs(asum - 1.0) > kStochasticTol)
    throw DataError("dph: alpha sums to " + format_double_exact(asum) + ", expected 1");
  for (double& a : alpha) a /= asum;

  for (std::size_t i = 0; i < f; ++i) {
    double rsum = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      check_entry_range(t(i, j), "T", i, j, false);
      if (t(i, j) < 0.0) t(i, j) = 0.0;
      rsum += t(i, j);
    }
    if (rsum > 1.0 + kStochasticTol)
      throw DataError("dph: T row " + std::to_string(i) + " sums to " +
                      format_double_exact(rsum) + " > 1");
    if (rsum > 1.0)
      for (std::size_t j = 0; j < f; ++j) t(i, j) /= rsum;
  }

  DiscretePhaseType d(std::move(alpha), std::move(t));

  // Absorption must be certain from every reachable phase; equivalently
  // (I - T) restricted to reachable phases is invertible. EM can park mass-
  // less phases at zero exit, so those are tolerated with a warning.
  const std::vector<bool> reach = d.reachable_phases();
  std::size_t n_reach = 0;
  for (std::size_t i = 0; i < f; ++i) {
    if (reach[i]) {
      ++n_reach;
    } else if (warnings) {
      warnings->push_back("dph: phase " + std::to_string(i) +
                          " is unreachable (zero alpha mass and no inbound transition)");
    }
  }
  Matrix sys(n_reach, n_reach);
  std::vector<std::size_t> idx;
  idx.reserve(n_reach);
  for (std::size_t i = 0; i < f; ++i)
    if (reach[i]) idx.push_back(i);
  for (std::size_t a = 0; a < n_reach; ++a)
    for (std::size_t b = 0; b < n_reach; ++b)
      sys(a, b) = (a == b ? 1.0 : 0.0) - d.t_(idx[a], idx[b]);
  try {
    Vec x = solve(std::move(sys), Vec(n_reach, 1.0));
    for (double xi : x)
      if (!(xi > 0.0) || !std::isfinite(xi))
        throw NumericError("dph: nonpositive expected absorption time");
  } catch (const NumericError&) {
    throw DataError("dph: (I - T) is singular on the reachable phases; absorption is not certain");
  }
  return d;
}

Vec DiscretePhaseType::exit_vector() const {
  const std::size_t f = num_phases();
  Vec t0(f);
  for (std::size_t i = 0; i < f; ++i) {
    double v = 1.0 - t_.row_sum(i);
    if (v < 0.0) v = 0.0;  // row was renormalized to sum at most 1
    t0[i] = v;
  }
  return t0;
}

std::vector<bool> DiscretePhaseType::reachable_phases() const {
  const std::size_t f = num_phases();
  std::vector<bool> reach(f, false);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < f; ++i)
    if (alpha_[i] > 0.0) {
      reach[i] = true;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < f; ++j)
      if (t_(i, j) > 0.0 && !reach[j]) {
        reach[j] = true;
        stack.push_back(j);
      }
  }
  return reach;
}

double DiscretePhaseType::pmf(long n) const {
  if (n < 1) throw DataError("dph pmf: n must be >= 1");
  Vec v = alpha_;
  for (long step = 1; step < n; ++step) v = vec_mat(v, t_);
  return dot(v, exit_vector());
}

double DiscretePhaseType::cdf(long n) const {
  if (n < 0) throw DataError("dph cdf: n must be >= 0");
  Vec v = alpha_;
  for (long step = 0; step < n; ++step) v = vec_mat(v, t_);
  return 1.0 - sum(v);
}

Vec DiscretePhaseType::pmf_table(long n_max) const {
  const Vec t0 = exit_vector();
  Vec out;
  out.reserve(static_cast<std::size_t>(n_max));
  Vec v = alpha_;
  for (long n = 1; n <= n_max; ++n) {
    out.push_back(dot(v, t0));
    v = vec_mat(v, t_);
  }
  return out;
}

double DiscretePhaseType::mean() const {
  const std::vector<bool> reach = reachable_phases();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < num_phases(); ++i)
    if (reach[i]) idx.push_back(i);
  Matrix sys(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      sys(a, b) = (a == b ? 1.0 : 0.0) - t_(idx[a], idx[b]);
  Vec x;
  try {
    x = solve(std::move(sys), Vec(idx.size(), 1.0));
  } catch (const NumericError&) {
    throw NumericError("dph mean: (I - T) numerically singular");
  }
  double m = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) m += alpha_[idx[a]] * x[a];
  return m;
}

long DiscretePhaseType::sample(RandomStream& rng) const {
  const std::size_t f = num_phases();
  const Vec t0 = exit_vector();
  std::size_t phase = rng.pick(alpha_);
  long n = 1;
  std::vector<double> w(f + 1);
  for (;;) {
    for (std::size_t j = 0; j < f; ++j) w[j] = t_(phase, j);
    w[f] = t0[phase];
    const std::size_t next = rng.pick(w);
    if (next == f) return n;
    phase = next;
    ++n;
  }
}

DiscretePhaseType dph_degenerate_one_step() {
  return DiscretePhaseType::validate(Vec{1.0}, Matrix{{0.0}});
}

DiscretePhaseType dph_geometric(double success_prob) {
  return DiscretePhaseType::validate(Vec{1.0}, Matrix{{1.0 - success_prob}});
}

}  // namespace phhmm
