#include "phhmm/reservoir.hpp"

#include <algorithm>
#include <cmath>

#include "phhmm/common.hpp"

namespace phhmm {

double InflowLaw::above(std::size_t m) const {
  if (m > bins.size()) throw DataError("inflow law: tail requested beyond the binned range");
  double below = zero_mass;
  for (std::size_t j = 0; j < m; ++j) below += bins[j];
  return 1.0 - below;
}

MoranChain MoranChain::from_matrix(Matrix p, double omega, double capacity) {
  const std::size_t k = p.rows();
  if (k < 2 || p.cols() != k) throw DataError("moran: matrix must be square with >= 2 states");
  for (std::size_t r = 0; r < k; ++r) {
    if (std::abs(p.row_sum(r) - 1.0) > 1e-10)
      throw DataError("moran: row " + std::to_string(r) + " sums to " +
                      format_double_exact(p.row_sum(r)));
    for (std::size_t c = 0; c < k; ++c) {
      if (p(r, c) < 0.0) throw DataError("moran: negative transition probability");
      if (c + 1 < r && p(r, c) != 0.0)
        throw DataError("moran: level cannot drop more than one state per year (entry " +
                        std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }
  MoranChain chain;
  chain.omega = omega;
  chain.capacity = capacity;
  chain.n0 = omega > 0.0 ? static_cast<std::size_t>(std::floor(capacity / omega)) : 0;
  chain.p = std::move(p);
  return chain;
}

namespace {

// Strongly connected components by iterative Tarjan; used to find the
// recurrent (closed) classes of the support graph.
std::vector<std::size_t> scc_components(const Matrix& p, std::size_t& n_comp) {
  const std::size_t n = p.rows();
  std::vector<std::size_t> comp(n, SIZE_MAX), low(n), num(n, SIZE_MAX), stack;
  std::vector<bool> on_stack(n, false);
  std::size_t counter = 0;
  n_comp = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_child;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (num[root] != SIZE_MAX) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    while (!call.empty()) {
      Frame& fr = call.back();
      const std::size_t v = fr.v;
      if (fr.next_child == 0) {
        num[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (fr.next_child < n) {
        const std::size_t w = fr.next_child++;
        if (p(v, w) <= 0.0) continue;
        if (num[w] == SIZE_MAX) {
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], num[w]);
      }
      if (descended) continue;
      if (low[v] == num[v]) {
        for (;;) {
          const std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = n_comp;
          if (w == v) break;
        }
        ++n_comp;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comp;
}

}  // namespace

Vec stationary_law(const ExtendedHmm& e) {
  extended_validate(e);
  const std::size_t n = e.size();
  std::size_t n_comp = 0;
  const std::vector<std::size_t> comp = scc_components(e.ptilde, n_comp);

  // A class is recurrent iff no edge leaves it.
  std::vector<bool> closed(n_comp, true);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w)
      if (e.ptilde(v, w) > 0.0 && comp[w] != comp[v]) closed[comp[v]] = false;

  std::size_t recurrent = SIZE_MAX;
  for (std::size_t c = 0; c < n_comp; ++c) {
    if (!closed[c]) continue;
    if (recurrent != SIZE_MAX)
      throw NumericError(
          "stationary_law: chain has several recurrent classes; the stationary law is not unique");
    recurrent = c;
  }
  if (recurrent == SIZE_MAX) throw NumericError("stationary_law: no recurrent class found");

  std::vector<std::size_t> members;
  for (std::size_t v = 0; v < n; ++v)
    if (comp[v] == recurrent) members.push_back(v);

  Matrix sub(members.size(), members.size());
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = 0; b < members.size(); ++b) sub(a, b) = e.ptilde(members[a], members[b]);

  const Vec pi_sub = solve_stationary(sub);
  Vec pi(n, 0.0);
  for (std::size_t a = 0; a < members.size(); ++a) pi[members[a]] = pi_sub[a];
  return pi;
}

InflowLaw marginal_inflow_law(const ExtendedHmm& e, double omega, std::size_t n0,
                              double zero_band_edge) {
  if (!(omega > 0.0)) throw DataError("marginal_inflow_law: omega must be positive");
  const Vec pi = stationary_law(e);
  const Vec regime_mass = e.aggregate_by_regime(pi);

  InflowLaw law;
  law.omega = omega;
  law.bins.assign(n0, 0.0);
  for (std::size_t i = 0; i < e.num_regimes(); ++i) {
    const double w = regime_mass[i];
    if (w == 0.0) continue;
    const EmissionLaw& g = e.emission[i];
    const double zero = emission_zero_mass(g, zero_band_edge);
    law.zero_mass += w * zero;
    for (std::size_t k = 0; k < n0; ++k) {
      const double lo = k == 0 ? zero : emission_cdf(g, double(k) * omega);
      const double hi = emission_cdf(g, double(k + 1) * omega);
      law.bins[k] += w * std::max(hi - lo, 0.0);
    }
    law.tail += w * (1.0 - emission_cdf(g, double(n0) * omega));
  }
  return law;
}

MoranChain moran_build(const InflowLaw& law, double omega, double capacity,
                       std::optional<std::size_t> max_states) {
  if (!(omega > 0.0)) throw DataError("moran_build: omega must be positive");
  if (capacity < omega) throw DataError("moran_build: capacity must be at least omega");
  if (law.omega != omega)
    throw DataError("moran_build: inflow law was binned for a different release volume");
  const std::size_t n0 = static_cast<std::size_t>(std::floor(capacity / omega));
  if (law.n0() < n0)
    throw DataError("moran_build: inflow law has " + std::to_string(law.n0()) +
                    " bins, need " + std::to_string(n0));

  std::size_t k = n0 + 1;
  if (max_states) {
    if (*max_states < 2) throw DataError("moran_build: need at least 2 states");
    k = std::min(k, *max_states);
  }

  Matrix p(k, k);
  // Row 0 merges the zero band into the first bracket (an empty reservoir
  // that receives up to omega stays empty); later rows put the zero band on
  // the subdiagonal and shift the brackets right. The last column pools the
  // whole upper tail.
  p(0, 0) = law.zero_mass + law.bins[0];
  for (std::size_t c = 1; c + 1 < k; ++c) p(0, c) = law.bins[c];
  p(0, k - 1) = law.above(k - 1);
  for (std::size_t r = 1; r < k; ++r) {
    p(r, r - 1) = law.zero_mass;
    for (std::size_t c = r; c + 1 < k; ++c) p(r, c) = law.bins[c - r];
    p(r, k - 1) = law.above(k - 1 - r);
  }

  MoranChain chain;
  chain.omega = omega;
  chain.capacity = capacity;
  chain.n0 = n0;
  chain.p = std::move(p);
  return chain;
}

namespace {

Matrix survival_block(const MoranChain& c) {
  const std::size_t k = c.num_states();
  Matrix p0(k - 1, k - 1);
  for (std::size_t r = 1; r < k; ++r)
    for (std::size_t col = 1; col < k; ++col) p0(r - 1, col - 1) = c.p(r, col);
  return p0;
}

}  // namespace

double reliability(const MoranChain& c, std::size_t v, long n) {
  if (v == 0 || v >= c.num_states())
    throw DataError("reliability: initial state must be a non-empty reservoir state");
  if (n < 0) throw DataError("reliability: horizon must be >= 0");
  const Matrix p0 = survival_block(c);
  Vec row(p0.rows(), 0.0);
  row[v - 1] = 1.0;
  for (long step = 0; step < n; ++step) row = vec_mat(row, p0);
  return sum(row);
}

double availability(const MoranChain& c, std::size_t v, long n) {
  if (v >= c.num_states()) throw DataError("availability: unknown state");
  if (n < 0) throw DataError("availability: horizon must be >= 0");
  Vec row(c.num_states(), 0.0);
  row[v] = 1.0;
  for (long step = 0; step < n; ++step) row = vec_mat(row, c.p);
  return 1.0 - row[0];
}

double mttf(const MoranChain& c, std::size_t v) {
  if (v == 0 || v >= c.num_states())
    throw DataError("mttf: initial state must be a non-empty reservoir state");
  // Empty must be reachable from v, otherwise the expectation diverges.
  const std::size_t k = c.num_states();
  std::vector<bool> seen(k, false);
  std::vector<std::size_t> stack{v};
  seen[v] = true;
  bool reaches_empty = false;
  while (!stack.empty() && !reaches_empty) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t t = 0; t < k; ++t) {
      if (c.p(s, t) <= 0.0 || seen[t]) continue;
      if (t == 0) {
        reaches_empty = true;
        break;
      }
      seen[t] = true;
      stack.push_back(t);
    }
  }
  if (!reaches_empty)
    throw NumericError("mttf: the empty state is unreachable from state " + std::to_string(v) +
                       "; the mean time to failure is infinite");
  const Vec times = fundamental_row_sums(survival_block(c));
  return times[v - 1];
}

BalanceAudit balance_audit(double v0, const Vec& inflows, const Vec& outflows, const Vec& recorded,
                           double c1) {
  const std::size_t n = inflows.size();
  if (outflows.size() != n || recorded.size() != n)
    throw DataError("balance_audit: inflow, outflow and recorded series must have equal length");
  if (!(c1 > 0.0)) throw DataError("balance_audit: capacity must be positive");
  if (v0 < 0.0 || v0 > c1) throw DataError("balance_audit: initial volume outside [0, capacity]");
  for (std::size_t i = 0; i < n; ++i) {
    if (inflows[i] < 0.0)
      throw DataError("balance_audit: negative inflow at index " + std::to_string(i));
    if (outflows[i] < 0.0)
      throw DataError("balance_audit: negative outflow at index " + std::to_string(i));
  }

  BalanceAudit audit;
  audit.computed.resize(n);
  audit.recorded = recorded;
  audit.discrepancy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = i == 0 ? v0 : recorded[i - 1];
    const double balance = prev + inflows[i] - outflows[i];
    audit.computed[i] = std::min(std::max(balance, 0.0), c1);
    audit.discrepancy[i] = audit.computed[i] - recorded[i];
  }
  return audit;
}

}  // namespace phhmm
