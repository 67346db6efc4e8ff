#include "phhmm/rng.hpp"

#include <cmath>

#include "phhmm/common.hpp"

namespace phhmm {

std::size_t RandomStream::pick(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw NumericError("pick: weight vector has no mass");
  double u = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  // Rounding pushed u past the cumulative total: take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return weights.size() - 1;
}

long RandomStream::poisson(double lambda) {
  const double u = uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  long k = 0;
  while (u >= cdf && k < 100000000L) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

double RandomStream::exponential(double rate) {
  // -log(1-u)/rate; log1p keeps precision for small u.
  return -std::log1p(-uniform()) / rate;
}

}  // namespace phhmm
