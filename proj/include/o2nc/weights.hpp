#pragma once

// Exponential index weights p_{n,t} = beta^{n-t} (1-beta) / (1-beta^n) for
// t = 1..n: the witness distribution over trajectory indices.  Computed as
// normalized powers exp((n-t) * ln beta) with extended-precision
// accumulation, which equals the closed form exactly (geometric series) and
// keeps the mass summing to 1 up to per-element rounding even for beta close
// to 1 and n in the thousands.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "o2nc/vec.hpp"

namespace o2nc {

struct exp_weights_t {
  std::int64_t n = 0;
  double beta = 0.0;
  std::vector<double> p;  // p[t-1] = p_{n,t}

  double sum_extended() const {
    long double acc = 0.0L;
    for (double v : p) acc += v;
    return static_cast<double>(acc);
  }
};

inline exp_weights_t exp_weights(std::int64_t n, double beta) {
  if (n < 1) throw std::invalid_argument("exp_weights: n >= 1 required");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("exp_weights: beta must lie in (0, 1)");
  }
  const long double ln_b = logl(static_cast<long double>(beta));
  std::vector<long double> u(static_cast<std::size_t>(n));
  long double total = 0.0L;
  for (std::int64_t t = 1; t <= n; ++t) {
    const long double w = expl(static_cast<long double>(n - t) * ln_b);
    u[static_cast<std::size_t>(t - 1)] = w;
    total += w;
  }
  exp_weights_t out;
  out.n = n;
  out.beta = beta;
  out.p.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.p[i] = static_cast<double>(u[i] / total);
  }
  return out;
}

// Closed-form discounted average sum_t p_{n,t} x_t over the first n entries.
inline real_vector weighted_average(const std::vector<real_vector>& xs, std::int64_t n,
                                    double beta) {
  if (n < 1 || n > static_cast<std::int64_t>(xs.size())) {
    throw std::out_of_range("weighted_average: n out of range");
  }
  const exp_weights_t w = exp_weights(n, beta);
  real_vector out = zeros(xs[0].size());
  for (std::int64_t t = 1; t <= n; ++t) {
    axpy(w.p[static_cast<std::size_t>(t - 1)], xs[static_cast<std::size_t>(t - 1)], out);
  }
  return out;
}

}  // namespace o2nc
