#pragma once

// Dense real vectors and the handful of BLAS-1 style operations the rest of
// the library needs.  Everything is plain std::vector<double>; dimensions are
// small (desk scale), so no expression templates or external linear algebra.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace o2nc {

using real_vector = std::vector<double>;

inline real_vector zeros(std::size_t d) { return real_vector(d, 0.0); }

inline void require_same_dim(const real_vector& a, const real_vector& b,
                             const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

inline double dot(const real_vector& a, const real_vector& b) {
  require_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double squared_norm(const real_vector& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

inline double norm(const real_vector& a) { return std::sqrt(squared_norm(a)); }

// y += a * x
inline void axpy(double a, const real_vector& x, real_vector& y) {
  require_same_dim(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline real_vector scaled(const real_vector& x, double a) {
  real_vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i];
  return out;
}

inline real_vector add(const real_vector& a, const real_vector& b) {
  require_same_dim(a, b, "add");
  real_vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline real_vector sub(const real_vector& a, const real_vector& b) {
  require_same_dim(a, b, "sub");
  real_vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double distance(const real_vector& a, const real_vector& b) {
  require_same_dim(a, b, "distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

inline bool all_finite(const real_vector& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// API-boundary guard: every vector crossing a module boundary must be finite.
inline void require_finite(const real_vector& a, const char* what) {
  if (!all_finite(a)) {
    throw std::domain_error(std::string(what) + ": non-finite component");
  }
}

}  // namespace o2nc
