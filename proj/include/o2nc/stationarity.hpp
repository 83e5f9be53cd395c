#pragma once

// Stationarity certificates and the reductions that interpret them.
//
// A certificate at index n evaluates one feasible witness distribution — the
// exponential weights over iterates x_1..x_n — of the variance-penalized
// stationarity measure:
//
//   total = | sum_t p_{n,t} grad F(x_t) |  +  c * sum_t p_{n,t} |x_t - xbar_n|^2,
//
// an upper bound on the measure's infimum over all witnesses.  The other
// entry points check, by direct computation, the inequalities that give the
// certificate meaning: the radial clipping construction (Goldstein
// stationarity), the smooth / second-order reductions, the exponential
// scaling identity, the variance-vs-update bound, and the lambda coefficient
// bound — each on concrete inputs, with zero tolerance beyond rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "o2nc/drivers.hpp"
#include "o2nc/problems.hpp"
#include "o2nc/rng.hpp"
#include "o2nc/vec.hpp"
#include "o2nc/weights.hpp"

namespace o2nc {

struct certificate {
  std::int64_t n = 0;
  double mean_grad_norm = 0.0;  // | sum_t p_{n,t} grad F(x_t) |
  double variance = 0.0;        // sum_t p_{n,t} |x_t - xbar_n|^2
  double c = 0.0;
  double total = 0.0;           // mean_grad_norm + c * variance
};

inline certificate certificate_value(const trajectory& traj, const problem& prob, double c,
                                     std::int64_t n) {
  if (n < 1 || n > traj.steps()) throw std::out_of_range("certificate_value: n out of range");
  if (!(c > 0.0)) throw std::invalid_argument("certificate_value: c must be > 0");
  const exp_weights_t w = exp_weights(n, traj.schedule.beta);

  real_vector mean_grad = zeros(traj.x[0].size());
  real_vector xbar = zeros(traj.x[0].size());
  for (std::int64_t t = 1; t <= n; ++t) {
    const double p = w.p[static_cast<std::size_t>(t - 1)];
    const real_vector& xt = traj.x[static_cast<std::size_t>(t - 1)];
    axpy(p, prob.gradient(xt), mean_grad);
    axpy(p, xt, xbar);
  }
  double variance = 0.0;
  for (std::int64_t t = 1; t <= n; ++t) {
    const double p = w.p[static_cast<std::size_t>(t - 1)];
    const double dist = distance(traj.x[static_cast<std::size_t>(t - 1)], xbar);
    variance += p * dist * dist;
  }

  certificate cert;
  cert.n = n;
  cert.mean_grad_norm = norm(mean_grad);
  cert.variance = variance;
  cert.c = c;
  cert.total = cert.mean_grad_norm + c * variance;
  return cert;
}

// Logarithmic index grid {1, 2, 4, ..., N} used by default wherever a
// certificate sweep over n is needed.
inline std::vector<std::int64_t> log_grid(std::int64_t n) {
  std::vector<std::int64_t> grid;
  for (std::int64_t v = 1; v < n; v *= 2) grid.push_back(v);
  if (n >= 1) grid.push_back(n);
  return grid;
}

inline std::vector<std::int64_t> full_grid(std::int64_t n) {
  std::vector<std::int64_t> grid(static_cast<std::size_t>(n));
  for (std::int64_t v = 1; v <= n; ++v) grid[static_cast<std::size_t>(v - 1)] = v;
  return grid;
}

// ---------------------------------------------------------------------------
// Radial clipping: push every witness point into the ball B(x, delta).
// ---------------------------------------------------------------------------
struct clipped_distribution {
  std::vector<real_vector> support;  // clipped points yhat_i
  std::vector<double> probs;
  real_vector center;                // x
  double delta = 0.0;
  real_vector clipped_mean;          // x' = E[yhat]
  double epsilon_prime = 0.0;        // (1 + 2G/(c*delta^2)) * epsilon
  double measured_mean_grad_norm = 0.0;  // | E grad F(yhat) |, for validation
};

// Clips the witness (support, probs) for center x at radius delta:
//   yhat = x + min(1, delta/|y - x|) (y - x),   factor 1 when y = x.
// epsilon is the certificate value the input witness attains at scale c; the
// returned epsilon_prime is the certified gradient bound at the clipped mean.
inline clipped_distribution goldstein_clip(const std::vector<real_vector>& support,
                                           const std::vector<double>& probs,
                                           const real_vector& x, double delta,
                                           const problem& prob, double c, double epsilon) {
  if (!(delta > 0.0)) throw std::invalid_argument("goldstein_clip: delta must be > 0");
  if (support.size() != probs.size() || support.empty()) {
    throw std::invalid_argument("goldstein_clip: support/probs size mismatch or empty");
  }
  if (!(c > 0.0)) throw std::invalid_argument("goldstein_clip: c must be > 0");
  double mass = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("goldstein_clip: negative probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) {
    throw std::invalid_argument("goldstein_clip: probabilities sum to " + std::to_string(mass));
  }

  clipped_distribution out;
  out.center = x;
  out.delta = delta;
  out.probs = probs;
  out.support.reserve(support.size());
  out.clipped_mean = zeros(x.size());
  real_vector mean_grad = zeros(x.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    const real_vector& y = support[i];
    require_same_dim(y, x, "goldstein_clip");
    const double dist = distance(y, x);
    const double factor = dist > delta ? delta / dist : 1.0;
    real_vector yhat = x;
    for (std::size_t j = 0; j < yhat.size(); ++j) yhat[j] += factor * (y[j] - x[j]);
    axpy(probs[i], yhat, out.clipped_mean);
    axpy(probs[i], prob.gradient(yhat), mean_grad);
    out.support.push_back(std::move(yhat));
  }
  out.measured_mean_grad_norm = norm(mean_grad);
  const double g_lip = prob.constants().lipschitz_g;
  out.epsilon_prime = (1.0 + 2.0 * g_lip / (c * delta * delta)) * epsilon;
  return out;
}

// ---------------------------------------------------------------------------
// Smooth / second-order reductions: wherever the certificate drops below
// epsilon at the matching scale c, the gradient at the witness mean must be
// at most 2*epsilon.
// ---------------------------------------------------------------------------
struct reduction_report {
  std::string branch;  // "smooth" (c = H^2/eps) or "second_order" (c = rho/2)
  double c = 0.0;
  double epsilon = 0.0;
  std::int64_t checked = 0;
  std::int64_t qualifying = 0;  // indices with certificate total <= epsilon
  std::int64_t violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max |grad|-2eps
  std::vector<std::int64_t> violating_n;

  bool passed() const { return violations == 0; }
};

inline reduction_report reduction_check_branch(const trajectory& traj, const problem& prob,
                                               double epsilon, double c,
                                               const std::string& branch,
                                               const std::vector<std::int64_t>& grid) {
  reduction_report rep;
  rep.branch = branch;
  rep.c = c;
  rep.epsilon = epsilon;
  for (std::int64_t n : grid) {
    ++rep.checked;
    const certificate cert = certificate_value(traj, prob, c, n);
    if (cert.total <= epsilon) {
      ++rep.qualifying;
      const real_vector xbar = weighted_average(traj.x, n, traj.schedule.beta);
      const double grad_norm = norm(prob.gradient(xbar));
      rep.worst_excess = std::max(rep.worst_excess, grad_norm - 2.0 * epsilon);
      if (grad_norm > 2.0 * epsilon) {
        ++rep.violations;
        rep.violating_n.push_back(n);
      }
    }
  }
  return rep;
}

// Runs every branch the problem's constants support: the smooth branch when
// H is advertised and the second-order branch when rho is advertised.
inline std::vector<reduction_report> smooth_reduction_check(
    const trajectory& traj, const problem& prob, double epsilon,
    const std::vector<std::int64_t>& grid) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("smooth_reduction_check: epsilon > 0");
  const problem_constants& k = prob.constants();
  if (!k.smooth_h && !k.second_order_rho) {
    throw std::invalid_argument("smooth_reduction_check: problem advertises neither H nor rho");
  }
  std::vector<reduction_report> reports;
  if (k.smooth_h) {
    const double h = *k.smooth_h;
    reports.push_back(reduction_check_branch(traj, prob, epsilon, h * h / epsilon, "smooth", grid));
  }
  if (k.second_order_rho) {
    reports.push_back(
        reduction_check_branch(traj, prob, epsilon, *k.second_order_rho / 2.0, "second_order", grid));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Lambda coefficients and their summed bound, by the literal double sum.
// ---------------------------------------------------------------------------
inline double lambda_brute_force(int n, int t, double beta, int n_max) {
  if (!(1 <= t && t <= n && n <= n_max && n_max <= 200)) {
    throw std::out_of_range("lambda_brute_force: need 1 <= t <= n <= N <= 200");
  }
  const exp_weights_t w = exp_weights(n, beta);
  long double acc = 0.0L;
  for (int i = t; i <= n; ++i) {
    for (int ip = 1; ip <= t - 1; ++ip) {
      acc += static_cast<long double>(w.p[static_cast<std::size_t>(i - 1)]) *
             w.p[static_cast<std::size_t>(ip - 1)] * (i - ip);
    }
  }
  return static_cast<double>(4.0L * acc);
}

struct lambda_report {
  double beta = 0.0;
  int n_max = 0;
  double bound = 0.0;       // 12 / (1-beta)^2
  double worst_sum = 0.0;   // max_t sum_{n=t}^N lambda_{n,t}
  int worst_t = 0;
  std::int64_t violations = 0;

  bool passed() const { return violations == 0; }
};

inline lambda_report lambda_bound_check(double beta, int n_max) {
  if (n_max < 1 || n_max > 200) throw std::out_of_range("lambda_bound_check: N in [1, 200]");
  lambda_report rep;
  rep.beta = beta;
  rep.n_max = n_max;
  rep.bound = 12.0 / ((1.0 - beta) * (1.0 - beta));
  for (int t = 1; t <= n_max; ++t) {
    long double sum = 0.0L;
    for (int n = t; n <= n_max; ++n) sum += lambda_brute_force(n, t, beta, n_max);
    if (static_cast<double>(sum) > rep.worst_sum) {
      rep.worst_sum = static_cast<double>(sum);
      rep.worst_t = t;
    }
    if (static_cast<double>(sum) > rep.bound) ++rep.violations;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Variance-vs-update bound on a set of same-config trajectories.
// ---------------------------------------------------------------------------
struct variance_report {
  int seeds = 0;
  double beta = 0.0;
  // (a) per-realization convexity step, on sampled (trajectory, n) pairs:
  //     sum_t p_{n,t} |x_t - xbar_n|^2 <= 2 sum_{i>i'} p_{n,i} p_{n,i'} |x_i - x_{i'}|^2
  std::int64_t convexity_checked = 0;
  std::int64_t convexity_violations = 0;
  double convexity_worst_ratio = 0.0;  // max lhs/rhs over checked pairs
  // (b) seed-averaged Monte Carlo bound:
  //     mean_seeds sum_n (witness variance at n) <= (12/(1-beta)^2) *
  //     mean_seeds sum_n |Delta_n|^2, up to 3 standard errors of the gap
  double mc_lhs_mean = 0.0;
  double mc_rhs_mean = 0.0;
  double mc_gap_mean = 0.0;  // mean of (lhs_i - rhs_i) over seeds
  double mc_gap_se = 0.0;
  bool mc_pass = false;

  bool passed() const { return convexity_violations == 0 && mc_pass; }
};

namespace detail {

inline double witness_variance(const trajectory& traj, const exp_weights_t& w) {
  const std::int64_t n = w.n;
  real_vector xbar = zeros(traj.x[0].size());
  for (std::int64_t t = 1; t <= n; ++t) {
    axpy(w.p[static_cast<std::size_t>(t - 1)], traj.x[static_cast<std::size_t>(t - 1)], xbar);
  }
  double acc = 0.0;
  for (std::int64_t t = 1; t <= n; ++t) {
    const double dist = distance(traj.x[static_cast<std::size_t>(t - 1)], xbar);
    acc += w.p[static_cast<std::size_t>(t - 1)] * dist * dist;
  }
  return acc;
}

inline double pairwise_bound(const trajectory& traj, const exp_weights_t& w) {
  const std::int64_t n = w.n;
  double acc = 0.0;
  for (std::int64_t i = 2; i <= n; ++i) {
    for (std::int64_t ip = 1; ip < i; ++ip) {
      const double dist = distance(traj.x[static_cast<std::size_t>(i - 1)],
                                   traj.x[static_cast<std::size_t>(ip - 1)]);
      acc += w.p[static_cast<std::size_t>(i - 1)] * w.p[static_cast<std::size_t>(ip - 1)] *
             dist * dist;
    }
  }
  return 2.0 * acc;
}

}  // namespace detail

inline variance_report variance_bound_check(const std::vector<trajectory>& trajs,
                                            int pairs_per_trajectory, random_stream sampler,
                                            int min_seeds = 200) {
  if (static_cast<int>(trajs.size()) < min_seeds) {
    throw std::invalid_argument("variance_bound_check: need >= " + std::to_string(min_seeds) +
                                " seeds, got " + std::to_string(trajs.size()));
  }
  variance_report rep;
  rep.seeds = static_cast<int>(trajs.size());
  rep.beta = trajs[0].schedule.beta;

  // (a) convexity step on sampled (trajectory, n) pairs.
  for (const trajectory& traj : trajs) {
    for (int k = 0; k < pairs_per_trajectory; ++k) {
      const std::int64_t n =
          1 + static_cast<std::int64_t>(sampler.uniform_below(static_cast<std::uint64_t>(traj.steps())));
      const exp_weights_t w = exp_weights(n, rep.beta);
      const double lhs = detail::witness_variance(traj, w);
      const double rhs = detail::pairwise_bound(traj, w);
      ++rep.convexity_checked;
      if (rhs > 0.0) rep.convexity_worst_ratio = std::max(rep.convexity_worst_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12) + 1e-15) ++rep.convexity_violations;
    }
  }

  // (b) Monte Carlo mean over seeds, full sum over n.
  const double factor = 12.0 / ((1.0 - rep.beta) * (1.0 - rep.beta));
  std::vector<double> gaps;
  gaps.reserve(trajs.size());
  double lhs_total = 0.0, rhs_total = 0.0;
  for (const trajectory& traj : trajs) {
    double lhs_i = 0.0;
    for (std::int64_t n = 1; n <= traj.steps(); ++n) {
      lhs_i += detail::witness_variance(traj, exp_weights(n, rep.beta));
    }
    double rhs_i = 0.0;
    for (std::int64_t n = 1; n <= traj.steps(); ++n) {
      rhs_i += factor * squared_norm(traj.delta[static_cast<std::size_t>(n - 1)]);
    }
    lhs_total += lhs_i;
    rhs_total += rhs_i;
    gaps.push_back(lhs_i - rhs_i);
  }
  const double k = static_cast<double>(gaps.size());
  rep.mc_lhs_mean = lhs_total / k;
  rep.mc_rhs_mean = rhs_total / k;
  double gap_mean = 0.0;
  for (double gap : gaps) gap_mean += gap;
  gap_mean /= k;
  double gap_var = 0.0;
  for (double gap : gaps) gap_var += (gap - gap_mean) * (gap - gap_mean);
  gap_var /= (k > 1.0 ? k - 1.0 : 1.0);
  rep.mc_gap_mean = gap_mean;
  rep.mc_gap_se = std::sqrt(gap_var / k);
  rep.mc_pass = gap_mean <= 3.0 * rep.mc_gap_se;
  return rep;
}

// ---------------------------------------------------------------------------
// Exponential scaling identity: E_s[F(x + s Delta) - F(x)] equals
// E_s[<grad F(x + s Delta), Delta>] for s ~ Exp(1).  Checked by
// common-random-number Monte Carlo on the per-sample differences.
// ---------------------------------------------------------------------------
struct scaling_identity_report {
  long samples = 0;
  double lhs_mean = 0.0;
  double rhs_mean = 0.0;
  double gap_mean = 0.0;  // mean of per-sample (lhs_i - rhs_i)
  double gap_se = 0.0;
  bool pass = false;      // |gap_mean| <= 3 * gap_se (exact zero when se = 0)
};

inline scaling_identity_report exp_scaling_identity_mc(const problem& prob, const real_vector& x,
                                                       const real_vector& delta, long samples,
                                                       random_stream stream) {
  if (samples < 10000) throw std::invalid_argument("exp_scaling_identity_mc: samples >= 1e4");
  require_same_dim(x, delta, "exp_scaling_identity_mc");
  const double fx = prob.value(x);
  scaling_identity_report rep;
  rep.samples = samples;
  double mean = 0.0, m2 = 0.0, lhs_sum = 0.0, rhs_sum = 0.0;
  real_vector y(x.size());
  for (long i = 1; i <= samples; ++i) {
    const double s = stream.exponential();
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = x[j] + s * delta[j];
    const double lhs = prob.value(y) - fx;
    const double rhs = dot(prob.gradient(y), delta);
    lhs_sum += lhs;
    rhs_sum += rhs;
    const double gap = lhs - rhs;
    const double d1 = gap - mean;
    mean += d1 / static_cast<double>(i);
    m2 += d1 * (gap - mean);
  }
  rep.lhs_mean = lhs_sum / static_cast<double>(samples);
  rep.rhs_mean = rhs_sum / static_cast<double>(samples);
  rep.gap_mean = mean;
  const double var = m2 / static_cast<double>(samples - 1);
  rep.gap_se = std::sqrt(var / static_cast<double>(samples));
  rep.pass = rep.gap_se > 0.0 ? std::abs(rep.gap_mean) <= 3.0 * rep.gap_se
                              : rep.gap_mean == 0.0;
  return rep;
}

}  // namespace o2nc
