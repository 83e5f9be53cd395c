#pragma once

// Optimizer drivers.  All four algorithms write a common trajectory record:
//
//   eo2nc      exponentiated online-to-non-convex conversion: the update
//              comes from an online learner, gets scaled by s_t ~ Exp(1),
//              and the learner sees the gradient at the new point.
//   sgdm_rs    random-scaled SGDM: the momentum form of exactly the same
//              recursion (the drivers perform the identical float ops, so
//              trajectories coincide bit for bit under a shared seed).
//   sgdm_std   SGDM without random scaling (s_t = 1).
//   o2nc_orig  the unexponentiated conversion baseline: unit steps along
//              Delta_n, gradients probed at w_n = x_{n-1} + s_n*Delta_n with
//              s_n ~ Unif[0,1), window-averaged outputs.
//
// The discounted average xbar_n is maintained by the stable recursion
//   xbar_n = ((beta - beta^n)/(1 - beta^n)) xbar_{n-1}
//            + ((1 - beta)/(1 - beta^n)) x_n,
// with 1 - beta^n evaluated as -expm1(n*log1p(-alpha)) so beta near 1 does
// not cancel.  The average is an observer: it never feeds back into the
// iterates.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "o2nc/config.hpp"
#include "o2nc/omd.hpp"
#include "o2nc/problems.hpp"
#include "o2nc/rng.hpp"
#include "o2nc/schedule.hpp"
#include "o2nc/vec.hpp"

namespace o2nc {

class numeric_error : public std::runtime_error {
 public:
  numeric_error(std::int64_t step, const std::string& msg)
      : std::runtime_error("step " + std::to_string(step) + ": " + msg), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

struct trajectory {
  run_config config;
  schedule_params schedule;
  real_vector x0;
  std::vector<double> s;           // scaling draws, t = 1..N
  std::vector<real_vector> x;      // iterates x_t
  std::vector<real_vector> delta;  // updates Delta_t
  std::vector<real_vector> g;      // stochastic gradients g_t
  std::vector<real_vector> xbar;   // discounted averages xbar_t

  std::int64_t steps() const { return static_cast<std::int64_t>(s.size()); }
};

// Discounted running average with stable normalization.
class averaged_iterate {
 public:
  averaged_iterate(double alpha, std::int64_t d)
      : alpha_(alpha), log_beta_(std::log1p(-alpha)), xbar_(zeros(static_cast<std::size_t>(d))) {}

  void update(const real_vector& x_n) {
    ++n_;
    if (n_ == 1) {
      xbar_ = x_n;
      normalization_ = -std::expm1(log_beta_);  // 1 - beta
      return;
    }
    const double om_prev = normalization_;
    const double om_n = -std::expm1(static_cast<double>(n_) * log_beta_);  // 1 - beta^n
    const double beta = 1.0 - alpha_;
    const double c_prev = beta * om_prev / om_n;  // (beta - beta^n)/(1 - beta^n)
    const double c_new = alpha_ / om_n;           // (1 - beta)/(1 - beta^n)
    for (std::size_t i = 0; i < xbar_.size(); ++i) {
      xbar_[i] = c_prev * xbar_[i] + c_new * x_n[i];
    }
    normalization_ = om_n;
  }

  std::int64_t n() const { return n_; }
  const real_vector& value() const { return xbar_; }
  double normalization() const { return normalization_; }

 private:
  double alpha_;
  double log_beta_;
  std::int64_t n_ = 0;
  double normalization_ = 0.0;  // 1 - beta^n
  real_vector xbar_;
};

namespace detail {

inline void reserve_trajectory(trajectory& traj, std::int64_t n) {
  const auto cap = static_cast<std::size_t>(n);
  traj.s.reserve(cap);
  traj.x.reserve(cap);
  traj.delta.reserve(cap);
  traj.g.reserve(cap);
  traj.xbar.reserve(cap);
}

}  // namespace detail

// Exponentiated conversion: Delta_n from the online learner, x_n = x_{n-1} +
// s_n*Delta_n with s_n ~ Exp(1), gradient at x_n fed back as the (implicitly
// exponentiated) loss.  `learner` must be fresh (Delta_1 = 0).
inline trajectory run_exponentiated_o2nc(const problem& prob, composite_omd& learner,
                                         const run_config& cfg, const schedule_params& sp,
                                         random_stream noise, random_stream scaling) {
  if (learner.round() != 1) throw std::invalid_argument("eo2nc: learner must be fresh");
  if (learner.dim() != prob.dim()) throw std::invalid_argument("eo2nc: learner dimension mismatch");
  trajectory traj;
  traj.config = cfg;
  traj.schedule = sp;
  traj.x0 = prob.start_point();
  detail::reserve_trajectory(traj, cfg.n);

  real_vector x = traj.x0;
  averaged_iterate avg(sp.alpha, prob.dim());
  for (std::int64_t t = 1; t <= cfg.n; ++t) {
    real_vector delta = learner.play();
    const double s = scaling.exponential();
    axpy(s, delta, x);
    if (!all_finite(x)) throw numeric_error(t, "non-finite iterate");
    real_vector grad;
    try {
      grad = stochastic_gradient(prob, x, noise);
    } catch (const std::exception& e) {
      throw numeric_error(t, e.what());
    }
    learner.step(grad);
    avg.update(x);
    traj.s.push_back(s);
    traj.x.push_back(x);
    traj.delta.push_back(std::move(delta));
    traj.g.push_back(std::move(grad));
    traj.xbar.push_back(avg.value());
  }
  return traj;
}

// Momentum-form core shared by sgdm_rs / sgdm_std.  next_scale supplies s_t.
// The loop body repeats the float operations of run_exponentiated_o2nc with
// a rescaled-mode learner in the same order, which is what makes the two
// drivers bitwise comparable.
template <typename ScaleFn>
trajectory run_sgdm_core(const problem& prob, const run_config& cfg, const schedule_params& sp,
                         random_stream noise, ScaleFn&& next_scale) {
  trajectory traj;
  traj.config = cfg;
  traj.schedule = sp;
  traj.x0 = prob.start_point();
  detail::reserve_trajectory(traj, cfg.n);

  real_vector x = traj.x0;
  real_vector m = zeros(x.size());
  averaged_iterate avg(sp.alpha, prob.dim());
  for (std::int64_t t = 1; t <= cfg.n; ++t) {
    real_vector delta = scaled(m, -sp.eta_eff);
    const double s = next_scale();
    axpy(s, delta, x);
    if (!all_finite(x)) throw numeric_error(t, "non-finite iterate");
    real_vector grad;
    try {
      grad = stochastic_gradient(prob, x, noise);
    } catch (const std::exception& e) {
      throw numeric_error(t, e.what());
    }
    if (!all_finite(grad)) throw numeric_error(t, "non-finite gradient");
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = sp.beta_eff * m[i] + (1.0 - sp.beta_eff) * grad[i];
    }
    avg.update(x);
    traj.s.push_back(s);
    traj.x.push_back(x);
    traj.delta.push_back(std::move(delta));
    traj.g.push_back(std::move(grad));
    traj.xbar.push_back(avg.value());
  }
  return traj;
}

inline trajectory run_random_scaled_sgdm(const problem& prob, const run_config& cfg,
                                         const schedule_params& sp, random_stream noise,
                                         random_stream scaling) {
  return run_sgdm_core(prob, cfg, sp, std::move(noise),
                       [&scaling]() { return scaling.exponential(); });
}

inline trajectory run_standard_sgdm(const problem& prob, const run_config& cfg,
                                    const schedule_params& sp, random_stream noise) {
  return run_sgdm_core(prob, cfg, sp, std::move(noise), []() { return 1.0; });
}

// Unexponentiated conversion baseline.  N = k_epochs * t_window steps; the
// online learner is plain gradient descent with the schedule's fixed step.
struct original_o2nc_record {
  run_config config;
  schedule_params schedule;
  std::int64_t k_epochs = 0;
  std::int64_t t_window = 0;
  real_vector x0;
  std::vector<double> s;           // Unif[0,1) draws
  std::vector<real_vector> x;      // x_n = x_{n-1} + Delta_n
  std::vector<real_vector> w;      // probe points w_n = x_{n-1} + s_n*Delta_n
  std::vector<real_vector> g;      // gradients at w_n
  std::vector<real_vector> delta;  // updates Delta_n
  std::vector<real_vector> wbar;   // window means, one per epoch

  std::int64_t steps() const { return static_cast<std::int64_t>(s.size()); }
};

// Splits N into k_epochs * t_window with the window as close to sqrt(N) as
// divisibility allows.
inline std::pair<std::int64_t, std::int64_t> factor_horizon(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("factor_horizon: n >= 1");
  std::int64_t t_window = 1;
  for (std::int64_t t = 1; t * t <= n; ++t) {
    if (n % t == 0) t_window = t;
  }
  return {n / t_window, t_window};
}

inline original_o2nc_record run_original_o2nc(const problem& prob, const run_config& cfg,
                                              const schedule_params& sp, std::int64_t k_epochs,
                                              std::int64_t t_window, random_stream noise,
                                              random_stream scaling) {
  if (k_epochs < 1 || t_window < 1 || k_epochs * t_window != cfg.n) {
    throw std::invalid_argument("o2nc_orig: horizon must satisfy N = K*T (got K=" +
                                std::to_string(k_epochs) + ", T=" + std::to_string(t_window) +
                                ", N=" + std::to_string(cfg.n) + ")");
  }
  original_o2nc_record rec;
  rec.config = cfg;
  rec.schedule = sp;
  rec.k_epochs = k_epochs;
  rec.t_window = t_window;
  rec.x0 = prob.start_point();

  real_vector x = rec.x0;
  real_vector delta = zeros(x.size());
  real_vector window_sum = zeros(x.size());
  for (std::int64_t n = 1; n <= cfg.n; ++n) {
    const double s = scaling.uniform01();
    real_vector w = x;
    axpy(s, delta, w);
    axpy(1.0, delta, x);
    if (!all_finite(x) || !all_finite(w)) throw numeric_error(n, "non-finite iterate");
    real_vector grad;
    try {
      grad = stochastic_gradient(prob, w, noise);
    } catch (const std::exception& e) {
      throw numeric_error(n, e.what());
    }
    rec.s.push_back(s);
    rec.x.push_back(x);
    rec.delta.push_back(delta);
    axpy(1.0, w, window_sum);
    rec.w.push_back(std::move(w));
    if (n % t_window == 0) {
      rec.wbar.push_back(scaled(window_sum, 1.0 / static_cast<double>(t_window)));
      window_sum = zeros(x.size());
    }
    axpy(-sp.eta, grad, delta);  // plain gradient descent on the linear losses
    rec.g.push_back(std::move(grad));
  }
  return rec;
}

// Output rule: xbar_{n*} with n* uniform on {1..N}.
inline const real_vector& select_output(const trajectory& traj, random_stream& stream) {
  if (traj.steps() == 0) throw std::invalid_argument("select_output: empty trajectory");
  const std::uint64_t idx = stream.uniform_below(static_cast<std::uint64_t>(traj.steps()));
  return traj.xbar[static_cast<std::size_t>(idx)];
}

// Output rule for the baseline: uniform over the window means.
inline const real_vector& select_output(const original_o2nc_record& rec, random_stream& stream) {
  if (rec.wbar.empty()) throw std::invalid_argument("select_output: empty record");
  const std::uint64_t idx = stream.uniform_below(static_cast<std::uint64_t>(rec.wbar.size()));
  return rec.wbar[static_cast<std::size_t>(idx)];
}

}  // namespace o2nc
