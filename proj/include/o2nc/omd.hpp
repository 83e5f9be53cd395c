#pragma once

// Composite-loss online mirror descent with exponentiated gradients.
//
// Two interchangeable forms of the same algorithm:
//
//   literal   Delta_{t+1} = (Delta_t - eta_t * gtil_t)
//                           / (1 + eta_t*mu_{t+1} + eta_t*(1/eta_{t+1} - 1/eta_t))
//             with eta_t = beta^t * eta, mu_t = beta^-t * mu and
//             gtil_t = beta^-t * g_t.  Runs in extended precision (long
//             double) because beta^-t grows geometrically; usable only for
//             short horizons (default cap 64 rounds).
//
//   rescaled  m_{t+1} = beta_eff*m_t + (1-beta_eff)*g_t,
//             Delta_{t+1} = -eta_eff*m_{t+1} — the momentum form.  No
//             beta^-t appears anywhere; this is the production path.
//
// A regret_ledger can be attached to the literal form; it then records the
// exact extended-precision (gtil_t, Delta_t) pairs the update consumed, and
// the regret accounting below evaluates both sides of the regret guarantee
// on that history.

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "o2nc/schedule.hpp"
#include "o2nc/vec.hpp"

namespace o2nc {

using extended_vector = std::vector<long double>;

struct omd_schedule {
  double beta = 1.0;   // discount factor, (0, 1]
  double eta = 1.0;    // base step size, > 0
  double mu = 0.0;     // base regularizer weight, >= 0
  double alpha = 0.0;  // 1 - beta (kept explicit so callers control rounding)

  omd_schedule() = default;
  omd_schedule(double beta_, double eta_, double mu_)
      : beta(beta_), eta(eta_), mu(mu_), alpha(1.0 - beta_) {}
  omd_schedule(double beta_, double eta_, double mu_, double alpha_)
      : beta(beta_), eta(eta_), mu(mu_), alpha(alpha_) {}

  explicit omd_schedule(const schedule_params& p)
      : beta(p.beta), eta(p.eta), mu(p.mu), alpha(p.alpha) {}

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("omd: beta must be in (0, 1]");
    if (!(eta > 0.0)) throw std::invalid_argument("omd: eta must be > 0");
    if (!(mu >= 0.0)) throw std::invalid_argument("omd: mu must be >= 0");
  }
};

class regret_ledger {
 public:
  explicit regret_ledger(omd_schedule sched, int max_rounds = 64)
      : sched_(sched), max_rounds_(max_rounds) {
    sched_.validate();
    if (max_rounds_ < 1) throw std::invalid_argument("regret_ledger: max_rounds >= 1");
  }

  void append(extended_vector gtilde, extended_vector delta) {
    if (rounds() >= max_rounds_) {
      throw std::length_error("regret_ledger: exceeded max rounds (" +
                              std::to_string(max_rounds_) + ")");
    }
    if (gtilde.size() != delta.size()) {
      throw std::invalid_argument("regret_ledger: dimension mismatch");
    }
    gtilde_.push_back(std::move(gtilde));
    delta_.push_back(std::move(delta));
  }

  int rounds() const { return static_cast<int>(gtilde_.size()); }
  int max_rounds() const { return max_rounds_; }
  const omd_schedule& schedule() const { return sched_; }
  const extended_vector& gtilde(int t) const { return gtilde_.at(static_cast<std::size_t>(t - 1)); }
  const extended_vector& delta(int t) const { return delta_.at(static_cast<std::size_t>(t - 1)); }

  long double eta_t(int t) const {
    return powl(static_cast<long double>(sched_.beta), t) * sched_.eta;
  }
  long double mu_t(int t) const {
    return powl(static_cast<long double>(sched_.beta), -t) * sched_.mu;
  }

 private:
  omd_schedule sched_;
  int max_rounds_;
  std::vector<extended_vector> gtilde_;
  std::vector<extended_vector> delta_;
};

namespace detail {

inline long double dot_ext(const extended_vector& a, const extended_vector& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline long double sqnorm_ext(const extended_vector& a) {
  long double acc = 0.0L;
  for (long double v : a) acc += v * v;
  return acc;
}

inline extended_vector to_extended(const real_vector& v) {
  extended_vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

}  // namespace detail

// Regret of the played sequence against comparator u through round n:
//   sum_{t<=n} <gtil_t, Delta_t - u> + (mu_t/2)(|Delta_t|^2 - |u|^2).
inline long double regret_lhs(const regret_ledger& ledger, const real_vector& u, int n) {
  if (n < 0 || n > ledger.rounds()) throw std::out_of_range("regret_lhs: n out of range");
  const extended_vector ue = detail::to_extended(u);
  const long double u_sq = detail::sqnorm_ext(ue);
  long double acc = 0.0L;
  for (int t = 1; t <= n; ++t) {
    const extended_vector& gt = ledger.gtilde(t);
    const extended_vector& dt = ledger.delta(t);
    if (gt.size() != ue.size()) throw std::invalid_argument("regret_lhs: dimension mismatch");
    acc += detail::dot_ext(gt, dt) - detail::dot_ext(gt, ue);
    acc += 0.5L * ledger.mu_t(t) * (detail::sqnorm_ext(dt) - u_sq);
  }
  return acc;
}

// Guaranteed upper bound on the regret through round n:
//   (2/eta_{n+1} + mu_{n+1}/2) |u|^2 + (1/2) sum_{t<=n} eta_t |gtil_t|^2.
// Requires a nonincreasing step-size schedule; for eta_t = beta^t * eta that
// means beta <= 1, which omd_schedule::validate already enforces — the guard
// here protects against hand-built ledgers with beta > 1.
inline long double regret_rhs_bound(const regret_ledger& ledger, const real_vector& u, int n) {
  if (n < 0 || n > ledger.rounds()) throw std::out_of_range("regret_rhs_bound: n out of range");
  if (ledger.schedule().beta > 1.0) {
    throw std::invalid_argument("regret_rhs_bound: step sizes must be nonincreasing (beta <= 1)");
  }
  const extended_vector ue = detail::to_extended(u);
  const long double u_sq = detail::sqnorm_ext(ue);
  long double acc = (2.0L / ledger.eta_t(n + 1) + 0.5L * ledger.mu_t(n + 1)) * u_sq;
  for (int t = 1; t <= n; ++t) {
    acc += 0.5L * ledger.eta_t(t) * detail::sqnorm_ext(ledger.gtilde(t));
  }
  return acc;
}

// Hindsight-optimal bounded comparator after n rounds:
//   u_n = -D * v / |v|,  v = sum_{t<=n} beta^{n-t} * grad_t,
// and the zero vector when v vanishes.
inline real_vector optimal_comparator(const std::vector<real_vector>& gradients, int n,
                                      double beta, double bigd) {
  if (n < 1 || n > static_cast<int>(gradients.size())) {
    throw std::out_of_range("optimal_comparator: n out of range");
  }
  const std::size_t d = gradients[0].size();
  real_vector v(d, 0.0);
  for (int t = 1; t <= n; ++t) {
    const real_vector& g = gradients[static_cast<std::size_t>(t - 1)];
    require_same_dim(v, g, "optimal_comparator");
    axpy(std::pow(beta, n - t), g, v);
  }
  const double vn = norm(v);
  if (vn == 0.0) return zeros(d);
  return scaled(v, -bigd / vn);
}

enum class omd_mode { literal, rescaled };

class composite_omd {
 public:
  composite_omd(omd_mode mode, omd_schedule sched, std::int64_t dim, int max_horizon = 64)
      : mode_(mode), sched_(sched), dim_(dim), max_horizon_(max_horizon) {
    sched_.validate();
    if (dim_ < 1) throw std::invalid_argument("omd: dim >= 1");
    if (mode_ == omd_mode::literal) {
      if (max_horizon_ < 1) throw std::invalid_argument("omd: max_horizon >= 1");
      delta_ext_.assign(static_cast<std::size_t>(dim_), 0.0L);
      delta_.assign(static_cast<std::size_t>(dim_), 0.0);  // Delta_1 = 0
    } else {
      const double eta_mu = sched_.eta * sched_.mu;
      if (!(eta_mu + sched_.alpha > 0.0)) {
        throw std::invalid_argument("omd: rescaled mode needs eta*mu + alpha > 0");
      }
      beta_eff_ = sched_.beta / (1.0 + eta_mu);
      eta_eff_ = sched_.beta * sched_.eta / (eta_mu + sched_.alpha);
      m_.assign(static_cast<std::size_t>(dim_), 0.0);
      // Delta_1 = -eta*m_0 = 0, via the same float op the momentum driver
      // uses each round so the two stay bit-identical (including zero signs).
      delta_ = scaled(m_, -eta_eff_);
    }
  }

  omd_mode mode() const { return mode_; }
  const omd_schedule& schedule() const { return sched_; }
  int round() const { return t_; }
  std::int64_t dim() const { return dim_; }
  double momentum_coefficient() const { return beta_eff_; }
  double effective_step() const { return eta_eff_; }

  // The update the learner plays this round (Delta_t).
  const real_vector& play() const { return delta_; }
  const extended_vector& play_extended() const {
    if (mode_ != omd_mode::literal) throw std::logic_error("omd: extended state is literal-only");
    return delta_ext_;
  }

  // Record (gtil_t, Delta_t) into `ledger` on every literal step.
  void attach_ledger(regret_ledger* ledger) {
    if (mode_ != omd_mode::literal) {
      throw std::logic_error("omd: ledger attaches to the literal mode only");
    }
    ledger_ = ledger;
  }

  // Consume g_t and advance to round t+1; returns the new play Delta_{t+1}.
  const real_vector& step(const real_vector& g) {
    if (static_cast<std::int64_t>(g.size()) != dim_) {
      throw std::invalid_argument("omd: gradient dimension mismatch");
    }
    require_finite(g, "omd gradient");
    if (mode_ == omd_mode::literal) {
      step_literal(g);
    } else {
      step_rescaled(g);
    }
    ++t_;
    return delta_;
  }

 private:
  void step_literal(const real_vector& g) {
    if (t_ > max_horizon_) {
      throw std::length_error("omd: literal mode exceeded max horizon (" +
                              std::to_string(max_horizon_) + ")");
    }
    const long double lbeta = static_cast<long double>(sched_.beta);
    // Overflow guard: beta^-(t+1) must stay inside long double range.
    if (sched_.beta < 1.0 &&
        -static_cast<long double>(t_ + 1) * logl(lbeta) > 0.99L * logl(LDBL_MAX)) {
      throw std::overflow_error("omd: beta^-t exceeds extended-precision range at t = " +
                                std::to_string(t_));
    }
    const long double scale_up = powl(lbeta, -t_);
    extended_vector gtil(static_cast<std::size_t>(dim_));
    for (std::size_t i = 0; i < gtil.size(); ++i) gtil[i] = scale_up * g[i];

    if (ledger_ != nullptr) ledger_->append(gtil, delta_ext_);

    const long double eta_t = powl(lbeta, t_) * sched_.eta;
    const long double eta_t1 = powl(lbeta, t_ + 1) * sched_.eta;
    const long double mu_t1 = powl(lbeta, -(t_ + 1)) * sched_.mu;
    const long double denom = 1.0L + eta_t * mu_t1 + eta_t * (1.0L / eta_t1 - 1.0L / eta_t);
    for (std::size_t i = 0; i < delta_ext_.size(); ++i) {
      delta_ext_[i] = (delta_ext_[i] - eta_t * gtil[i]) / denom;
      delta_[i] = static_cast<double>(delta_ext_[i]);
    }
  }

  void step_rescaled(const real_vector& g) {
    for (std::size_t i = 0; i < m_.size(); ++i) {
      m_[i] = beta_eff_ * m_[i] + (1.0 - beta_eff_) * g[i];
    }
    delta_ = scaled(m_, -eta_eff_);
  }

  omd_mode mode_;
  omd_schedule sched_;
  std::int64_t dim_;
  int max_horizon_;
  int t_ = 1;
  double beta_eff_ = 0.0;
  double eta_eff_ = 0.0;
  real_vector delta_;          // Delta_t, both modes
  extended_vector delta_ext_;  // literal state
  real_vector m_;              // rescaled state
  regret_ledger* ledger_ = nullptr;
};

}  // namespace o2nc
