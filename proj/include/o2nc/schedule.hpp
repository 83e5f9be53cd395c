#pragma once

// Horizon-tuned hyperparameter schedule.
//
// Given (N, c, F*, G, sigma) the closed-form schedule below fixes the
// discount alpha (beta = 1 - alpha), the online learning rate eta, the
// regularizer weight mu and the comparator radius D.  The momentum-form
// constants beta_eff / eta_eff are the exact reparameterization used by the
// rescaled update, so the momentum driver and the online-learner driver run
// the same algorithm.

#include <cmath>
#include <stdexcept>
#include <string>

#include "o2nc/config.hpp"

namespace o2nc {

class schedule_error : public std::runtime_error {
 public:
  explicit schedule_error(const std::string& msg)
      : std::runtime_error("schedule: " + msg) {}
};

struct schedule_params {
  double alpha = 0.0;     // discount increment, beta = 1 - alpha
  double beta = 0.0;      // discount factor in (0, 1)
  double eta = 0.0;       // base online learning rate (eta_t = beta^t * eta)
  double mu = 0.0;        // base regularizer weight (mu_t = beta^-t * mu)
  double bigd = 0.0;      // comparator radius
  double beta_eff = 0.0;  // momentum coefficient  beta / (1 + eta*mu)
  double eta_eff = 0.0;   // momentum step size    beta*eta / (eta*mu + alpha)
};

// Derives the schedule from cfg, honoring any per-field overrides.  The
// derived (non-overridden) alpha is rejected when it exceeds 1/2, since the
// guarantees assume beta >= 1/2; an explicit alpha override bypasses that
// check (its validity is the caller's responsibility).
inline schedule_params derive_schedule(const run_config& cfg) {
  validate_config(cfg);
  const double n = static_cast<double>(cfg.n);
  const double gs = cfg.g + cfg.sigma;

  schedule_params p;
  if (cfg.alpha) {
    p.alpha = *cfg.alpha;
  } else {
    const double a1 = std::pow(n, -2.0 / 3.0);
    const double a2 = std::pow(cfg.fstar, 4.0 / 7.0) * std::pow(cfg.c, 2.0 / 7.0) /
                      (std::pow(gs, 6.0 / 7.0) * std::pow(n, 4.0 / 7.0));
    p.alpha = std::max(a1, a2);
    if (p.alpha > 0.5) {
      throw schedule_error(
          "derived alpha = " + std::to_string(p.alpha) +
          " exceeds 1/2 (horizon too short for these constants); "
          "supply an explicit alpha override to proceed");
    }
  }
  p.beta = 1.0 - p.alpha;
  p.eta = cfg.eta ? *cfg.eta : 2.0 * cfg.fstar / (gs * gs * n);
  p.mu = cfg.mu ? *cfg.mu
                : 24.0 * cfg.fstar * cfg.c / (gs * std::pow(p.alpha, 2.5) * n);
  p.bigd = cfg.bigd ? *cfg.bigd : cfg.fstar / (gs * std::sqrt(p.alpha) * n);

  const double eta_mu = p.eta * p.mu;
  p.beta_eff = p.beta / (1.0 + eta_mu);
  p.eta_eff = p.beta * p.eta / (eta_mu + p.alpha);

  if (!(p.beta > 0.0 && p.beta < 1.0)) {
    throw schedule_error("beta = " + std::to_string(p.beta) + " outside (0, 1)");
  }
  if (!(p.beta_eff > 0.0 && p.beta_eff < 1.0)) {
    throw schedule_error("effective momentum outside (0, 1)");
  }
  if (!(p.eta_eff > 0.0) || !std::isfinite(p.eta_eff)) {
    throw schedule_error("effective step size must be positive and finite");
  }
  return p;
}

}  // namespace o2nc
