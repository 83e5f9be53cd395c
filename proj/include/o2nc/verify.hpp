#pragma once

// Named verification suites behind `o2nc verify --suite <name>`.
//
// Each suite exercises one family of inequalities or identities from the
// library on concrete, seeded inputs and reports per-check pass/fail with a
// margin (how far the checked quantity sat from its bound; positive margins
// are slack).  Suites:
//
//   weights      witness-weight normalization, monotonicity, stable averaging
//   equivalence  conversion-driver vs momentum-driver iterate identity,
//                literal vs rescaled online-learner identity
//   regret       online learner's regret upper bound on random sequences
//   lambda       summed lambda-coefficient bound, literal double sums
//   exp_scaling  exponential-scaling expectation identity (Monte Carlo)
//   variance     witness variance vs update-norm bound (per-realization and
//                seed-averaged Monte Carlo)
//   clipping     radial clipping: containment, mean shift, certified bound
//   reduction    small certificate => small gradient at the witness mean
//
// The convergence-trend and paired-SGDM checks live here too; they are run
// by the acceptance gate rather than by `verify all` (they are end-to-end
// statistical runs, not single-formula inequalities).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "o2nc/config.hpp"
#include "o2nc/drivers.hpp"
#include "o2nc/omd.hpp"
#include "o2nc/problems.hpp"
#include "o2nc/rng.hpp"
#include "o2nc/schedule.hpp"
#include "o2nc/stationarity.hpp"
#include "o2nc/vec.hpp"
#include "o2nc/weights.hpp"

namespace o2nc {

struct check_result {
  std::string name;
  bool passed = false;
  double margin = 0.0;  // slack of the checked bound (>= 0 means satisfied)
  std::string detail;
};

struct suite_report {
  std::string suite;
  std::vector<check_result> checks;

  bool passed() const {
    for (const check_result& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names = {"regret",   "exp_scaling", "variance",
                                                 "lambda",   "weights",     "equivalence",
                                                 "clipping", "reduction",   "all"};
  return names;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

inline void add_check(suite_report& rep, const std::string& name, bool passed, double margin,
                      const std::string& detail = "") {
  rep.checks.push_back({name, passed, margin, detail});
}

inline run_config suite_config(const std::string& problem, std::int64_t n, std::int64_t d,
                               std::uint64_t seed, double sigma, double c, double fstar,
                               double g) {
  run_config cfg;
  cfg.n = n;
  cfg.d = d;
  cfg.seed = seed;
  cfg.problem = problem;
  cfg.algorithm = "eo2nc";
  cfg.sigma = sigma;
  cfg.c = c;
  cfg.fstar = fstar;
  cfg.g = g;
  validate_config(cfg);
  return cfg;
}

// Trial substreams: trial k of a root seed uses root.split(1 + k), with noise
// and scaling roles split below it.  split(0) stays reserved for datasets.
struct trial_streams {
  random_stream noise;
  random_stream scaling;
  random_stream output_select;
};

inline trial_streams make_trial_streams(const random_stream& root, std::uint64_t trial) {
  const random_stream base = root.split(1 + trial);
  return {substream(base, stream_role::noise), substream(base, stream_role::scaling),
          substream(base, stream_role::output_select)};
}

inline double rel_deviation(const real_vector& a, const real_vector& b) {
  return distance(a, b) / std::max(1e-12, norm(a));
}

inline double log_uniform(random_stream& rs, double lo, double hi) {
  return std::exp(std::log(lo) + rs.uniform01() * (std::log(hi) - std::log(lo)));
}

// Uniform point in the ball of the given radius.
inline real_vector ball_point(random_stream& rs, std::int64_t d, double radius) {
  real_vector x(static_cast<std::size_t>(d));
  for (double& v : x) v = rs.gaussian();
  const double r = norm(x);
  const double target =
      radius * std::pow(rs.uniform01(), 1.0 / static_cast<double>(d));
  for (double& v : x) v *= r > 0.0 ? target / r : 0.0;
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------
inline suite_report verify_weights(std::uint64_t seed = 20260814) {
  suite_report rep{"weights", {}};

  {
    const exp_weights_t w = exp_weights(3, 0.5);
    const double dev = std::max({std::abs(w.p[0] - 1.0 / 7.0), std::abs(w.p[1] - 2.0 / 7.0),
                                 std::abs(w.p[2] - 4.0 / 7.0)});
    detail::add_check(rep, "three-point weights at beta=0.5 equal (1/7,2/7,4/7)", dev <= 1e-15,
                      1e-15 - dev, "max component deviation " + detail::fmt(dev));
  }
  {
    const exp_weights_t w = exp_weights(1, 0.25);
    detail::add_check(rep, "single-point weights are {1}", w.p.size() == 1 && w.p[0] == 1.0,
                      0.0);
  }
  {
    double worst = 0.0;
    bool monotone = true;
    for (std::int64_t n : {std::int64_t{1}, std::int64_t{2}, std::int64_t{3}, std::int64_t{5},
                           std::int64_t{16}, std::int64_t{100}, std::int64_t{1000},
                           std::int64_t{10000}}) {
      for (double beta : {0.5, 0.9, 0.99, 0.9999}) {
        const exp_weights_t w = exp_weights(n, beta);
        worst = std::max(worst, std::abs(w.sum_extended() - 1.0));
        for (std::size_t t = 1; t < w.p.size(); ++t) {
          // Never decreasing; strict wherever the smaller weight is still a
          // normal double (tiny early weights may underflow to zero).
          monotone = monotone && w.p[t] >= w.p[t - 1];
          if (w.p[t - 1] >= std::numeric_limits<double>::min()) {
            monotone = monotone && w.p[t] > w.p[t - 1];
          }
        }
      }
    }
    detail::add_check(rep, "weight mass sums to 1 within 1e-12 across the (n,beta) grid",
                      worst <= 1e-12, 1e-12 - worst, "worst |sum-1| " + detail::fmt(worst));
    detail::add_check(rep, "weights never decrease and strictly increase in the normal range",
                      monotone, monotone ? 1.0 : -1.0);
  }
  {
    // Recursion vs closed form on a live run; and the average must be a pure
    // observer (recomputable bit-for-bit from the recorded iterates).
    const run_config cfg = detail::suite_config("quadratic", 1000, 10, seed, 0.5, 1.0, 0.5, 2.0);
    const schedule_params sp = derive_schedule(cfg);
    const random_stream root(cfg.seed);
    const auto prob = make_problem(cfg, root);
    auto st = detail::make_trial_streams(root, 0);
    composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
    const trajectory traj =
        run_exponentiated_o2nc(*prob, learner, cfg, sp, st.noise, st.scaling);

    double worst_rel = 0.0;
    for (std::int64_t n = 1; n <= traj.steps(); ++n) {
      const real_vector closed = weighted_average(traj.x, n, sp.beta);
      worst_rel = std::max(
          worst_rel, distance(closed, traj.xbar[static_cast<std::size_t>(n - 1)]) /
                         std::max(1e-12, norm(closed)));
    }
    detail::add_check(rep, "running average matches closed form within rel 1e-10 over N=1000",
                      worst_rel <= 1e-10, 1e-10 - worst_rel,
                      "worst rel deviation " + detail::fmt(worst_rel));

    averaged_iterate replay(sp.alpha, cfg.d);
    bool identical = true;
    for (std::int64_t n = 1; n <= traj.steps(); ++n) {
      replay.update(traj.x[static_cast<std::size_t>(n - 1)]);
      identical = identical && replay.value() == traj.xbar[static_cast<std::size_t>(n - 1)];
    }
    detail::add_check(rep, "average replays bit-identically from recorded iterates", identical,
                      identical ? 1.0 : -1.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// equivalence
// ---------------------------------------------------------------------------
inline suite_report verify_equivalence(std::uint64_t seed = 20260814) {
  suite_report rep{"equivalence", {}};

  struct case_t {
    const char* problem;
    double fstar;
    double g;
  };
  for (const case_t& c : {case_t{"quadratic", 0.5, 2.0}, case_t{"scaled_abs", 0.37, 2.0}}) {
    const run_config cfg = detail::suite_config(c.problem, 1000, 10, seed, 0.5, 1.0, c.fstar, c.g);
    const schedule_params sp = derive_schedule(cfg);
    const random_stream root(cfg.seed);
    const auto prob = make_problem(cfg, root);

    auto st1 = detail::make_trial_streams(root, 0);
    composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
    const trajectory a = run_exponentiated_o2nc(*prob, learner, cfg, sp, st1.noise, st1.scaling);

    auto st2 = detail::make_trial_streams(root, 0);
    const trajectory b = run_random_scaled_sgdm(*prob, cfg, sp, st2.noise, st2.scaling);

    double worst = 0.0;
    for (std::int64_t t = 1; t <= cfg.n; ++t) {
      worst = std::max(worst, detail::rel_deviation(a.x[static_cast<std::size_t>(t - 1)],
                                                    b.x[static_cast<std::size_t>(t - 1)]));
    }
    detail::add_check(rep,
                      std::string("conversion and momentum drivers coincide on ") + c.problem +
                          " (rel 1e-10, N=1000, d=10)",
                      worst <= 1e-10, 1e-10 - worst, "max per-step rel deviation " +
                          detail::fmt(worst));
  }

  {
    // Literal (extended-precision) vs rescaled learner on random gradients.
    random_stream rs = random_stream(seed).split(42);
    double worst = 0.0;
    for (int rep_i = 0; rep_i < 10; ++rep_i) {
      const double beta = 0.9 + 0.01 * rep_i;  // 0.90 .. 0.99
      const double eta = detail::log_uniform(rs, 1e-3, 1.0);
      const double mu = rep_i % 3 == 0 ? 0.0 : detail::log_uniform(rs, 1e-2, 10.0);
      const omd_schedule sched(beta, eta, mu);
      composite_omd lit(omd_mode::literal, sched, 4, 64);
      composite_omd res(omd_mode::rescaled, sched, 4);
      for (int t = 1; t <= 50; ++t) {
        real_vector g(4);
        for (double& v : g) v = rs.gaussian();
        const real_vector& dl = lit.step(g);
        const real_vector& dr = res.step(g);
        worst = std::max(worst, detail::rel_deviation(dl, dr));
      }
    }
    detail::add_check(rep, "literal and rescaled learner updates agree within rel 1e-9",
                      worst <= 1e-9, 1e-9 - worst, "max per-step rel deviation " +
                          detail::fmt(worst));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// regret
// ---------------------------------------------------------------------------
inline suite_report verify_regret(std::uint64_t seed = 20260814) {
  suite_report rep{"regret", {}};
  const random_stream root(seed);
  const double betas[] = {0.9, 0.99, 0.999};

  std::int64_t comparisons = 0;
  std::int64_t violations = 0;
  long double worst_slack = std::numeric_limits<long double>::infinity();
  for (int inst = 0; inst < 100; ++inst) {
    random_stream rs = root.split(100 + static_cast<std::uint64_t>(inst));
    const int n = 1 + static_cast<int>(rs.uniform_below(64));
    const int d = 1 + static_cast<int>(rs.uniform_below(8));
    const double beta = betas[inst % 3];
    const double eta = detail::log_uniform(rs, 1e-3, 1.0);
    const double mu = rs.uniform01() < 0.3 ? 0.0 : detail::log_uniform(rs, 1e-2, 100.0);
    const double bigd = detail::log_uniform(rs, 1e-2, 10.0);
    const omd_schedule sched(beta, eta, mu);

    // Adversarial-ish gradient mix: dense Gaussian at three magnitudes plus
    // sparse spikes.
    std::vector<real_vector> gs(static_cast<std::size_t>(n), real_vector(d, 0.0));
    for (auto& g : gs) {
      const std::uint64_t style = rs.uniform_below(4);
      if (style == 3) {
        g[rs.uniform_below(static_cast<std::uint64_t>(d))] = rs.uniform01() < 0.5 ? 10.0 : -10.0;
      } else {
        const double scale = style == 0 ? 0.01 : (style == 1 ? 1.0 : 10.0);
        for (double& v : g) v = scale * rs.gaussian();
      }
    }

    regret_ledger ledger(sched, 64);
    composite_omd learner(omd_mode::literal, sched, d, 64);
    learner.attach_ledger(&ledger);
    for (const real_vector& g : gs) learner.step(g);

    std::vector<real_vector> comparators;
    comparators.reserve(20);
    for (int k = 0; k < 20; ++k) {
      real_vector u(static_cast<std::size_t>(d));
      for (double& v : u) v = rs.gaussian();
      const double target = detail::log_uniform(rs, 1e-3, 2.0 * bigd);
      const double un = norm(u);
      for (double& v : u) v *= un > 0.0 ? target / un : 0.0;
      comparators.push_back(std::move(u));
    }

    for (int prefix = 1; prefix <= n; ++prefix) {
      const real_vector u_star = optimal_comparator(gs, prefix, beta, bigd);
      for (int k = -1; k < 20; ++k) {
        const real_vector& u = k < 0 ? u_star : comparators[static_cast<std::size_t>(k)];
        const long double lhs = regret_lhs(ledger, u, prefix);
        const long double rhs = regret_rhs_bound(ledger, u, prefix);
        const long double slack = rhs - lhs;
        worst_slack = std::min(worst_slack, slack);
        ++comparisons;
        if (lhs > rhs + 1e-12L * std::max(1.0L, fabsl(rhs))) ++violations;
      }
    }
  }
  detail::add_check(rep,
                    "regret bound holds on 100 random sequences, every prefix, optimal + 20 "
                    "random comparators",
                    violations == 0, static_cast<double>(worst_slack),
                    detail::fmt(static_cast<double>(comparisons)) + " comparisons, " +
                        detail::fmt(static_cast<double>(violations)) + " violations, min slack " +
                        detail::fmt(static_cast<double>(worst_slack)));
  return rep;
}

// ---------------------------------------------------------------------------
// lambda
// ---------------------------------------------------------------------------
inline suite_report verify_lambda(std::uint64_t /*seed*/ = 20260814) {
  suite_report rep{"lambda", {}};
  {
    const double v = lambda_brute_force(2, 2, 0.5, 200);
    const double dev = std::abs(v - 8.0 / 9.0);
    detail::add_check(rep, "lambda(n=2,t=2,beta=0.5) equals 8/9", dev <= 1e-12, 1e-12 - dev,
                      "value " + detail::fmt(v));
  }
  {
    bool zero = true;
    for (int n : {1, 3, 17, 200}) zero = zero && lambda_brute_force(n, 1, 0.9, 200) == 0.0;
    detail::add_check(rep, "lambda(n,1) is identically zero", zero, zero ? 1.0 : -1.0);
  }
  for (double beta : {0.5, 0.9, 0.99}) {
    const lambda_report lr = lambda_bound_check(beta, 200);
    detail::add_check(rep,
                      "summed lambda bound 12/(1-beta)^2 holds for all t at beta=" +
                          detail::fmt(beta) + ", N=200",
                      lr.passed(), lr.bound - lr.worst_sum,
                      "worst sum " + detail::fmt(lr.worst_sum) + " at t=" +
                          std::to_string(lr.worst_t) + ", bound " + detail::fmt(lr.bound));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// exp_scaling
// ---------------------------------------------------------------------------
inline suite_report verify_exp_scaling(std::uint64_t seed = 20260814) {
  suite_report rep{"exp_scaling", {}};
  const random_stream root(seed);
  const long samples = 100000;

  {
    // Quadratic: Monte Carlo and the closed-form moments.
    const run_config cfg = detail::suite_config("quadratic", 10, 10, seed, 0.0, 1.0, 0.5, 2.0);
    const auto prob = make_problem(cfg, root);
    random_stream rs = root.split(7001);
    real_vector x(static_cast<std::size_t>(cfg.d));
    real_vector delta(static_cast<std::size_t>(cfg.d));
    for (double& v : x) v = 0.3 * rs.gaussian();
    for (double& v : delta) v = 0.2 * rs.gaussian();

    const scaling_identity_report r =
        exp_scaling_identity_mc(*prob, x, delta, samples, root.split(7002));
    detail::add_check(rep, "scaling identity on quadratic (1e5 samples, 3 SE)", r.pass,
                      3.0 * r.gap_se - std::abs(r.gap_mean),
                      "gap " + detail::fmt(r.gap_mean) + " se " + detail::fmt(r.gap_se));

    // Closed form: E[F(x+sD)-F(x)] = <grad F(x), D> + |D|^2 under E[s]=1,
    // E[s^2]=2.  The identity's common-random-number gap has tiny variance,
    // so check the lhs mean against the analytic value via its own spread.
    const double analytic = dot(prob->gradient(x), delta) + squared_norm(delta);
    random_stream rs2 = root.split(7002);
    double mean = 0.0, m2 = 0.0;
    const double fx = prob->value(x);
    for (long i = 1; i <= samples; ++i) {
      const double s = rs2.exponential();
      real_vector y = x;
      axpy(s, delta, y);
      const double lhs = prob->value(y) - fx;
      const double d1 = lhs - mean;
      mean += d1 / static_cast<double>(i);
      m2 += d1 * (lhs - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(samples - 1) /
                                static_cast<double>(samples));
    const double gap = std::abs(mean - analytic);
    detail::add_check(rep, "quadratic closed-form moments (E[s]=1, E[s^2]=2) within 3 SE",
                      gap <= 3.0 * se, 3.0 * se - gap,
                      "mc " + detail::fmt(mean) + " analytic " + detail::fmt(analytic));
  }
  {
    // scaled_abs with the probe segment crossing the kink.
    const run_config cfg = detail::suite_config("scaled_abs", 10, 10, seed, 0.0, 1.0, 0.37, 2.0);
    const auto prob = make_problem(cfg, root);
    real_vector x = zeros(static_cast<std::size_t>(cfg.d));
    real_vector delta = zeros(static_cast<std::size_t>(cfg.d));
    x[0] = 0.5;
    x[1] = 0.4;
    delta[0] = -1.5;  // crosses the kink plane at s = 1/3
    delta[1] = 0.3;
    const scaling_identity_report r =
        exp_scaling_identity_mc(*prob, x, delta, samples, root.split(7003));
    detail::add_check(rep, "scaling identity on scaled_abs across the kink (1e5 samples, 3 SE)",
                      r.pass, 3.0 * r.gap_se - std::abs(r.gap_mean),
                      "gap " + detail::fmt(r.gap_mean) + " se " + detail::fmt(r.gap_se));
  }
  {
    const run_config cfg =
        detail::suite_config("piecewise_quadratic", 10, 10, seed, 0.0, 1.0, 0.7, 13.5);
    const auto prob = make_problem(cfg, root);
    random_stream rs = root.split(7004);
    real_vector x(static_cast<std::size_t>(cfg.d));
    real_vector delta(static_cast<std::size_t>(cfg.d));
    for (double& v : x) v = 0.4 * rs.gaussian();
    x[0] = 0.2;  // the exponential sweep crosses the seam
    for (double& v : delta) v = 0.2 * rs.gaussian();
    delta[0] = -0.6;
    const scaling_identity_report r =
        exp_scaling_identity_mc(*prob, x, delta, samples, root.split(7005));
    detail::add_check(rep, "scaling identity on piecewise_quadratic (1e5 samples, 3 SE)", r.pass,
                      3.0 * r.gap_se - std::abs(r.gap_mean),
                      "gap " + detail::fmt(r.gap_mean) + " se " + detail::fmt(r.gap_se));
  }
  {
    run_config cfg = detail::suite_config("toy_mlp", 10, toy_mlp_problem::kParams, seed, 0.0,
                                          1.0, 0.8, 19.0);
    const random_stream root_mlp(cfg.seed);
    const auto prob = make_problem(cfg, root_mlp);
    random_stream rs = root_mlp.split(7006);
    real_vector x = prob->start_point();
    real_vector delta(x.size());
    for (double& v : delta) v = 0.05 * rs.gaussian();
    // Fewer samples here: each one walks the full training batch, and the
    // required 1e5-sample checks above already pin the identity itself.
    const scaling_identity_report r =
        exp_scaling_identity_mc(*prob, x, delta, samples / 5, root_mlp.split(7007));
    detail::add_check(rep, "scaling identity on toy_mlp (2e4 samples, 3 SE)", r.pass,
                      3.0 * r.gap_se - std::abs(r.gap_mean),
                      "gap " + detail::fmt(r.gap_mean) + " se " + detail::fmt(r.gap_se));
  }
  {
    const run_config cfg = detail::suite_config("quadratic", 10, 4, seed, 0.0, 1.0, 0.5, 2.0);
    const auto prob = make_problem(cfg, root);
    real_vector x = zeros(4);
    x[0] = 0.7;
    const scaling_identity_report r =
        exp_scaling_identity_mc(*prob, x, zeros(4), 10000, root.split(7008));
    detail::add_check(rep, "zero update gives an exactly zero gap", r.pass && r.gap_mean == 0.0,
                      r.gap_mean == 0.0 ? 1.0 : -1.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// variance
// ---------------------------------------------------------------------------
inline suite_report verify_variance(std::uint64_t seed = 20260814) {
  suite_report rep{"variance", {}};

  {
    // Hand-checkable two-point realization: x = (0, 1), beta = 1/2.
    const exp_weights_t w = exp_weights(2, 0.5);
    trajectory traj;
    traj.schedule.beta = 0.5;
    traj.s = {1.0, 1.0};
    traj.x = {real_vector{0.0}, real_vector{1.0}};
    const double lhs = detail::witness_variance(traj, w);
    const double rhs = detail::pairwise_bound(traj, w);
    const bool ok = std::abs(lhs - 2.0 / 9.0) <= 1e-15 && std::abs(rhs - 4.0 / 9.0) <= 1e-15 &&
                    lhs <= rhs;
    detail::add_check(rep, "two-point convexity step matches hand arithmetic (2/9 <= 4/9)", ok,
                      rhs - lhs, "lhs " + detail::fmt(lhs) + " rhs " + detail::fmt(rhs));
  }

  {
    const run_config base = detail::suite_config("quadratic", 256, 5, seed, 0.5, 1.0, 0.5, 2.0);
    const schedule_params sp = derive_schedule(base);
    const random_stream root(base.seed);
    const auto prob = make_problem(base, root);

    std::vector<trajectory> trajs;
    trajs.reserve(200);
    for (int trial = 0; trial < 200; ++trial) {
      auto st = detail::make_trial_streams(root, static_cast<std::uint64_t>(trial));
      composite_omd learner(omd_mode::rescaled, omd_schedule(sp), base.d);
      trajs.push_back(run_exponentiated_o2nc(*prob, learner, base, sp, st.noise, st.scaling));
    }
    const variance_report vr =
        variance_bound_check(trajs, 5, root.split(9001), /*min_seeds=*/200);
    detail::add_check(rep, "per-realization convexity step on 1000 sampled (trajectory, n) pairs",
                      vr.convexity_violations == 0, 1.0 - vr.convexity_worst_ratio,
                      "worst lhs/rhs ratio " + detail::fmt(vr.convexity_worst_ratio));
    detail::add_check(rep, "seed-averaged variance bound (200 seeds, N=256, 3 SE slack)",
                      vr.mc_pass, 3.0 * vr.mc_gap_se - vr.mc_gap_mean,
                      "lhs mean " + detail::fmt(vr.mc_lhs_mean) + " rhs mean " +
                          detail::fmt(vr.mc_rhs_mean) + " gap " + detail::fmt(vr.mc_gap_mean) +
                          " se " + detail::fmt(vr.mc_gap_se));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// clipping
// ---------------------------------------------------------------------------
inline suite_report verify_clipping(std::uint64_t seed = 20260814) {
  suite_report rep{"clipping", {}};
  const random_stream root(seed);

  {
    // Single far point: x = 0, y = (3, 0), delta = 1 clips to (1, 0).
    const run_config cfg = detail::suite_config("quadratic", 10, 2, seed, 0.0, 1.0, 0.5, 2.0);
    const auto prob = make_problem(cfg, root);
    const real_vector y{3.0, 0.0};
    const clipped_distribution cd =
        goldstein_clip({y}, {1.0}, zeros(2), 1.0, *prob, 1.0, norm(prob->gradient(y)));
    const double dev = distance(cd.support[0], real_vector{1.0, 0.0});
    detail::add_check(rep, "far point clips onto the radius-1 sphere", dev <= 1e-15,
                      1e-15 - dev);
  }

  const run_config qcfg = detail::suite_config("quadratic", 10, 5, seed, 0.0, 1.0, 0.5, 2.0);
  const auto qprob = make_problem(qcfg, root);
  const run_config scfg = detail::suite_config("scaled_abs", 10, 5, seed, 0.0, 1.0, 0.5, 2.0);
  const auto sprob = make_problem(scfg, root);

  std::int64_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  random_stream rs = root.split(5001);
  for (int i = 0; i < 1000; ++i) {
    const problem& prob = i % 2 == 0 ? *qprob : *sprob;
    const double radius = 0.9 * prob.constants().domain_radius;
    const int k = 1 + static_cast<int>(rs.uniform_below(8));

    std::vector<real_vector> support;
    std::vector<double> probs;
    double mass = 0.0;
    for (int j = 0; j < k; ++j) {
      support.push_back(detail::ball_point(rs, 5, radius));
      const double p = rs.exponential() + 1e-9;
      probs.push_back(p);
      mass += p;
    }
    for (double& p : probs) p /= mass;

    // Center the witness at its own mean, so it certifies (c, eps) for the
    // eps it attains; the support stays in the domain ball by convexity.
    real_vector x = zeros(5);
    real_vector mean_grad = zeros(5);
    for (int j = 0; j < k; ++j) {
      axpy(probs[static_cast<std::size_t>(j)], support[static_cast<std::size_t>(j)], x);
      axpy(probs[static_cast<std::size_t>(j)],
           prob.gradient(support[static_cast<std::size_t>(j)]), mean_grad);
    }
    double variance = 0.0;
    for (int j = 0; j < k; ++j) {
      const double dist = distance(support[static_cast<std::size_t>(j)], x);
      variance += probs[static_cast<std::size_t>(j)] * dist * dist;
    }
    const double c = detail::log_uniform(rs, 0.1, 10.0);
    const double eps = norm(mean_grad) + c * variance;
    const double delta = detail::log_uniform(rs, 0.05, 2.0);

    const clipped_distribution cd = goldstein_clip(support, probs, x, delta, prob, c, eps);
    bool ok = distance(x, cd.clipped_mean) <= delta * (1.0 + 1e-12);
    for (const real_vector& yhat : cd.support) {
      ok = ok && distance(yhat, x) <= delta * (1.0 + 1e-12);
      ok = ok && distance(yhat, cd.clipped_mean) <= 2.0 * delta * (1.0 + 1e-12);
    }
    ok = ok && cd.measured_mean_grad_norm <= cd.epsilon_prime * (1.0 + 1e-12);
    worst_slack = std::min(worst_slack, cd.epsilon_prime - cd.measured_mean_grad_norm);
    if (!ok) ++violations;
  }
  detail::add_check(rep,
                    "1000 random witnesses: containment, mean shift <= delta, certified bound",
                    violations == 0, worst_slack,
                    std::to_string(violations) + " violations, min certified slack " +
                        detail::fmt(worst_slack));
  return rep;
}

// ---------------------------------------------------------------------------
// reduction
// ---------------------------------------------------------------------------
inline suite_report verify_reduction(std::uint64_t seed = 20260814) {
  suite_report rep{"reduction", {}};
  const double eps = 0.05;

  struct case_t {
    const char* problem;
    double c;      // config c driving the schedule
    double fstar;
    double g;
    const char* required_branch;  // branch that must be non-vacuous
  };
  for (const case_t& c : {case_t{"quadratic", 20.0, 0.5, 2.0, "smooth"},
                          case_t{"piecewise_quadratic", 1.0, 0.69, 13.5, "second_order"}}) {
    const run_config cfg =
        detail::suite_config(c.problem, 100000, 10, seed, 0.05, c.c, c.fstar, c.g);
    const schedule_params sp = derive_schedule(cfg);
    const random_stream root(cfg.seed);
    const auto prob = make_problem(cfg, root);
    auto st = detail::make_trial_streams(root, 0);
    composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
    const trajectory traj =
        run_exponentiated_o2nc(*prob, learner, cfg, sp, st.noise, st.scaling);

    const std::vector<reduction_report> reports =
        smooth_reduction_check(traj, *prob, eps, log_grid(traj.steps()));
    for (const reduction_report& rr : reports) {
      detail::add_check(rep,
                        std::string(c.problem) + " " + rr.branch +
                            " branch: gradient at witness mean <= 2*eps wherever certificate "
                            "<= eps",
                        rr.passed(), -rr.worst_excess,
                        std::to_string(rr.qualifying) + "/" + std::to_string(rr.checked) +
                            " qualifying indices, worst excess " + detail::fmt(rr.worst_excess));
      if (rr.branch == c.required_branch) {
        detail::add_check(rep,
                          std::string(c.problem) + " " + rr.branch +
                              " branch reaches certificate <= eps (non-vacuous)",
                          rr.qualifying >= 1, static_cast<double>(rr.qualifying),
                          std::to_string(rr.qualifying) + " qualifying indices");
      }
    }
  }
  return rep;
}

inline suite_report run_verify_suite(const std::string& name, std::uint64_t seed = 20260814) {
  if (name == "weights") return verify_weights(seed);
  if (name == "equivalence") return verify_equivalence(seed);
  if (name == "regret") return verify_regret(seed);
  if (name == "lambda") return verify_lambda(seed);
  if (name == "exp_scaling") return verify_exp_scaling(seed);
  if (name == "variance") return verify_variance(seed);
  if (name == "clipping") return verify_clipping(seed);
  if (name == "reduction") return verify_reduction(seed);
  throw std::invalid_argument("unknown verify suite: " + name);
}

inline std::vector<suite_report> run_all_suites(std::uint64_t seed = 20260814) {
  std::vector<suite_report> out;
  for (const std::string& name : known_suites()) {
    if (name == "all") continue;
    out.push_back(run_verify_suite(name, seed));
  }
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end statistical checks used by the acceptance gate.
// ---------------------------------------------------------------------------

// Convergence trend: the best certificate value achievable along the run
// improves with the horizon.  Five seeds per horizon; compare medians.
struct trend_report {
  std::vector<double> small_mins;  // min certificate total per seed, N = 5e3
  std::vector<double> large_mins;  // same, N = 5e4
  double median_small = 0.0;
  double median_large = 0.0;
  bool pass = false;
};

inline double minimum_certificate_total(const trajectory& traj, const problem& prob, double c) {
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t n : log_grid(traj.steps())) {
    best = std::min(best, certificate_value(traj, prob, c, n).total);
  }
  return best;
}

inline trend_report convergence_trend_check() {
  trend_report rep;
  const auto run_min = [](std::int64_t n, std::uint64_t seed) {
    const run_config cfg = detail::suite_config("scaled_abs", n, 20, seed, 0.1, 1.0,
                                                /*fstar=*/0.28, /*g=*/2.0);
    const schedule_params sp = derive_schedule(cfg);
    const random_stream root(cfg.seed);
    const auto prob = make_problem(cfg, root);
    auto st = detail::make_trial_streams(root, 0);
    composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
    const trajectory traj =
        run_exponentiated_o2nc(*prob, learner, cfg, sp, st.noise, st.scaling);
    return minimum_certificate_total(traj, *prob, cfg.c);
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    rep.small_mins.push_back(run_min(5000, seed));
    rep.large_mins.push_back(run_min(50000, seed));
  }
  auto median5 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[2];
  };
  rep.median_small = median5(rep.small_mins);
  rep.median_large = median5(rep.large_mins);
  rep.pass = rep.median_large < rep.median_small;
  return rep;
}

// Paired random-scaling comparison on the neural problem: with shared noise
// substreams, best train loss under random scaling should land within 20%
// of the unscaled optimizer's.
struct paired_compare_report {
  std::vector<double> best_rs;   // per-seed best train loss, random scaling
  std::vector<double> best_std;  // per-seed best train loss, no scaling
  double mean_rs = 0.0;
  double mean_std = 0.0;
  double rel_gap = 0.0;
  bool pass = false;
};

inline run_config paired_mlp_config(std::uint64_t seed) {
  run_config cfg;
  cfg.n = 3000;
  cfg.d = toy_mlp_problem::kParams;
  cfg.seed = seed;
  cfg.problem = "toy_mlp";
  cfg.algorithm = "sgdm_rs,sgdm_std";
  cfg.sigma = 0.1;
  cfg.c = 1.0;
  cfg.fstar = 0.8;
  cfg.g = 19.0;
  cfg.alpha = 0.1;       // with eta and mu below: momentum 0.9, step 0.01
  cfg.mu = 0.0;
  cfg.eta = 1.0 / 900.0;
  validate_config(cfg);
  return cfg;
}

inline double best_train_loss(const trajectory& traj, const problem& prob) {
  double best = std::numeric_limits<double>::infinity();
  for (const real_vector& x : traj.x) best = std::min(best, prob.value(x));
  return best;
}

inline paired_compare_report paired_sgdm_check() {
  paired_compare_report rep;
  for (std::uint64_t seed = 101; seed <= 103; ++seed) {
    const run_config cfg = paired_mlp_config(seed);
    const schedule_params sp = derive_schedule(cfg);
    const random_stream root(cfg.seed);
    const auto prob = make_problem(cfg, root);

    auto st1 = detail::make_trial_streams(root, 0);
    const trajectory rs_traj = run_random_scaled_sgdm(*prob, cfg, sp, st1.noise, st1.scaling);
    auto st2 = detail::make_trial_streams(root, 0);
    const trajectory std_traj = run_standard_sgdm(*prob, cfg, sp, st2.noise);

    rep.best_rs.push_back(best_train_loss(rs_traj, *prob));
    rep.best_std.push_back(best_train_loss(std_traj, *prob));
  }
  for (double v : rep.best_rs) rep.mean_rs += v;
  for (double v : rep.best_std) rep.mean_std += v;
  rep.mean_rs /= static_cast<double>(rep.best_rs.size());
  rep.mean_std /= static_cast<double>(rep.best_std.size());
  rep.rel_gap = std::abs(rep.mean_rs - rep.mean_std) / rep.mean_std;
  rep.pass = rep.rel_gap <= 0.20;
  return rep;
}

}  // namespace o2nc
