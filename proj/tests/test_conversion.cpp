#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "o2nc/drivers.hpp"
#include "o2nc/weights.hpp"

using namespace o2nc;

namespace {

run_config small_quadratic_config(std::int64_t n, std::int64_t d, double sigma) {
  run_config cfg;
  cfg.n = n;
  cfg.d = d;
  cfg.seed = 7;
  cfg.problem = "quadratic";
  cfg.algorithm = "eo2nc";
  cfg.c = 1.0;
  cfg.fstar = 0.5;
  cfg.g = 2.0;
  cfg.sigma = sigma;
  return cfg;
}

bool bitwise_equal(const real_vector& a, const real_vector& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("recorded trajectories replay exactly from their own fields", "[drivers]") {
  const run_config cfg = small_quadratic_config(60, 4, 0.3);
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
  random_stream root(cfg.seed);
  trajectory traj =
      run_exponentiated_o2nc(prob, learner, cfg, sp, root.split(1), root.split(2));

  REQUIRE(traj.steps() == cfg.n);
  REQUIRE(traj.x0 == prob.start_point());
  CHECK(traj.delta[0] == zeros(4));  // the first play is always zero
  // x_t = x_{t-1} + s_t * Delta_t, replayed with the same primitive.
  real_vector x = traj.x0;
  for (std::int64_t t = 0; t < cfg.n; ++t) {
    axpy(traj.s[static_cast<std::size_t>(t)], traj.delta[static_cast<std::size_t>(t)], x);
    REQUIRE(bitwise_equal(x, traj.x[static_cast<std::size_t>(t)]));
  }
  // The scaling draws are Exp(1): positive and not all equal.
  for (double s : traj.s) CHECK(s > 0.0);
  CHECK(traj.s[0] != traj.s[1]);
}

TEST_CASE("discounted average matches the closed-form weights", "[drivers]") {
  const run_config cfg = small_quadratic_config(200, 6, 0.2);
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
  random_stream root(11);
  trajectory traj =
      run_exponentiated_o2nc(prob, learner, cfg, sp, root.split(1), root.split(2));

  const double beta = 1.0 - sp.alpha;
  for (std::int64_t n : {1, 2, 3, 50, 200}) {
    const real_vector closed = weighted_average(traj.x, n, beta);
    const real_vector& recursive = traj.xbar[static_cast<std::size_t>(n - 1)];
    REQUIRE(distance(closed, recursive) <= 1e-10 * std::max(1.0, norm(closed)));
  }
  // Replaying the recursion over the recorded iterates reproduces the stored
  // averages bit for bit.
  averaged_iterate avg(sp.alpha, cfg.d);
  for (std::int64_t t = 0; t < cfg.n; ++t) {
    avg.update(traj.x[static_cast<std::size_t>(t)]);
    REQUIRE(bitwise_equal(avg.value(), traj.xbar[static_cast<std::size_t>(t)]));
  }
}

TEST_CASE("averaged iterate starts at the first point and stays normalized", "[drivers]") {
  averaged_iterate avg(8e-9, 3);  // alpha small enough to stress 1 - beta^n
  const real_vector p{1.0, -2.0, 3.0};
  avg.update(p);
  CHECK(avg.n() == 1);
  CHECK(avg.value() == p);
  CHECK_THAT(avg.normalization(), Catch::Matchers::WithinRel(8e-9, 1e-12));
  for (int k = 0; k < 999; ++k) avg.update(p);
  // Averaging a constant sequence returns the constant to near round-off.
  CHECK(distance(avg.value(), p) <= 1e-12);
  CHECK_THAT(avg.normalization(),
             Catch::Matchers::WithinRel(-std::expm1(1000.0 * std::log1p(-8e-9)), 1e-12));
}

TEST_CASE("scaled-momentum driver reproduces the conversion bit for bit", "[drivers]") {
  const run_config cfg = small_quadratic_config(300, 8, 0.4);
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(29);

  composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
  trajectory a = run_exponentiated_o2nc(prob, learner, cfg, sp, root.split(1), root.split(2));
  trajectory b = run_random_scaled_sgdm(prob, cfg, sp, root.split(1), root.split(2));

  REQUIRE(a.steps() == b.steps());
  CHECK(a.s == b.s);
  for (std::int64_t t = 0; t < cfg.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    REQUIRE(bitwise_equal(a.x[i], b.x[i]));
    REQUIRE(bitwise_equal(a.delta[i], b.delta[i]));
    REQUIRE(bitwise_equal(a.g[i], b.g[i]));
    REQUIRE(bitwise_equal(a.xbar[i], b.xbar[i]));
  }
}

TEST_CASE("standard momentum driver uses unit scaling", "[drivers]") {
  const run_config cfg = small_quadratic_config(50, 4, 0.1);
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(3);
  trajectory traj = run_standard_sgdm(prob, cfg, sp, root.split(1));
  for (double s : traj.s) REQUIRE(s == 1.0);
  // Unit scaling makes x_t = x_{t-1} + Delta_t.
  real_vector x = traj.x0;
  for (std::int64_t t = 0; t < cfg.n; ++t) {
    axpy(1.0, traj.delta[static_cast<std::size_t>(t)], x);
    REQUIRE(bitwise_equal(x, traj.x[static_cast<std::size_t>(t)]));
  }
}

TEST_CASE("conversion rejects stale or mismatched learners", "[drivers]") {
  const run_config cfg = small_quadratic_config(10, 4, 0.0);
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(1);

  composite_omd stale(omd_mode::rescaled, omd_schedule(sp), cfg.d);
  stale.step(zeros(4));
  CHECK_THROWS_AS(
      run_exponentiated_o2nc(prob, stale, cfg, sp, root.split(1), root.split(2)),
      std::invalid_argument);

  composite_omd wrong_dim(omd_mode::rescaled, omd_schedule(sp), 3);
  CHECK_THROWS_AS(
      run_exponentiated_o2nc(prob, wrong_dim, cfg, sp, root.split(1), root.split(2)),
      std::invalid_argument);
}

TEST_CASE("divergence raises a step-tagged numeric error", "[drivers]") {
  const run_config cfg = small_quadratic_config(10, 4, 0.0);
  schedule_params sp = derive_schedule(cfg);
  sp.eta_eff = 1e200;  // force overflow after the momentum warms up
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(1);
  try {
    run_standard_sgdm(prob, cfg, sp, root.split(1));
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(e.step() >= 2);
    CHECK(std::string(e.what()).rfind("step ", 0) == 0);
  }
}

// ---------------------------------------------------------------------------
// unexponentiated baseline
// ---------------------------------------------------------------------------

TEST_CASE("horizon factoring picks the largest window below the square root",
          "[drivers]") {
  CHECK(factor_horizon(100) == std::pair<std::int64_t, std::int64_t>{10, 10});
  CHECK(factor_horizon(12) == std::pair<std::int64_t, std::int64_t>{4, 3});
  CHECK(factor_horizon(7) == std::pair<std::int64_t, std::int64_t>{7, 1});
  CHECK(factor_horizon(1) == std::pair<std::int64_t, std::int64_t>{1, 1});
  CHECK(factor_horizon(36) == std::pair<std::int64_t, std::int64_t>{6, 6});
  CHECK_THROWS_AS(factor_horizon(0), std::invalid_argument);
}

TEST_CASE("baseline honors its recursions and window means", "[drivers]") {
  run_config cfg = small_quadratic_config(12, 3, 0.25);
  cfg.algorithm = "o2nc_orig";
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(17);
  original_o2nc_record rec =
      run_original_o2nc(prob, cfg, sp, 4, 3, root.split(1), root.split(2));

  REQUIRE(rec.steps() == 12);
  REQUIRE(rec.k_epochs == 4);
  REQUIRE(rec.t_window == 3);
  REQUIRE(rec.wbar.size() == 4);

  // First step: Delta_1 = 0, so w_1 = x_0 and x_1 = x_0.
  CHECK(rec.delta[0] == zeros(3));
  CHECK(bitwise_equal(rec.w[0], rec.x0));
  CHECK(bitwise_equal(rec.x[0], rec.x0));

  // Scaling draws are Unif[0,1).
  for (double s : rec.s) {
    CHECK(s >= 0.0);
    CHECK(s < 1.0);
  }

  // x_n = x_{n-1} + Delta_n and w_n = x_{n-1} + s_n Delta_n, bitwise.
  real_vector x = rec.x0;
  for (std::size_t i = 0; i < 12; ++i) {
    real_vector w = x;
    axpy(rec.s[i], rec.delta[i], w);
    REQUIRE(bitwise_equal(w, rec.w[i]));
    axpy(1.0, rec.delta[i], x);
    REQUIRE(bitwise_equal(x, rec.x[i]));
  }

  // Delta_{n+1} = Delta_n - eta * g_n: plain descent on the probe gradients.
  for (std::size_t i = 0; i + 1 < 12; ++i) {
    real_vector d = rec.delta[i];
    axpy(-sp.eta, rec.g[i], d);
    REQUIRE(bitwise_equal(d, rec.delta[i + 1]));
  }

  // Window means average the probe points of each epoch, bitwise.
  for (std::size_t k = 0; k < 4; ++k) {
    real_vector sum = zeros(3);
    for (std::size_t i = 3 * k; i < 3 * (k + 1); ++i) axpy(1.0, rec.w[i], sum);
    REQUIRE(bitwise_equal(scaled(sum, 1.0 / 3.0), rec.wbar[k]));
  }
}

TEST_CASE("baseline rejects horizons that do not factor", "[drivers]") {
  run_config cfg = small_quadratic_config(12, 3, 0.0);
  cfg.algorithm = "o2nc_orig";
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(5);
  CHECK_THROWS_AS(run_original_o2nc(prob, cfg, sp, 5, 3, root.split(1), root.split(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_original_o2nc(prob, cfg, sp, 0, 12, root.split(1), root.split(2)),
                  std::invalid_argument);
}

TEST_CASE("window of one makes every probe point a window mean", "[drivers]") {
  run_config cfg = small_quadratic_config(7, 2, 0.1);
  cfg.algorithm = "o2nc_orig";
  const schedule_params sp = derive_schedule(cfg);
  quadratic_problem prob(cfg.d, cfg.sigma);
  random_stream root(23);
  original_o2nc_record rec =
      run_original_o2nc(prob, cfg, sp, 7, 1, root.split(1), root.split(2));
  REQUIRE(rec.wbar.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    REQUIRE(bitwise_equal(scaled(rec.w[i], 1.0), rec.wbar[i]));
  }
}

// ---------------------------------------------------------------------------
// output selection
// ---------------------------------------------------------------------------

TEST_CASE("output selection is deterministic and uniform over the averages",
          "[drivers]") {
  trajectory traj;
  traj.s.resize(10);
  for (int i = 0; i < 10; ++i) traj.xbar.push_back(real_vector{static_cast<double>(i)});

  random_stream a(77), b(77);
  const real_vector& pick_a = select_output(traj, a);
  const real_vector& pick_b = select_output(traj, b);
  CHECK(pick_a == pick_b);  // same stream state, same pick

  // Chi-squared uniformity over the 10 cells, alpha = 0.001 (9 dof).
  random_stream s(123456);
  std::vector<std::int64_t> counts(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const real_vector& pick = select_output(traj, s);
    ++counts[static_cast<std::size_t>(pick[0])];
  }
  const double expected = draws / 10.0;
  double chi2 = 0.0;
  for (std::int64_t c : counts) {
    const double diff = static_cast<double>(c) - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 <= 27.877);

  trajectory empty;
  CHECK_THROWS_AS(select_output(empty, s), std::invalid_argument);
  original_o2nc_record no_windows;
  CHECK_THROWS_AS(select_output(no_windows, s), std::invalid_argument);
}

TEST_CASE("baseline output selection draws from the window means", "[drivers]") {
  original_o2nc_record rec;
  rec.wbar = {{1.0}, {2.0}, {3.0}};
  random_stream s(5);
  std::vector<int> seen(3, 0);
  for (int i = 0; i < 3000; ++i) {
    const real_vector& pick = select_output(rec, s);
    ++seen[static_cast<std::size_t>(pick[0] - 1.0)];
  }
  for (int c : seen) CHECK(c > 0);
}
