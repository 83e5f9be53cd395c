#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "o2nc/stationarity.hpp"

using namespace o2nc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Synthetic two-point path: x_1 = 0, x_2 = 1 in one dimension, beta = 1/2.
// The witness weights are (1/3, 2/3), so the mean gradient under F = |x|^2/2
// is 2/3, the witness variance is 2/9, and the certificate total is 8/9.
trajectory two_point_path() {
  trajectory traj;
  traj.schedule.beta = 0.5;
  traj.s = {1.0, 1.0};
  traj.x = {{0.0}, {1.0}};
  traj.delta = {{0.0}, {1.0}};
  return traj;
}

}  // namespace

TEST_CASE("certificate matches the two-point hand computation", "[certificate]") {
  const trajectory traj = two_point_path();
  const quadratic_problem prob(1, 0.0);
  const certificate cert = certificate_value(traj, prob, 1.0, 2);
  CHECK(cert.n == 2);
  CHECK_THAT(cert.mean_grad_norm, WithinRel(2.0 / 3.0, 1e-13));
  CHECK_THAT(cert.variance, WithinRel(2.0 / 9.0, 1e-13));
  CHECK_THAT(cert.total, WithinRel(8.0 / 9.0, 1e-13));

  // Doubling c doubles only the variance term.
  const certificate cert2 = certificate_value(traj, prob, 2.0, 2);
  CHECK_THAT(cert2.total, WithinRel(2.0 / 3.0 + 4.0 / 9.0, 1e-13));
}

TEST_CASE("certificate at n=1 is a point mass", "[certificate]") {
  const trajectory traj = two_point_path();
  const quadratic_problem prob(1, 0.0);
  const certificate cert = certificate_value(traj, prob, 5.0, 1);
  CHECK(cert.variance == 0.0);
  CHECK(cert.mean_grad_norm == 0.0);  // gradient at x_1 = 0
  CHECK(cert.total == 0.0);
}

TEST_CASE("certificate validates its arguments", "[certificate]") {
  const trajectory traj = two_point_path();
  const quadratic_problem prob(1, 0.0);
  CHECK_THROWS_AS(certificate_value(traj, prob, 1.0, 0), std::out_of_range);
  CHECK_THROWS_AS(certificate_value(traj, prob, 1.0, 3), std::out_of_range);
  CHECK_THROWS_AS(certificate_value(traj, prob, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(certificate_value(traj, prob, -1.0, 2), std::invalid_argument);
}

TEST_CASE("index grids have the advertised shape", "[certificate]") {
  CHECK(log_grid(1) == std::vector<std::int64_t>{1});
  CHECK(log_grid(8) == std::vector<std::int64_t>{1, 2, 4, 8});
  CHECK(log_grid(10) == std::vector<std::int64_t>{1, 2, 4, 8, 10});
  CHECK(full_grid(5) == std::vector<std::int64_t>{1, 2, 3, 4, 5});
}

// ---------------------------------------------------------------------------
// radial clipping
// ---------------------------------------------------------------------------

TEST_CASE("clipping pulls a far point onto the sphere", "[clipping]") {
  const quadratic_problem prob(2, 0.0);
  const std::vector<real_vector> support = {{3.0, 0.0}};
  const clipped_distribution out =
      goldstein_clip(support, {1.0}, zeros(2), 1.0, prob, 1.0, 0.1);
  REQUIRE(out.support.size() == 1);
  CHECK_THAT(out.support[0][0], WithinAbs(1.0, 1e-15));
  CHECK(out.support[0][1] == 0.0);
  CHECK_THAT(out.clipped_mean[0], WithinAbs(1.0, 1e-15));
}

TEST_CASE("clipping keeps in-ball points and mixes the mean", "[clipping]") {
  const quadratic_problem prob(2, 0.0);
  const std::vector<real_vector> support = {{0.25, 0.0}, {0.0, 4.0}};
  const std::vector<double> probs = {0.25, 0.75};
  const clipped_distribution out =
      goldstein_clip(support, probs, zeros(2), 2.0, prob, 1.0, 0.1);
  CHECK(out.support[0] == support[0]);  // inside the ball: untouched
  CHECK_THAT(out.support[1][1], WithinAbs(2.0, 1e-15));
  CHECK_THAT(out.clipped_mean[0], WithinAbs(0.0625, 1e-15));
  CHECK_THAT(out.clipped_mean[1], WithinAbs(1.5, 1e-15));
  // The clipped points all live in the closed ball.
  for (const real_vector& y : out.support) CHECK(norm(y) <= 2.0 * (1.0 + 1e-15));
  // For this quadratic the mean gradient is the clipped mean itself.
  CHECK_THAT(out.measured_mean_grad_norm, WithinRel(norm(out.clipped_mean), 1e-13));
}

TEST_CASE("certified bound scales the certificate by 1 + 2G/(c delta^2)",
          "[clipping]") {
  const quadratic_problem prob(2, 0.0);  // G = 2
  const std::vector<real_vector> support = {{0.1, 0.0}};
  const clipped_distribution out =
      goldstein_clip(support, {1.0}, zeros(2), 0.5, prob, 2.0, 0.1);
  CHECK_THAT(out.epsilon_prime, WithinRel((1.0 + 4.0 / 0.5) * 0.1, 1e-14));
}

TEST_CASE("clipping rejects malformed witnesses", "[clipping]") {
  const quadratic_problem prob(2, 0.0);
  const std::vector<real_vector> support = {{1.0, 0.0}};
  CHECK_THROWS_AS(goldstein_clip(support, {1.0}, zeros(2), 0.0, prob, 1.0, 0.1),
                  std::invalid_argument);  // delta
  CHECK_THROWS_AS(goldstein_clip({}, {}, zeros(2), 1.0, prob, 1.0, 0.1),
                  std::invalid_argument);  // empty
  CHECK_THROWS_AS(goldstein_clip(support, {0.5, 0.5}, zeros(2), 1.0, prob, 1.0, 0.1),
                  std::invalid_argument);  // size mismatch
  CHECK_THROWS_AS(goldstein_clip(support, {-1.0}, zeros(2), 1.0, prob, 1.0, 0.1),
                  std::invalid_argument);  // negative probability
  CHECK_THROWS_AS(goldstein_clip(support, {0.9}, zeros(2), 1.0, prob, 1.0, 0.1),
                  std::invalid_argument);  // mass != 1
  CHECK_THROWS_AS(goldstein_clip(support, {1.0}, zeros(2), 1.0, prob, 0.0, 0.1),
                  std::invalid_argument);  // c
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

TEST_CASE("reduction accepts a stationary path and reports its grid", "[reduction]") {
  trajectory traj;
  traj.schedule.beta = 0.9;
  traj.s = {1.0, 1.0, 1.0, 1.0};
  traj.x = {{0.0}, {0.0}, {0.0}, {0.0}};
  const quadratic_problem prob(1, 0.0);
  const auto reports = smooth_reduction_check(traj, prob, 0.05, log_grid(4));
  REQUIRE(reports.size() == 1);  // quadratic advertises H only
  const reduction_report& rep = reports[0];
  CHECK(rep.branch == "smooth");
  CHECK(rep.c == 1.0 / 0.05 * 1.0);  // H^2 / eps with H = 1
  CHECK(rep.checked == 3);
  CHECK(rep.qualifying == 3);  // certificate is exactly zero everywhere
  CHECK(rep.violations == 0);
  CHECK(rep.passed());
}

TEST_CASE("reduction is vacuous when no index qualifies", "[reduction]") {
  trajectory traj;
  traj.schedule.beta = 0.9;
  traj.s = {1.0, 1.0};
  traj.x = {{10.0}, {10.0}};  // gradient norm 10 everywhere
  const quadratic_problem prob(1, 0.0);
  const auto reports = smooth_reduction_check(traj, prob, 0.05, full_grid(2));
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].qualifying == 0);
  CHECK(reports[0].passed());
}

TEST_CASE("reduction branch selection follows the advertised constants",
          "[reduction]") {
  trajectory traj;
  traj.schedule.beta = 0.9;
  traj.s = {1.0};
  traj.x = {zeros(2)};

  const piecewise_quadratic_problem pw(2, 0.0);
  const auto reports = smooth_reduction_check(traj, pw, 0.1, log_grid(1));
  bool saw_second_order = false;
  for (const auto& rep : reports) {
    if (rep.branch == "second_order") {
      saw_second_order = true;
      CHECK(rep.c == 1.0);  // rho / 2 with rho = 2
    }
  }
  CHECK(saw_second_order);

  const scaled_abs_problem sa(2, 0.0);
  CHECK_THROWS_AS(smooth_reduction_check(traj, sa, 0.1, log_grid(1)),
                  std::invalid_argument);  // advertises neither H nor rho
  const quadratic_problem q(2, 0.0);
  CHECK_THROWS_AS(smooth_reduction_check(traj, q, 0.0, log_grid(1)),
                  std::invalid_argument);  // epsilon must be positive
}

// ---------------------------------------------------------------------------
// lambda coefficients
// ---------------------------------------------------------------------------

TEST_CASE("lambda brute force matches the closed two-point value", "[lambda]") {
  CHECK_THAT(lambda_brute_force(2, 2, 0.5, 200), WithinRel(8.0 / 9.0, 1e-12));
  for (int n : {1, 2, 5, 17}) CHECK(lambda_brute_force(n, 1, 0.7, 200) == 0.0);
  CHECK_THROWS_AS(lambda_brute_force(2, 0, 0.5, 200), std::out_of_range);
  CHECK_THROWS_AS(lambda_brute_force(2, 3, 0.5, 200), std::out_of_range);
  CHECK_THROWS_AS(lambda_brute_force(201, 1, 0.5, 300), std::out_of_range);
}

TEST_CASE("summed lambda coefficients respect the discount bound", "[lambda]") {
  const lambda_report rep = lambda_bound_check(0.5, 50);
  CHECK(rep.bound == 48.0);
  CHECK(rep.violations == 0);
  CHECK(rep.passed());
  CHECK(rep.worst_sum > 0.0);
  CHECK(rep.worst_sum <= rep.bound);
  CHECK(rep.worst_t >= 1);
  CHECK_THROWS_AS(lambda_bound_check(0.5, 0), std::out_of_range);
  CHECK_THROWS_AS(lambda_bound_check(0.5, 201), std::out_of_range);
}

// ---------------------------------------------------------------------------
// variance-vs-update bound
// ---------------------------------------------------------------------------

TEST_CASE("witness variance and pairwise bound match hand values", "[variance]") {
  const trajectory traj = two_point_path();
  const exp_weights_t w = exp_weights(2, 0.5);
  CHECK_THAT(detail::witness_variance(traj, w), WithinRel(2.0 / 9.0, 1e-13));
  CHECK_THAT(detail::pairwise_bound(traj, w), WithinRel(4.0 / 9.0, 1e-13));
}

TEST_CASE("variance bound check aggregates over seeds", "[variance]") {
  std::vector<trajectory> trajs(10, two_point_path());
  CHECK_THROWS_AS(variance_bound_check(trajs, 2, random_stream(1), 11),
                  std::invalid_argument);  // not enough seeds

  const variance_report rep = variance_bound_check(trajs, 3, random_stream(1), 10);
  CHECK(rep.seeds == 10);
  CHECK(rep.convexity_checked == 30);
  CHECK(rep.convexity_violations == 0);
  CHECK(rep.convexity_worst_ratio <= 1.0 + 1e-12);
  // lhs sums the witness variances (0 + 2/9), rhs sums 48 * |Delta_n|^2 = 48.
  CHECK_THAT(rep.mc_lhs_mean, WithinRel(2.0 / 9.0, 1e-12));
  CHECK_THAT(rep.mc_rhs_mean, WithinRel(48.0, 1e-12));
  CHECK(rep.mc_gap_se == 0.0);  // identical seeds
  CHECK(rep.mc_pass);
  CHECK(rep.passed());
}

// ---------------------------------------------------------------------------
// exponential scaling identity
// ---------------------------------------------------------------------------

TEST_CASE("scaling identity holds on a quadratic within Monte Carlo error",
          "[scaling]") {
  const quadratic_problem prob(3, 0.0);
  const real_vector x{0.3, -0.2, 0.1};
  const real_vector delta{0.05, 0.02, -0.04};
  const scaling_identity_report rep =
      exp_scaling_identity_mc(prob, x, delta, 20000, random_stream(31));
  CHECK(rep.samples == 20000);
  CHECK(rep.pass);
  CHECK(std::abs(rep.gap_mean) <= 3.0 * rep.gap_se);
  // Closed form: E[lhs] = <x, delta> + |delta|^2 under s ~ Exp(1).
  const double closed = dot(x, delta) + squared_norm(delta);
  CHECK_THAT(rep.rhs_mean, WithinAbs(closed, 20.0 * rep.gap_se + 1e-3));
}

TEST_CASE("scaling identity is exact for a zero update", "[scaling]") {
  const quadratic_problem prob(2, 0.0);
  const scaling_identity_report rep =
      exp_scaling_identity_mc(prob, real_vector{1.0, 2.0}, zeros(2), 10000,
                              random_stream(5));
  CHECK(rep.gap_mean == 0.0);
  CHECK(rep.gap_se == 0.0);
  CHECK(rep.lhs_mean == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("scaling identity demands enough samples", "[scaling]") {
  const quadratic_problem prob(2, 0.0);
  CHECK_THROWS_AS(
      exp_scaling_identity_mc(prob, zeros(2), zeros(2), 9999, random_stream(1)),
      std::invalid_argument);
}
