#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "o2nc/problems.hpp"
#include "o2nc/rng.hpp"
#include "o2nc/vec.hpp"

using namespace o2nc;

namespace {

// Uniform point in the ball of the given radius (deterministic stream).
real_vector ball_point(random_stream& rs, std::int64_t d, double radius) {
  real_vector x(static_cast<std::size_t>(d));
  for (double& v : x) v = rs.gaussian();
  const double r = norm(x);
  const double target = radius * std::pow(rs.uniform01(), 1.0 / static_cast<double>(d));
  for (double& v : x) v *= r > 0.0 ? target / r : 0.0;
  return x;
}

// Distance from x to the nearest hidden-unit activation boundary of the MLP,
// in pre-activation units; finite differences need clearance here.
double min_abs_preactivation(const toy_mlp_problem& prob, const real_vector& x) {
  const double* w1 = x.data();
  const double* b1 = x.data() + toy_mlp_problem::kIn * toy_mlp_problem::kHidden;
  double best = std::numeric_limits<double>::infinity();
  for (const real_vector& xin : prob.inputs()) {
    for (std::int64_t h = 0; h < toy_mlp_problem::kHidden; ++h) {
      double s = b1[h];
      const double* row = w1 + h * toy_mlp_problem::kIn;
      for (std::int64_t i = 0; i < toy_mlp_problem::kIn; ++i) {
        s += row[i] * xin[static_cast<std::size_t>(i)];
      }
      best = std::min(best, std::abs(s));
    }
  }
  return best;
}

void check_gradient_against_fd(const problem& prob, const real_vector& x, double tol) {
  const real_vector g = prob.gradient(x);
  const real_vector fd = finite_difference_gradient(prob, x);
  REQUIRE(distance(g, fd) <= tol * std::max(1.0, norm(g)));
}

}  // namespace

// ---------------------------------------------------------------------------
// quadratic
// ---------------------------------------------------------------------------

TEST_CASE("quadratic value, gradient, and start point", "[problems][quadratic]") {
  const quadratic_problem prob(4, 0.0);
  CHECK(prob.value(real_vector{1.0, 0.0, 0.0, 0.0}) == 0.5);
  CHECK(prob.value(zeros(4)) == 0.0);
  const real_vector x{0.25, -1.0, 2.0, 0.5};
  CHECK(prob.gradient(x) == x);  // grad F = x exactly
  CHECK(prob.start_point() == real_vector{0.5, 0.5, 0.5, 0.5});
  CHECK(prob.value(prob.start_point()) == 0.5);

  const problem_constants& k = prob.constants();
  CHECK(k.lipschitz_g == 2.0);
  CHECK(k.fstar == 0.5);
  CHECK(k.domain_radius == 2.0);
  REQUIRE(k.smooth_h.has_value());
  CHECK(*k.smooth_h == 1.0);
  CHECK_FALSE(k.second_order_rho.has_value());

  REQUIRE(prob.has_hessian());
  const real_vector u{1.0, -2.0, 0.0, 3.0};
  CHECK(prob.hessian_apply(x, u) == u);
  CHECK_FALSE(prob.holdout_value(x).has_value());
}

TEST_CASE("problems reject malformed inputs", "[problems]") {
  const quadratic_problem prob(4, 0.0);
  CHECK_THROWS_AS(prob.value(zeros(3)), std::invalid_argument);
  CHECK_THROWS_AS(prob.gradient(real_vector{1.0, std::nan(""), 0.0, 0.0}), std::domain_error);
}

// ---------------------------------------------------------------------------
// scaled_abs
// ---------------------------------------------------------------------------

TEST_CASE("scaled_abs with zero curvature is the pure scaled absolute value",
          "[problems][scaled_abs]") {
  const scaled_abs_problem prob(3, 0.0, /*a=*/1.0, /*lambda=*/0.0);
  CHECK(prob.value(real_vector{2.0, -5.0, 1.0}) == 2.0);
  CHECK(prob.value(real_vector{-0.5, 0.0, 0.0}) == 0.5);
  CHECK(prob.gradient(real_vector{2.0, -5.0, 1.0}) == real_vector{1.0, 0.0, 0.0});
  CHECK(prob.gradient(real_vector{-0.5, 3.0, 0.0}) == real_vector{-1.0, 0.0, 0.0});
  // Designated subgradient at the kink: sign(0) = 0.
  CHECK(prob.gradient(real_vector{0.0, 7.0, -2.0}) == zeros(3));
  CHECK(prob.constants().lipschitz_g == 1.0);
}

TEST_CASE("scaled_abs curvature saturates beyond r_sat", "[problems][scaled_abs]") {
  const scaled_abs_problem prob(3, 0.0);  // a=1, lambda=0.1, r_sat=10
  CHECK_THAT(prob.value(real_vector{2.0, 0.0, 0.0}),
             Catch::Matchers::WithinAbs(2.0 + 0.05 * 4.0, 1e-15));
  // Beyond the saturation radius the quadratic grows linearly...
  CHECK_THAT(prob.value(real_vector{0.0, 20.0, 0.0}),
             Catch::Matchers::WithinAbs(0.1 * 10.0 * 20.0 - 0.05 * 100.0, 1e-12));
  // ...and the gradient norm stays capped at lambda * r_sat (plus a).
  const real_vector far = prob.gradient(real_vector{0.0, 20.0, 0.0});
  CHECK_THAT(far[1], Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK(prob.constants().lipschitz_g == 2.0);

  // Global Lipschitz property, sampled inside and outside the ball.
  random_stream rs(11);
  for (int i = 0; i < 2000; ++i) {
    const real_vector x = ball_point(rs, 3, 15.0);
    const real_vector y = ball_point(rs, 3, 15.0);
    REQUIRE(std::abs(prob.value(x) - prob.value(y)) <=
            prob.constants().lipschitz_g * distance(x, y) * (1.0 + 1e-12) + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// piecewise_quadratic
// ---------------------------------------------------------------------------

TEST_CASE("piecewise_quadratic pieces, seam, and hessian", "[problems][piecewise]") {
  const piecewise_quadratic_problem prob(2, 0.0);  // kappa = 0.25, b = e1
  CHECK(prob.value(real_vector{1.0, 0.0}) == 0.0);  // minimizer
  CHECK_THAT(prob.value(real_vector{-1.0, 0.0}),
             Catch::Matchers::WithinAbs(2.0 + 0.125, 1e-15));
  CHECK(prob.gradient(real_vector{-1.0, 0.0}) == real_vector{-2.25, 0.0});
  CHECK(prob.gradient(real_vector{3.0, -2.0}) == real_vector{2.0, -2.0});

  // C^1 across the seam: one-sided gradients agree at x1 = 0.
  CHECK(prob.gradient(real_vector{0.0, 5.0}) == real_vector{-1.0, 5.0});

  REQUIRE(prob.has_hessian());
  const real_vector u{1.0, 1.0};
  CHECK(prob.hessian_apply(real_vector{2.0, 0.0}, u) == real_vector{1.0, 1.0});
  CHECK(prob.hessian_apply(real_vector{-2.0, 0.0}, u) == real_vector{1.25, 1.0});

  const problem_constants& k = prob.constants();
  REQUIRE(k.smooth_h.has_value());
  CHECK(*k.smooth_h == 1.25);
  REQUIRE(k.second_order_rho.has_value());
  CHECK(*k.second_order_rho == 2.0);
  CHECK(k.lipschitz_g == 13.5);
}

TEST_CASE("piecewise_quadratic is exactly quadratic on each piece",
          "[problems][piecewise]") {
  const piecewise_quadratic_problem prob(5, 0.0);
  random_stream rs(21);
  const double kappa = 0.25;
  for (int i = 0; i < 2000; ++i) {
    real_vector x = ball_point(rs, 5, 8.0);
    real_vector y = ball_point(rs, 5, 8.0);
    const real_vector gx = prob.gradient(x);
    const real_vector gy = prob.gradient(y);
    // Gradient Lipschitz bound H = 1 + kappa, everywhere.
    REQUIRE(distance(gx, gy) <= (1.0 + kappa) * distance(x, y) * (1.0 + 1e-12));
    // Second-order Taylor from x is exact while staying on one piece, and the
    // residual is bounded by the kappa * |y1 - x1| seam jump otherwise.
    real_vector taylor = gx;
    axpy(1.0, prob.hessian_apply(x, sub(y, x)), taylor);
    const double residual = distance(gy, taylor);
    if ((x[0] >= 0.0) == (y[0] >= 0.0)) {
      REQUIRE(residual <= 1e-12);
    } else {
      REQUIRE(residual <= kappa * std::abs(y[0] - x[0]) * (1.0 + 1e-12));
    }
  }
}

// ---------------------------------------------------------------------------
// toy_mlp
// ---------------------------------------------------------------------------

TEST_CASE("toy_mlp dataset is a pure function of the stream", "[problems][mlp]") {
  const random_stream root(9);
  const toy_mlp_problem a(0.0, substream(root, stream_role::dataset));
  const toy_mlp_problem b(0.0, substream(root, stream_role::dataset));
  REQUIRE(a.inputs().size() == 320);
  REQUIRE(a.labels().size() == 320);
  CHECK(a.inputs() == b.inputs());
  CHECK(a.labels() == b.labels());
  CHECK(a.start_point() == b.start_point());

  for (const real_vector& xin : a.inputs()) {
    REQUIRE(xin.size() == 4);
    REQUIRE_THAT(norm(xin), Catch::Matchers::WithinAbs(2.0, 1e-12));
  }
  for (double y : a.labels()) REQUIRE((y == 1.0 || y == -1.0));
  CHECK_THAT(norm(a.start_point()), Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK(a.dim() == 97);
  CHECK(a.constants().fstar == a.value(a.start_point()));

  const toy_mlp_problem other(0.0, substream(random_stream(10), stream_role::dataset));
  CHECK(other.inputs() != a.inputs());
}

TEST_CASE("toy_mlp exposes a holdout loss", "[problems][mlp]") {
  const toy_mlp_problem prob(0.0, substream(random_stream(9), stream_role::dataset));
  const real_vector& x0 = prob.start_point();
  const std::optional<double> held = prob.holdout_value(x0);
  REQUIRE(held.has_value());
  CHECK(*held > 0.0);
  CHECK(*held != prob.value(x0));
  // Near-zero parameters give the logistic loss of a near-zero score.
  const double at_zero = prob.value(zeros(97));
  CHECK_THAT(at_zero, Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
}

// ---------------------------------------------------------------------------
// gradients vs finite differences
// ---------------------------------------------------------------------------

TEST_CASE("gradients match central finite differences away from kinks",
          "[problems][fd]") {
  random_stream rs(33);

  const quadratic_problem quad(6, 0.0);
  for (int i = 0; i < 100; ++i) {
    check_gradient_against_fd(quad, ball_point(rs, 6, 1.8), 1e-6);
  }

  const scaled_abs_problem sabs(6, 0.0);
  for (int i = 0; i < 100; ++i) {
    real_vector x = ball_point(rs, 6, 9.0);
    if (std::abs(x[0]) < 1e-3) x[0] = 0.5;  // clear of the kink plane
    check_gradient_against_fd(sabs, x, 1e-6);
  }

  const piecewise_quadratic_problem pw(6, 0.0);
  for (int i = 0; i < 100; ++i) {
    real_vector x = ball_point(rs, 6, 9.0);
    if (std::abs(x[0]) < 1e-3) x[0] = -0.5;
    check_gradient_against_fd(pw, x, 1e-6);
  }

  const toy_mlp_problem mlp(0.0, substream(random_stream(9), stream_role::dataset));
  int checked = 0;
  while (checked < 20) {
    real_vector x(97);
    for (double& v : x) v = 0.3 * rs.gaussian();
    if (min_abs_preactivation(mlp, x) < 1e-3) continue;  // FD needs clearance
    check_gradient_against_fd(mlp, x, 1e-6);
    ++checked;
  }
}

// ---------------------------------------------------------------------------
// advertised constants, sampled
// ---------------------------------------------------------------------------

TEST_CASE("gradient norms respect the advertised G on the domain",
          "[problems][constants]") {
  random_stream rs(55);
  const random_stream root(9);
  const quadratic_problem quad(5, 0.0);
  const scaled_abs_problem sabs(5, 0.0);
  const piecewise_quadratic_problem pw(5, 0.0);
  const toy_mlp_problem mlp(0.0, substream(root, stream_role::dataset));
  const problem* probs[] = {&quad, &sabs, &pw, &mlp};
  for (const problem* prob : probs) {
    const double g_max = prob->constants().lipschitz_g;
    const double radius = prob->constants().domain_radius;
    const int samples = prob == &mlp ? 500 : 10000;
    for (int i = 0; i < samples; ++i) {
      const real_vector x = ball_point(rs, prob->dim(), radius);
      REQUIRE(norm(prob->gradient(x)) <= g_max * (1.0 + 1e-12));
    }
    REQUIRE(norm(prob->start_point()) <= radius);
  }
}

// ---------------------------------------------------------------------------
// stochastic gradients
// ---------------------------------------------------------------------------

TEST_CASE("stochastic gradient noise has the advertised second moment",
          "[problems][noise][stat]") {
  const double sigma = 0.3;
  const quadratic_problem prob(5, sigma);
  const real_vector x{0.1, -0.2, 0.3, 0.0, 1.0};
  const real_vector exact = prob.gradient(x);
  random_stream noise(101);
  const long k = 20000;
  double mean_sq = 0.0;
  for (long i = 0; i < k; ++i) {
    const real_vector g = stochastic_gradient(prob, x, noise);
    mean_sq += squared_norm(sub(g, exact));
  }
  mean_sq /= static_cast<double>(k);
  CHECK_THAT(mean_sq, Catch::Matchers::WithinRel(sigma * sigma, 0.05));
}

TEST_CASE("zero noise level consumes no randomness", "[problems][noise]") {
  const quadratic_problem prob(4, 0.0);
  random_stream noise(7);
  const real_vector x{1.0, 2.0, 3.0, 4.0};
  const real_vector g = stochastic_gradient(prob, x, noise);
  CHECK(g == x);
  CHECK(noise.position() == 0);
}

// ---------------------------------------------------------------------------
// factory
// ---------------------------------------------------------------------------

TEST_CASE("problem factory builds by id and validates dimensions", "[problems][factory]") {
  run_config cfg;
  cfg.n = 10;
  cfg.d = 8;
  cfg.seed = 3;
  cfg.problem = "quadratic";
  cfg.algorithm = "eo2nc";
  cfg.sigma = 0.1;
  const random_stream root(cfg.seed);
  CHECK(make_problem(cfg, root)->id() == "quadratic");
  cfg.problem = "scaled_abs";
  CHECK(make_problem(cfg, root)->id() == "scaled_abs");
  cfg.problem = "piecewise_quadratic";
  CHECK(make_problem(cfg, root)->id() == "piecewise_quadratic");
  cfg.problem = "toy_mlp";
  CHECK_THROWS_AS(make_problem(cfg, root), config_error);  // d != 97
  cfg.d = 97;
  const auto mlp = make_problem(cfg, root);
  CHECK(mlp->id() == "toy_mlp");
  CHECK(mlp->constants().sigma == 0.1);

  // Same seed, same dataset: values agree bit for bit across factory calls.
  const auto mlp2 = make_problem(cfg, root);
  CHECK(mlp->value(mlp->start_point()) == mlp2->value(mlp2->start_point()));
}
