#pragma once

// Benchmark objectives.  Each problem designates, at every point, a single
// (sub)gradient — deterministic tie-breaking at kinks — and advertises the
// constants the schedule and the certificates consume: Lipschitz bound G,
// noise level sigma, optimality gap bound F*, a designated domain radius,
// and, where meaningful, a gradient-Lipschitz constant H or a Hessian
// deviation constant rho.
//
// Stochastic gradients are the exact gradient plus isotropic Gaussian noise
// with E|xi|^2 = sigma^2 (per-component variance sigma^2/d).

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "o2nc/config.hpp"
#include "o2nc/rng.hpp"
#include "o2nc/vec.hpp"

namespace o2nc {

struct problem_constants {
  double lipschitz_g = 0.0;               // sup of |gradient| on the domain
  double sigma = 0.0;                     // noise level
  double fstar = 0.0;                     // upper bound on F(x0) - inf F
  double domain_radius = 0.0;             // designated ball around the origin
  std::optional<double> smooth_h;         // gradient Lipschitz constant
  std::optional<double> second_order_rho; // Hessian deviation constant
};

class problem {
 public:
  virtual ~problem() = default;

  virtual const std::string& id() const = 0;
  virtual std::int64_t dim() const = 0;
  virtual double value(const real_vector& x) const = 0;
  virtual real_vector gradient(const real_vector& x) const = 0;
  virtual const real_vector& start_point() const = 0;
  virtual const problem_constants& constants() const = 0;

  // Hessian-vector product where the problem exposes one (needed only to
  // sample-validate an advertised rho or H).
  virtual bool has_hessian() const { return false; }
  virtual real_vector hessian_apply(const real_vector&, const real_vector&) const {
    throw std::logic_error(id() + ": no hessian available");
  }

  // Loss on held-out data, for problems that carry any.
  virtual std::optional<double> holdout_value(const real_vector&) const {
    return std::nullopt;
  }

 protected:
  void check_input(const real_vector& x) const {
    if (static_cast<std::int64_t>(x.size()) != dim()) {
      throw std::invalid_argument(id() + ": expected dimension " +
                                  std::to_string(dim()) + ", got " +
                                  std::to_string(x.size()));
    }
    require_finite(x, id().c_str());
  }
};

// g(x) + xi, xi ~ N(0, (sigma^2/d) I); sigma = 0 returns the exact gradient
// without consuming randomness.
inline real_vector stochastic_gradient(const problem& prob, const real_vector& x,
                                       random_stream& noise) {
  real_vector g = prob.gradient(x);
  const double sigma = prob.constants().sigma;
  if (sigma > 0.0) {
    const double per_comp = sigma / std::sqrt(static_cast<double>(g.size()));
    for (double& gi : g) gi += per_comp * noise.gaussian();
  }
  return g;
}

// Central finite differences, an oracle for gradient implementations.
inline real_vector finite_difference_gradient(const problem& prob, const real_vector& x,
                                              double h = 1e-5) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  real_vector out(x.size());
  real_vector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = prob.value(probe);
    probe[i] = xi - h;
    const double fm = prob.value(probe);
    probe[i] = xi;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

namespace detail {

inline real_vector normalized_ones(std::int64_t d) {
  real_vector x(static_cast<std::size_t>(d), 1.0 / std::sqrt(static_cast<double>(d)));
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// quadratic:  F(x) = 0.5 |x|^2
// ---------------------------------------------------------------------------
class quadratic_problem final : public problem {
 public:
  quadratic_problem(std::int64_t d, double sigma) : d_(d), x0_(detail::normalized_ones(d)) {
    constants_.lipschitz_g = kDomainRadius;  // |grad| = |x| <= radius
    constants_.sigma = sigma;
    constants_.fstar = 0.5;  // F(x0) = 1/2, inf F = 0
    constants_.domain_radius = kDomainRadius;
    constants_.smooth_h = 1.0;
  }

  const std::string& id() const override {
    static const std::string name = "quadratic";
    return name;
  }
  std::int64_t dim() const override { return d_; }

  double value(const real_vector& x) const override {
    check_input(x);
    return 0.5 * squared_norm(x);
  }

  real_vector gradient(const real_vector& x) const override {
    check_input(x);
    return x;
  }

  bool has_hessian() const override { return true; }
  real_vector hessian_apply(const real_vector& x, const real_vector& u) const override {
    check_input(x);
    check_input(u);
    return u;
  }

  const real_vector& start_point() const override { return x0_; }
  const problem_constants& constants() const override { return constants_; }

  static constexpr double kDomainRadius = 2.0;

 private:
  std::int64_t d_;
  real_vector x0_;
  problem_constants constants_;
};

// ---------------------------------------------------------------------------
// scaled_abs:  F(x) = a |<v, x>| + q(|x|)  with v = e1 and q a saturated
// quadratic (slope capped at lambda * r_sat beyond radius r_sat), so F stays
// globally Lipschitz.  The designated subgradient at the kink <v, x> = 0
// takes sign(0) = 0.
// ---------------------------------------------------------------------------
class scaled_abs_problem final : public problem {
 public:
  scaled_abs_problem(std::int64_t d, double sigma, double a = 1.0, double lambda = 0.1,
                     double r_sat = 10.0)
      : d_(d), a_(a), lambda_(lambda), r_sat_(r_sat), x0_(detail::normalized_ones(d)) {
    if (!(a >= 0.0) || !(lambda >= 0.0) || !(r_sat > 0.0)) {
      throw std::invalid_argument("scaled_abs: parameters must be nonnegative, r_sat > 0");
    }
    constants_.lipschitz_g = a_ + lambda_ * r_sat_;
    constants_.sigma = sigma;
    constants_.domain_radius = 10.0;
    constants_.fstar = value_unchecked(x0_);  // inf F = F(0) = 0
  }

  const std::string& id() const override {
    static const std::string name = "scaled_abs";
    return name;
  }
  std::int64_t dim() const override { return d_; }

  double value(const real_vector& x) const override {
    check_input(x);
    return value_unchecked(x);
  }

  real_vector gradient(const real_vector& x) const override {
    check_input(x);
    real_vector g(x.size(), 0.0);
    const double inner = x[0];  // <v, x> with v = e1
    const double sgn = inner > 0.0 ? 1.0 : (inner < 0.0 ? -1.0 : 0.0);
    g[0] = a_ * sgn;
    if (lambda_ > 0.0) {
      const double r = norm(x);
      const double coef = r <= r_sat_ ? lambda_ : lambda_ * r_sat_ / r;
      for (std::size_t i = 0; i < x.size(); ++i) g[i] += coef * x[i];
    }
    return g;
  }

  const real_vector& start_point() const override { return x0_; }
  const problem_constants& constants() const override { return constants_; }

 private:
  double value_unchecked(const real_vector& x) const {
    double out = a_ * std::abs(x[0]);
    if (lambda_ > 0.0) {
      const double r = norm(x);
      out += r <= r_sat_ ? 0.5 * lambda_ * r * r
                         : lambda_ * r_sat_ * r - 0.5 * lambda_ * r_sat_ * r_sat_;
    }
    return out;
  }

  std::int64_t d_;
  double a_;
  double lambda_;
  double r_sat_;
  real_vector x0_;
  problem_constants constants_;
};

// ---------------------------------------------------------------------------
// piecewise_quadratic:  F(x) = 0.5 |x - b|^2 + (kappa/2) min(x1, 0)^2 with
// b = e1.  Two quadratic pieces glued C^1 along x1 = 0; the Hessian jumps by
// kappa across the seam, and the advertised rho treats that jump as a
// second-order deviation at the seam scale.
// ---------------------------------------------------------------------------
class piecewise_quadratic_problem final : public problem {
 public:
  piecewise_quadratic_problem(std::int64_t d, double sigma, double kappa = 0.25)
      : d_(d), kappa_(kappa), x0_(detail::normalized_ones(d)),
        b_(zeros(static_cast<std::size_t>(d))) {
    if (!(kappa >= 0.0)) throw std::invalid_argument("piecewise_quadratic: kappa >= 0");
    b_[0] = 1.0;
    constants_.sigma = sigma;
    constants_.domain_radius = 10.0;
    // |grad| <= |x - b| + kappa |x1| <= (radius + |b|) + kappa * radius
    constants_.lipschitz_g = constants_.domain_radius + 1.0 + kappa_ * constants_.domain_radius;
    constants_.smooth_h = 1.0 + kappa_;
    constants_.second_order_rho = 2.0;
    constants_.fstar = value_unchecked(x0_);  // inf F = F(b) = 0
  }

  const std::string& id() const override {
    static const std::string name = "piecewise_quadratic";
    return name;
  }
  std::int64_t dim() const override { return d_; }

  double value(const real_vector& x) const override {
    check_input(x);
    return value_unchecked(x);
  }

  real_vector gradient(const real_vector& x) const override {
    check_input(x);
    real_vector g = sub(x, b_);
    g[0] += kappa_ * std::min(x[0], 0.0);
    return g;
  }

  bool has_hessian() const override { return true; }
  real_vector hessian_apply(const real_vector& x, const real_vector& u) const override {
    check_input(x);
    check_input(u);
    real_vector out = u;
    if (x[0] < 0.0) out[0] += kappa_ * u[0];
    return out;
  }

  const real_vector& start_point() const override { return x0_; }
  const problem_constants& constants() const override { return constants_; }

 private:
  double value_unchecked(const real_vector& x) const {
    const double m = std::min(x[0], 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - b_[i];
      acc += diff * diff;
    }
    return 0.5 * acc + 0.5 * kappa_ * m * m;
  }

  std::int64_t d_;
  double kappa_;
  real_vector x0_;
  real_vector b_;
  problem_constants constants_;
};

// ---------------------------------------------------------------------------
// toy_mlp:  two-layer ReLU network (4 -> 16 -> 1), mean logistic loss on a
// fixed synthetic binary classification set.  The data — inputs on the
// radius-2 sphere, labels from a random linear teacher with 5% flips — and
// the start point are generated from the dataset substream of the run seed,
// so the task is a pure function of the seed.  Of the 320 generated points,
// the first 256 form the training objective and the final 64 (20%) are a
// holdout reported separately.  ReLU'(0) = 0 is the designated choice.
// ---------------------------------------------------------------------------
class toy_mlp_problem final : public problem {
 public:
  static constexpr std::int64_t kIn = 4;
  static constexpr std::int64_t kHidden = 16;
  static constexpr std::int64_t kParams = kIn * kHidden + kHidden + kHidden + 1;  // 97
  static constexpr std::int64_t kTrain = 256;
  static constexpr std::int64_t kHoldout = 64;

  toy_mlp_problem(double sigma, random_stream dataset_stream) {
    // Teacher direction.
    real_vector teacher(kIn);
    for (double& t : teacher) t = dataset_stream.gaussian();
    const double tn = norm(teacher);
    for (double& t : teacher) t /= tn > 0.0 ? tn : 1.0;

    const std::int64_t total = kTrain + kHoldout;
    inputs_.resize(static_cast<std::size_t>(total));
    labels_.resize(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) {
      real_vector xin(kIn);
      for (double& v : xin) v = dataset_stream.gaussian();
      const double xn = norm(xin);
      for (double& v : xin) v = 2.0 * v / (xn > 0.0 ? xn : 1.0);
      double y = dot(teacher, xin) >= 0.0 ? 1.0 : -1.0;
      if (dataset_stream.uniform01() < 0.05) y = -y;  // label noise
      inputs_[static_cast<std::size_t>(i)] = std::move(xin);
      labels_[static_cast<std::size_t>(i)] = y;
    }

    x0_.resize(kParams);
    for (double& w : x0_) w = dataset_stream.gaussian();
    const double wn = norm(x0_);
    for (double& w : x0_) w = 0.5 * w / (wn > 0.0 ? wn : 1.0);

    constants_.sigma = sigma;
    constants_.domain_radius = 5.0;
    // With |theta| <= 5 and inputs of norm 2, per-point gradient norms are
    // bounded by sqrt((2*5+5)^2 + 1 + (2*5)^2 + 5^2) = sqrt(351) < 19.
    constants_.lipschitz_g = 19.0;
    constants_.fstar = mean_loss(x0_, 0, kTrain);  // loss >= 0, so inf F >= 0
  }

  const std::string& id() const override {
    static const std::string name = "toy_mlp";
    return name;
  }
  std::int64_t dim() const override { return kParams; }

  double value(const real_vector& x) const override {
    check_input(x);
    return mean_loss(x, 0, kTrain);
  }

  std::optional<double> holdout_value(const real_vector& x) const override {
    check_input(x);
    return mean_loss(x, kTrain, kTrain + kHoldout);
  }

  real_vector gradient(const real_vector& x) const override {
    check_input(x);
    real_vector g(static_cast<std::size_t>(kParams), 0.0);
    const double* w1 = x.data();                       // kHidden x kIn, row-major
    const double* b1 = x.data() + kIn * kHidden;       // kHidden
    const double* w2 = b1 + kHidden;                   // kHidden
    const double b2 = *(w2 + kHidden);
    double* gw1 = g.data();
    double* gb1 = g.data() + kIn * kHidden;
    double* gw2 = gb1 + kHidden;
    double* gb2 = gw2 + kHidden;

    double pre[kHidden];
    double act[kHidden];
    const double inv_n = 1.0 / static_cast<double>(kTrain);
    for (std::int64_t p = 0; p < kTrain; ++p) {
      const real_vector& xin = inputs_[static_cast<std::size_t>(p)];
      const double y = labels_[static_cast<std::size_t>(p)];
      double f = b2;
      for (std::int64_t h = 0; h < kHidden; ++h) {
        double s = b1[h];
        const double* row = w1 + h * kIn;
        for (std::int64_t i = 0; i < kIn; ++i) s += row[i] * xin[static_cast<std::size_t>(i)];
        pre[h] = s;
        act[h] = s > 0.0 ? s : 0.0;
        f += w2[h] * act[h];
      }
      // d/df of log(1 + exp(-y f)) = -y * sigmoid(-y f), computed stably.
      const double z = y * f;
      const double dldf = -y * (z > 0.0 ? std::exp(-z) / (1.0 + std::exp(-z))
                                        : 1.0 / (1.0 + std::exp(z)));
      const double coef = inv_n * dldf;
      for (std::int64_t h = 0; h < kHidden; ++h) {
        gw2[h] += coef * act[h];
        if (pre[h] > 0.0) {  // ReLU'(0) = 0
          const double dpre = coef * w2[h];
          gb1[h] += dpre;
          double* grow = gw1 + h * kIn;
          for (std::int64_t i = 0; i < kIn; ++i) grow[i] += dpre * xin[static_cast<std::size_t>(i)];
        }
      }
      *gb2 += coef;
    }
    return g;
  }

  const real_vector& start_point() const override { return x0_; }
  const problem_constants& constants() const override { return constants_; }

  const std::vector<real_vector>& inputs() const { return inputs_; }
  const std::vector<double>& labels() const { return labels_; }

 private:
  double mean_loss(const real_vector& x, std::int64_t lo, std::int64_t hi) const {
    const double* w1 = x.data();
    const double* b1 = x.data() + kIn * kHidden;
    const double* w2 = b1 + kHidden;
    const double b2 = *(w2 + kHidden);
    double total = 0.0;
    for (std::int64_t p = lo; p < hi; ++p) {
      const real_vector& xin = inputs_[static_cast<std::size_t>(p)];
      double f = b2;
      for (std::int64_t h = 0; h < kHidden; ++h) {
        double s = b1[h];
        const double* row = w1 + h * kIn;
        for (std::int64_t i = 0; i < kIn; ++i) s += row[i] * xin[static_cast<std::size_t>(i)];
        if (s > 0.0) f += w2[h] * s;
      }
      const double z = labels_[static_cast<std::size_t>(p)] * f;
      // log(1 + exp(-z)) without overflow on either tail.
      total += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
    }
    return total / static_cast<double>(hi - lo);
  }

  std::vector<real_vector> inputs_;
  std::vector<double> labels_;
  real_vector x0_;
  problem_constants constants_;
};

// Builds the problem named by cfg.  The dataset substream of `root` seeds any
// synthetic data, so the same (seed, problem) pair always yields the same task.
inline std::unique_ptr<problem> make_problem(const run_config& cfg,
                                             const random_stream& root) {
  if (cfg.problem == "quadratic") {
    return std::make_unique<quadratic_problem>(cfg.d, cfg.sigma);
  }
  if (cfg.problem == "scaled_abs") {
    return std::make_unique<scaled_abs_problem>(cfg.d, cfg.sigma);
  }
  if (cfg.problem == "piecewise_quadratic") {
    return std::make_unique<piecewise_quadratic_problem>(cfg.d, cfg.sigma);
  }
  if (cfg.problem == "toy_mlp") {
    if (cfg.d != toy_mlp_problem::kParams) {
      throw config_error(0, "toy_mlp: d must equal " +
                                std::to_string(toy_mlp_problem::kParams) +
                                " (fixed 4-16-1 architecture)");
    }
    return std::make_unique<toy_mlp_problem>(cfg.sigma, substream(root, stream_role::dataset));
  }
  throw config_error(0, "unknown problem id '" + cfg.problem + "'");
}

}  // namespace o2nc
