#pragma once

#include "irssec/channel_model.hpp"
#include "irssec/solver_common.hpp"

namespace irssec::epprgd {

struct EpprgdSettings {
  double rho_r0 = 0.1;
  double c_r = 2.0;
  double tau = 1e-5;
  double u0 = 0.5;
  double u_min = 1e-6;
  double eps_r0 = 1e-6;
  int max_inner = 1000;
  int max_outer = 30;
  ArmijoSettings armijo{.warm_start = true};
  bool optimize_theta = true;  // false: theta stays at its initial value
  bool record_trace = true;

  void validate() const;
};

/// The 4M box residuals per entry: Re - a, Im - a, -Re - a, -Im - a.
Eigen::VectorXd penalty_terms(const CVectorXd& x);

/// max over all residuals (error_r).
double max_residual(const CVectorXd& x);

/// u log(1 + exp(c/u)) evaluated as max(c, 0) + u log1p(exp(-|c|/u)).
double softplus(double c, double u);

/// Logistic function; derivative of softplus(c, u) with respect to c at c/u.
double logistic(double z);

/// g_r = f_r + rho_r * sum_i softplus(c_i, u) where
/// f_r = ln((1 + ‖H_e x‖^2) / (1 + ‖H_b x‖^2)).
class SmoothedObjective {
 public:
  SmoothedObjective(const Channels& channels, double rho_r, double u);

  const Channels& channels() const { return *channels_; }
  double rho_r() const { return rho_r_; }
  double u() const { return u_; }

  /// Negative secrecy log-ratio (natural log). Defined on the ambient space.
  double fractional(const CVectorXd& x, const CVectorXd& theta) const;
  /// rho_r * sum_i max(0, c_i).
  double exact_penalty(const CVectorXd& x) const;
  /// rho_r * sum_i softplus(c_i, u).
  double smoothed_penalty(const CVectorXd& x) const;

  double value(const CVectorXd& x, const CVectorXd& theta) const;
  double value(const ManifoldPoint& p) const { return value(p.x, p.theta); }
  double operator()(const ManifoldPoint& p) const { return value(p); }

  /// Gradient under the real inner product Re<., .>, i.e.
  /// g(x + d) ~ g(x) + Re{grad_x^H d_x} + Re{grad_theta^H d_theta}.
  TangentVector euclidean_gradient(const ManifoldPoint& p) const;

  TangentVector riemannian_gradient(const ManifoldPoint& p) const;

 private:
  const Channels* channels_;
  double rho_r_;
  double u_;
};

/// Smoothed value for an explicit point; free-function form of SmoothedObjective::value.
double smoothed_value(const SmoothedObjective& obj, const ManifoldPoint& p);
TangentVector euclidean_gradient(const SmoothedObjective& obj, const ManifoldPoint& p);
TangentVector riemannian_gradient(const SmoothedObjective& obj, const ManifoldPoint& p);

struct InnerResult {
  ManifoldPoint point;
  int iterations = 0;
  double initial_value = 0.0;
  double final_value = 0.0;
  double initial_grad_norm = 0.0;
  double final_grad_norm = 0.0;
  bool stalled = false;
};

/// Riemannian gradient descent with Armijo backtracking until the relative
/// decrease of g_r is <= eps_r, the gradient vanishes, or max_inner.
InnerResult prgd_inner(const SmoothedObjective& obj, const ManifoldPoint& start, double eps_r,
                       const EpprgdSettings& settings, SolverTrace* trace = nullptr, int outer_index = 0,
                       const Stopwatch* clock = nullptr, int iteration_offset = 0);

struct NoStepHook {
  void operator()(int, const ManifoldPoint&, double, double, double, double) const {}
};

/// Generic PRGD loop over any smooth objective on the product manifold.
/// `objective(p)` returns the value, `gradient(p)` the Riemannian gradient.
/// `on_step(iteration, point, value, previous_value, alpha, grad_norm_sq)`
/// fires after every accepted step.
template <typename Objective, typename Gradient, typename StepHook = NoStepHook>
InnerResult riemannian_descent(const Objective& objective, const Gradient& gradient, const ManifoldPoint& start,
                               double eps_r, int max_inner, const ArmijoSettings& armijo,
                               const StepHook& on_step = {}) {
  if (!(eps_r > 0.0)) throw DomainError("riemannian_descent: eps_r must be positive");
  InnerResult r;
  r.point = start;
  double value = objective(r.point);
  r.initial_value = value;
  TangentVector grad = gradient(r.point);
  double grad_sq = norm_squared(grad);
  r.initial_grad_norm = std::sqrt(grad_sq);
  r.final_grad_norm = r.initial_grad_norm;
  ArmijoSettings trial = armijo;
  while (r.iterations < max_inner && r.final_grad_norm > 1e-12) {
    auto step = armijo_search(objective, r.point, value, grad, trial);
    ++r.iterations;
    if (step.stalled) {
      r.stalled = true;
      break;
    }
    const double previous = value;
    r.point = std::move(step.point);
    value = step.value;
    on_step(r.iterations, r.point, value, previous, step.alpha, grad_sq);
    if (armijo.warm_start) trial.alpha0 = std::min(armijo.alpha0, step.alpha / armijo.contraction);
    grad = gradient(r.point);
    grad_sq = norm_squared(grad);
    r.final_grad_norm = std::sqrt(grad_sq);
    if (std::abs(previous - value) <= eps_r * std::abs(previous)) break;
  }
  r.final_value = value;
  return r;
}

/// Outer exact-penalty / smoothing schedule.
SolveResult solve(const Channels& channels, const EpprgdSettings& settings, const ManifoldPoint& init);

}  // namespace irssec::epprgd
