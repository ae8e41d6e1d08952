#include "irssec/epprgd.hpp"

#include <cmath>

namespace irssec::epprgd {

void EpprgdSettings::validate() const {
  if (!(rho_r0 > 0.0)) throw DomainError("EpprgdSettings: rho_r0 must be positive");
  if (!(c_r > 1.0)) throw DomainError("EpprgdSettings: c_r must exceed 1");
  if (!(tau > 0.0)) throw DomainError("EpprgdSettings: tau must be positive");
  if (!(u_min > 0.0 && u_min < u0)) throw DomainError("EpprgdSettings: need 0 < u_min < u0");
  if (!(eps_r0 > 0.0)) throw DomainError("EpprgdSettings: eps_r0 must be positive");
  if (max_inner < 1 || max_outer < 1) throw DomainError("EpprgdSettings: iteration caps must be >= 1");
}

Eigen::VectorXd penalty_terms(const CVectorXd& x) {
  const Eigen::Index M = x.size();
  const double a = one_bit_amplitude(M);
  Eigen::VectorXd c(4 * M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double re = x(m).real();
    const double im = x(m).imag();
    c(4 * m + 0) = re - a;
    c(4 * m + 1) = im - a;
    c(4 * m + 2) = -re - a;
    c(4 * m + 3) = -im - a;
  }
  return c;
}

double max_residual(const CVectorXd& x) { return penalty_terms(x).maxCoeff(); }

double softplus(double c, double u) { return std::max(c, 0.0) + u * std::log1p(std::exp(-std::abs(c) / u)); }

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SmoothedObjective::SmoothedObjective(const Channels& channels, double rho_r, double u)
    : channels_(&channels), rho_r_(rho_r), u_(u) {
  if (!(rho_r > 0.0)) throw DomainError("SmoothedObjective: rho_r must be positive");
  if (!(u > 0.0)) throw DomainError("SmoothedObjective: u must be positive");
}

double SmoothedObjective::fractional(const CVectorXd& x, const CVectorXd& theta) const {
  const double bob = (bob_channel(*channels_, theta) * x).squaredNorm();
  const double eve = (eve_channel(*channels_, theta) * x).squaredNorm();
  return std::log1p(eve) - std::log1p(bob);
}

double SmoothedObjective::exact_penalty(const CVectorXd& x) const {
  // Same summation order as smoothed_penalty, so the termwise bound survives rounding.
  const Eigen::VectorXd c = penalty_terms(x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) sum += std::max(c(i), 0.0);
  return rho_r_ * sum;
}

double SmoothedObjective::smoothed_penalty(const CVectorXd& x) const {
  const Eigen::VectorXd c = penalty_terms(x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) sum += softplus(c(i), u_);
  return rho_r_ * sum;
}

double SmoothedObjective::value(const CVectorXd& x, const CVectorXd& theta) const {
  return fractional(x, theta) + smoothed_penalty(x);
}

TangentVector SmoothedObjective::euclidean_gradient(const ManifoldPoint& p) const {
  const Channels& ch = *channels_;
  const CMatrixXd Hb = bob_channel(ch, p.theta);
  const CMatrixXd He = eve_channel(ch, p.theta);
  const CVectorXd yb = Hb * p.x;
  const CVectorXd ye = He * p.x;
  const double sb = 1.0 + yb.squaredNorm();
  const double se = 1.0 + ye.squaredNorm();

  TangentVector g;
  g.dx = 2.0 * (He.adjoint() * ye / se - Hb.adjoint() * yb / sb);
  const double a = one_bit_amplitude(p.x.size());
  for (Eigen::Index m = 0; m < p.x.size(); ++m) {
    const double re = p.x(m).real();
    const double im = p.x(m).imag();
    const double d_re = logistic((re - a) / u_) - logistic((-re - a) / u_);
    const double d_im = logistic((im - a) / u_) - logistic((-im - a) / u_);
    g.dx(m) += rho_r_ * cd(d_re, d_im);
  }

  if (ch.N_i() > 0) {
    const CVectorXd cascade = ch.h_ai * p.x;
    const CVectorXd back = ch.h_ie.adjoint() * ye / se - ch.h_ib.adjoint() * yb / sb;
    g.dtheta = 2.0 * cascade.conjugate().cwiseProduct(back);
  } else {
    g.dtheta.resize(0);
  }
  return g;
}

TangentVector SmoothedObjective::riemannian_gradient(const ManifoldPoint& p) const {
  return project_tangent(p, euclidean_gradient(p));
}

double smoothed_value(const SmoothedObjective& obj, const ManifoldPoint& p) { return obj.value(p); }
TangentVector euclidean_gradient(const SmoothedObjective& obj, const ManifoldPoint& p) {
  return obj.euclidean_gradient(p);
}
TangentVector riemannian_gradient(const SmoothedObjective& obj, const ManifoldPoint& p) {
  return obj.riemannian_gradient(p);
}

InnerResult prgd_inner(const SmoothedObjective& obj, const ManifoldPoint& start, double eps_r,
                       const EpprgdSettings& settings, SolverTrace* trace, int outer_index, const Stopwatch* clock,
                       int iteration_offset) {
  auto gradient = [&](const ManifoldPoint& p) {
    TangentVector g = obj.riemannian_gradient(p);
    if (!settings.optimize_theta) g.dtheta.setZero();
    return g;
  };
  auto hook = [&](int iteration, const ManifoldPoint& p, double value, double previous, double alpha, double grad_sq) {
    if (trace == nullptr) return;
    TraceRecord rec;
    rec.iteration = iteration_offset + iteration;
    rec.outer = outer_index;
    rec.objective = value;
    rec.previous_objective = previous;
    rec.step = alpha;
    rec.grad_norm_sq = grad_sq;
    rec.violation = max_residual(p.x);
    rec.secrecy = secrecy_rate(obj.channels(), p.x, p.theta);
    rec.wall_seconds = clock != nullptr ? clock->seconds() : 0.0;
    trace->inner.push_back(rec);
  };
  return riemannian_descent(obj, gradient, start, eps_r, settings.max_inner, settings.armijo, hook);
}

SolveResult solve(const Channels& ch, const EpprgdSettings& settings, const ManifoldPoint& init) {
  settings.validate();
  if (init.x.size() != ch.M() || init.theta.size() != ch.N_i())
    throw DomainError("epprgd::solve: initial point does not match the channel set");
  const Stopwatch clock;
  ManifoldPoint point = init;
  point.x.normalize();
  point.theta = IrsPhases::project(point.theta).vector();

  double rho_r = settings.rho_r0;
  double u = settings.u0;
  double eps_r = settings.eps_r0;

  SolveResult result;
  SolverTrace* trace = settings.record_trace ? &result.trace : nullptr;
  double best_secrecy = -1.0;
  OneBitPrecoder best_x;
  IrsPhases best_theta;
  CVectorXd best_continuous;
  double error_r = max_residual(point.x);

  for (int outer = 0; outer < settings.max_outer; ++outer) {
    const SmoothedObjective obj(ch, rho_r, u);
    const double rho_used = rho_r;
    const double u_used = u;
    InnerResult inner = prgd_inner(obj, point, eps_r, settings, trace, outer, &clock, result.inner_iterations);
    result.inner_iterations += inner.iterations;
    result.outer_iterations = outer + 1;
    point = std::move(inner.point);
    error_r = max_residual(point.x);

    const OneBitPrecoder x_snap = quantize_one_bit(point.x);
    const IrsPhases theta_snap = IrsPhases::project(point.theta);
    const double snapped = secrecy_rate(ch, x_snap, theta_snap);
    if (snapped > best_secrecy) {
      best_secrecy = snapped;
      best_x = x_snap;
      best_theta = theta_snap;
      best_continuous = point.x;
    }

    if (error_r > settings.tau) rho_r *= settings.c_r;
    u *= 0.2;
    eps_r *= 0.1;
    if (trace != nullptr) {
      OuterRecord rec;
      rec.outer = outer;
      rec.inner_iterations = inner.iterations;
      rec.violation = error_r;
      rec.penalty = rho_used;
      rec.smoothing = u_used;
      rec.secrecy = snapped;
      trace->outer.push_back(rec);
    }
    if (error_r <= settings.tau && u <= settings.u_min) {
      result.converged = true;
      break;
    }
  }

  result.violation = error_r;
  if (result.converged) {
    result.x = quantize_one_bit(point.x);
    result.theta = IrsPhases::project(point.theta);
    result.x_continuous = point.x;
    result.secrecy = secrecy_rate(ch, result.x, result.theta);
  } else {
    result.x = best_x;
    result.theta = best_theta;
    result.x_continuous = best_continuous;
    result.secrecy = best_secrecy;
  }
  result.alphabet_flag = alphabet_distance(result.x_continuous) > 1e-3;
  return result;
}

}  // namespace irssec::epprgd
