#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "irssec/types.hpp"

namespace irssec {

/// Point on the complex sphere (x) times the complex circle torus (theta).
template <typename Real>
struct ManifoldPointT {
  CVector<Real> x;
  CVector<Real> theta;
};

/// Element of the tangent space at some base point:
/// Re{dx^H x} = 0 and Re{conj(dtheta_n) theta_n} = 0.
template <typename Real>
struct TangentVectorT {
  CVector<Real> dx;
  CVector<Real> dtheta;
};

using ManifoldPoint = ManifoldPointT<double>;
using TangentVector = TangentVectorT<double>;

/// Direct-sum metric: Re<a_x, b_x> + Re<a_theta, b_theta>.
template <typename Real>
Real inner(const TangentVectorT<Real>& a, const TangentVectorT<Real>& b) {
  return std::real(a.dx.dot(b.dx)) + std::real(a.dtheta.dot(b.dtheta));
}

template <typename Real>
Real norm_squared(const TangentVectorT<Real>& v) {
  return v.dx.squaredNorm() + v.dtheta.squaredNorm();
}

template <typename Real>
TangentVectorT<Real> zero_tangent(const ManifoldPointT<Real>& point) {
  return {CVector<Real>::Zero(point.x.size()), CVector<Real>::Zero(point.theta.size())};
}

template <typename Real>
bool is_zero(const TangentVectorT<Real>& v) {
  return (v.dx.array() == Complex<Real>(0)).all() && (v.dtheta.array() == Complex<Real>(0)).all();
}

/// Orthogonal projection of an ambient vector onto the tangent space at `point`.
template <typename Real>
TangentVectorT<Real> project_tangent(const ManifoldPointT<Real>& point, const CVector<Real>& ambient_x,
                                     const CVector<Real>& ambient_theta) {
  if (ambient_x.size() != point.x.size() || ambient_theta.size() != point.theta.size())
    throw DomainError("project_tangent: shape mismatch");
  TangentVectorT<Real> out;
  out.dx = ambient_x - std::real(ambient_x.dot(point.x)) * point.x;
  out.dtheta.resize(ambient_theta.size());
  for (Eigen::Index n = 0; n < ambient_theta.size(); ++n) {
    const Complex<Real> w = ambient_theta(n);
    out.dtheta(n) = w - std::real(std::conj(w) * point.theta(n)) * point.theta(n);
  }
  return out;
}

template <typename Real>
TangentVectorT<Real> project_tangent(const ManifoldPointT<Real>& point, const TangentVectorT<Real>& ambient) {
  return project_tangent(point, ambient.dx, ambient.dtheta);
}

/// Normalizing retraction of point - alpha * step.
template <typename Real>
ManifoldPointT<Real> retract(const ManifoldPointT<Real>& point, const TangentVectorT<Real>& step, Real alpha) {
  if (!(alpha >= Real(0))) throw DomainError("retract: alpha must be >= 0");
  if (alpha == Real(0) || is_zero(step)) return point;
  ManifoldPointT<Real> out;
  out.x = point.x - alpha * step.dx;
  const Real norm = out.x.norm();
  if (!(norm > Real(0))) throw DegenerateError("retract: sphere candidate is zero");
  out.x /= norm;
  out.theta = point.theta - alpha * step.dtheta;
  for (Eigen::Index n = 0; n < out.theta.size(); ++n) {
    const Real mag = std::abs(out.theta(n));
    if (!(mag > Real(0))) throw DegenerateError("retract: circle candidate is zero");
    out.theta(n) /= mag;
  }
  return out;
}

struct ArmijoSettings {
  double alpha0 = 1.0;
  double contraction = 0.5;
  int max_backtracks = 50;
  // Descent loops start each search at min(alpha0, previous alpha / contraction).
  bool warm_start = false;
};

template <typename Real>
struct ArmijoResult {
  Real alpha = 0;
  ManifoldPointT<Real> point;
  Real value = 0;      // objective at `point`
  int backtracks = 0;  // contractions applied before acceptance
  bool stalled = false;
};

/// Backtracking search accepting the first alpha = alpha0 * contraction^k
/// with f(R(p, -alpha grad)) - f(p) <= -alpha/2 * ‖grad‖^2. On exhaustion
/// returns alpha = 0, the unchanged point and stalled = true.
template <typename Real, typename Objective>
ArmijoResult<Real> armijo_search(const Objective& objective, const ManifoldPointT<Real>& point, Real value,
                                 const TangentVectorT<Real>& grad, const ArmijoSettings& settings = {}) {
  if (!(settings.alpha0 > 0.0)) throw DomainError("armijo_search: alpha0 must be positive");
  if (!(settings.contraction > 0.0 && settings.contraction < 1.0))
    throw DomainError("armijo_search: contraction must lie in (0, 1)");
  const Real grad_sq = norm_squared(grad);
  Real alpha = static_cast<Real>(settings.alpha0);
  for (int k = 0; k <= settings.max_backtracks; ++k) {
    ManifoldPointT<Real> candidate = retract(point, grad, alpha);
    const Real candidate_value = objective(candidate);
    if (candidate_value - value <= -Real(0.5) * alpha * grad_sq) return {alpha, std::move(candidate), candidate_value, k, false};
    alpha *= static_cast<Real>(settings.contraction);
  }
  return {Real(0), point, value, settings.max_backtracks, true};
}

template <typename Real, typename Objective>
ArmijoResult<Real> armijo_search(const Objective& objective, const ManifoldPointT<Real>& point,
                                 const TangentVectorT<Real>& grad, const ArmijoSettings& settings = {}) {
  return armijo_search(objective, point, static_cast<Real>(objective(point)), grad, settings);
}

/// Largest deviation from the manifold constraints.
template <typename Real>
Real manifold_violation(const ManifoldPointT<Real>& point) {
  Real worst = std::abs(point.x.norm() - Real(1));
  for (Eigen::Index n = 0; n < point.theta.size(); ++n) worst = std::max(worst, std::abs(std::abs(point.theta(n)) - Real(1)));
  return worst;
}

/// Largest tangency residual of `v` at `point`.
template <typename Real>
Real tangency_violation(const ManifoldPointT<Real>& point, const TangentVectorT<Real>& v) {
  Real worst = std::abs(std::real(v.dx.dot(point.x)));
  for (Eigen::Index n = 0; n < point.theta.size(); ++n)
    worst = std::max(worst, std::abs(std::real(std::conj(v.dtheta(n)) * point.theta(n))));
  return worst;
}

}  // namespace irssec
