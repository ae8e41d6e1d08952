#include "irssec/wmmse_pdd.hpp"

#include <cmath>
#include <numbers>
#include <limits>
#include <string>

namespace irssec {

ManifoldPoint random_initial_point(Eigen::Index M, Eigen::Index N_i, std::uint64_t seed) {
  ManifoldPoint p;
  Rng rng_x(derive_seed(seed, {string_key("x0")}));
  p.x = quantize_one_bit(complex_gaussian<double>(M, 1, rng_x).col(0)).vector();
  Rng rng_theta(derive_seed(seed, {string_key("theta0")}));
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  p.theta.resize(N_i);
  for (Eigen::Index n = 0; n < N_i; ++n) p.theta(n) = std::polar(1.0, phase(rng_theta));
  return p;
}

namespace pdd {

namespace {

struct Composite {
  CMatrixXd bob;
  CMatrixXd eve;
};

Composite composite(const PddState& s, const Channels& ch) { return {bob_channel(ch, s.theta), eve_channel(ch, s.theta)}; }

void check_dims(const PddState& s, const Channels& ch) {
  if (s.x.size() != ch.M() || s.t.size() != ch.M() || s.dual_t.size() != ch.M() || s.v.size() != ch.N_b() ||
      s.theta.size() != ch.N_i() || s.phi.size() != ch.N_i() || s.dual_phi.size() != ch.N_i())
    throw DomainError("PddState dimensions do not match the channel set");
}

}  // namespace

PddState PddState::initial(const ManifoldPoint& start, Eigen::Index N_b, double rho) {
  PddState s;
  s.x = start.x;
  s.theta = start.theta;
  s.t = start.x;
  s.phi = start.theta;
  s.v = CVectorXd::Zero(N_b);
  s.dual_t = CVectorXd::Zero(start.x.size());
  s.dual_phi = CVectorXd::Zero(start.theta.size());
  s.rho = rho;
  return s;
}

void PddSettings::validate() const {
  if (!(rho0 > 0.0)) throw DomainError("PddSettings: rho0 must be positive");
  if (!(c > 0.0 && c < 1.0)) throw DomainError("PddSettings: c must lie in (0, 1)");
  if (!(eta0 > 0.0)) throw DomainError("PddSettings: eta0 must be positive");
  if (!(eta_min > 0.0)) throw DomainError("PddSettings: eta_min must be positive");
  if (!(eps0 > 0.0)) throw DomainError("PddSettings: eps0 must be positive");
  if (max_inner < 1 || max_outer < 1) throw DomainError("PddSettings: iteration caps must be >= 1");
}

double wmmse_objective(const PddState& s, const Channels& ch) {
  check_dims(s, ch);
  if (!(s.w_b > 0.0 && s.w_e > 0.0)) throw DomainError("wmmse_objective: weights must be positive");
  const Composite H = composite(s, ch);
  const cd vhx = s.v.dot(H.bob * s.x);  // v^H H_b x
  const double mse = std::norm(1.0 - vhx) + s.v.squaredNorm();
  const double eve_power = 1.0 + (H.eve * s.x).squaredNorm();
  return s.w_b * mse - std::log(s.w_b) + s.w_e * eve_power - std::log(s.w_e);
}

double augmented_lagrangian(const PddState& s, const Channels& ch) {
  if (!(s.rho > 0.0)) throw DomainError("augmented_lagrangian: rho must be positive");
  const double pen_t = (s.t - s.x + s.rho * s.dual_t).squaredNorm();
  const double pen_phi = (s.phi - s.theta + s.rho * s.dual_phi).squaredNorm();
  return wmmse_objective(s, ch) + (pen_t + pen_phi) / (2.0 * s.rho);
}

double constraint_error(const PddState& s) {
  double e = s.x.size() > 0 ? (s.t - s.x).cwiseAbs().maxCoeff() : 0.0;
  if (s.theta.size() > 0) e = std::max(e, (s.phi - s.theta).cwiseAbs().maxCoeff());
  return e;
}

std::pair<double, double> update_w(const PddState& s, const Channels& ch) {
  check_dims(s, ch);
  const Composite H = composite(s, ch);
  const cd vhx = s.v.dot(H.bob * s.x);
  const double mse = std::norm(1.0 - vhx) + s.v.squaredNorm();
  const double eve_power = 1.0 + (H.eve * s.x).squaredNorm();
  constexpr double floor = std::numeric_limits<double>::min();
  return {1.0 / std::max(mse, floor), 1.0 / eve_power};
}

CVectorXd update_v(const PddState& s, const Channels& ch) {
  check_dims(s, ch);
  const CVectorXd hx = bob_channel(ch, s.theta) * s.x;
  return hx / (1.0 + hx.squaredNorm());
}

namespace {

// Sphere-constrained minimizer given A = U diag(mu) U^H + 0 on the orthogonal
// complement of span(U). `perp` is the component of rhs outside span(U) and
// `z` = U^H rhs. A square U has no complement.
XUpdate solve_on_spectrum(const Eigen::VectorXd& mu_raw, const CMatrixXd& U, const CVectorXd& z_in,
                           const CVectorXd& perp, double rho) {
  const bool thin = U.cols() < U.rows();
  const double perp_norm = thin ? perp.norm() : 0.0;
  const Eigen::Index k = U.cols() + (thin ? 1 : 0);
  // The complement enters as one extra direction perp / ‖perp‖ with eigenvalue 0.
  Eigen::VectorXd mu(k);
  CVectorXd z(k);
  mu.head(U.cols()) = mu_raw.cwiseMax(0.0);  // A is PSD; clamp rounding noise
  z.head(U.cols()) = z_in;
  if (thin) {
    mu(k - 1) = 0.0;
    z(k - 1) = perp_norm;
  }
  const Eigen::VectorXd z2 = z.cwiseAbs2();
  const Eigen::VectorXd shifted = 2.0 * rho * mu;  // 2 rho mu_m
  const double mu_min = shifted.minCoeff();
  const double mu_max = shifted.maxCoeff();
  const double z_norm = std::sqrt(z2.sum());

  // Work in the shift s = 1 + 2 rho lambda: x(s) = U diag(1/(2 rho mu + s)) z,
  // g(s) = sum |z_m|^2 / (2 rho mu_m + s)^2 is strictly decreasing on
  // s > -2 rho mu_min and the unit-norm root lies in [‖z‖ - max, ‖z‖ - min].
  auto g = [&](double s) { return (z2.array() / (shifted.array() + s).square()).sum(); };

  const double pole = -mu_min;
  const double gap_tol = 1e-12 * std::max(1.0, mu_max);
  double weight_min = 0.0;
  double g_rest = 0.0;  // g at the pole restricted to the non-minimal eigenspace
  for (Eigen::Index m = 0; m < k; ++m) {
    if (shifted(m) - mu_min <= gap_tol)
      weight_min += z2(m);
    else
      g_rest += z2(m) / std::pow(shifted(m) - mu_min, 2);
  }

  auto assemble = [&](const CVectorXd& coeffs) {
    CVectorXd x = U * coeffs.head(U.cols());
    if (thin && perp_norm > 0.0) x += coeffs(k - 1) / perp_norm * perp;
    return x;
  };

  XUpdate out;
  if (weight_min <= 1e-28 * z2.sum() && g_rest <= 1.0) {
    // Hard case: the multiplier sits at the pole and the minimal eigenspace
    // absorbs the remaining norm.
    if (thin) throw DegenerateError("update_x: hard case needs the full eigenbasis");
    CVectorXd coeffs = CVectorXd::Zero(k);
    Eigen::Index fill = -1;
    for (Eigen::Index m = 0; m < k; ++m) {
      if (shifted(m) - mu_min <= gap_tol) {
        if (fill < 0) fill = m;
      } else {
        coeffs(m) = z(m) / (shifted(m) - mu_min);
      }
    }
    coeffs(fill) = std::sqrt(std::max(0.0, 1.0 - coeffs.squaredNorm()));
    out.x = assemble(coeffs);
    out.x.normalize();
    out.lambda = (pole - 1.0) / (2.0 * rho);
    out.hard_case = true;
    return out;
  }

  double lo = std::max(pole, z_norm - mu_max);
  double hi = z_norm - mu_min;
  if (!(hi > lo)) hi = lo + std::max(1e-300, 1e-16 * std::abs(lo));
  double s = 0.5 * (lo + hi);
  int steps = 0;
  for (; steps < 200; ++steps) {
    s = 0.5 * (lo + hi);
    const double gs = g(s);
    if (std::abs(gs - 1.0) <= 1e-10) break;
    if (gs > 1.0)
      lo = s;
    else
      hi = s;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  const CVectorXd coeffs = (z.array() / (shifted.array() + s).cast<cd>()).matrix();
  out.x = assemble(coeffs);
  out.x.normalize();
  out.lambda = (s - 1.0) / (2.0 * rho);
  out.bisection_steps = steps;
  return out;
}

}  // namespace

XUpdate solve_sphere_quadratic(const CMatrixXd& A, const CVectorXd& b, const CVectorXd& r, double rho) {
  if (!(rho > 0.0)) throw DomainError("solve_sphere_quadratic: rho must be positive");
  const CVectorXd rhs = r + 2.0 * rho * b;
  if (rhs.squaredNorm() == 0.0) throw DegenerateError("update_x: zero right-hand side");
  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(A);
  if (eig.info() != Eigen::Success) throw NumericError("update_x: eigendecomposition failed");
  const CVectorXd z = eig.eigenvectors().adjoint() * rhs;
  return solve_on_spectrum(eig.eigenvalues(), eig.eigenvectors(), z, CVectorXd(), rho);
}

XUpdate solve_sphere_quadratic_factored(const CMatrixXd& F, const CVectorXd& b, const CVectorXd& r, double rho) {
  if (!(rho > 0.0)) throw DomainError("solve_sphere_quadratic: rho must be positive");
  if (F.cols() >= F.rows()) return solve_sphere_quadratic(F * F.adjoint(), b, r, rho);
  const CVectorXd rhs = r + 2.0 * rho * b;
  if (rhs.squaredNorm() == 0.0) throw DegenerateError("update_x: zero right-hand side");
  // F = Q R with thin Q, so A = Q (R R^H) Q^H and only a k x k eigenproblem remains.
  const Eigen::HouseholderQR<CMatrixXd> qr(F);
  const CMatrixXd Q = qr.householderQ() * CMatrixXd::Identity(F.rows(), F.cols());
  const CMatrixXd R = qr.matrixQR().topRows(F.cols()).triangularView<Eigen::Upper>();
  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(R * R.adjoint());
  if (eig.info() != Eigen::Success) throw NumericError("update_x: eigendecomposition failed");
  const CMatrixXd U = Q * eig.eigenvectors();
  const CVectorXd z = U.adjoint() * rhs;
  const CVectorXd perp = rhs - U * z;
  try {
    return solve_on_spectrum(eig.eigenvalues(), U, z, perp, rho);
  } catch (const DegenerateError&) {
    return solve_sphere_quadratic(F * F.adjoint(), b, r, rho);
  }
}

XUpdate update_x(const PddState& s, const Channels& ch) {
  check_dims(s, ch);
  const Composite H = composite(s, ch);
  const CVectorXd hbv = H.bob.adjoint() * s.v;  // H_b^H v
  // A = w_e H_e^H H_e + w_b (H_b^H v)(H_b^H v)^H = F F^H
  CMatrixXd F(ch.M(), ch.N_e() + 1);
  F.leftCols(ch.N_e()) = std::sqrt(s.w_e) * H.eve.adjoint();
  F.col(ch.N_e()) = std::sqrt(s.w_b) * hbv;
  const CVectorXd b = s.w_b * hbv;
  const CVectorXd r = s.t + s.rho * s.dual_t;
  return solve_sphere_quadratic_factored(F, b, r, s.rho);
}

CVectorXd update_theta(const PddState& s, const Channels& ch) {
  check_dims(s, ch);
  const Eigen::Index N_i = ch.N_i();
  if (N_i == 0) return CVectorXd(0);
  const CVectorXd g = ch.h_ai * s.x;  // N_i
  const CMatrixXd B_b = ch.h_ib * g.asDiagonal();
  const CMatrixXd B_e = ch.h_ie * g.asDiagonal();
  const CVectorXd q_b = B_b.adjoint() * s.v;
  // theta^H C theta + 2 Re{d^T theta} collects every theta-dependent term of f,
  // with C = G G^H, G = [sqrt(w_e) B_e^H, sqrt(w_b) q_b].
  CMatrixXd G(N_i, ch.N_e() + 1);
  G.leftCols(ch.N_e()) = std::sqrt(s.w_e) * B_e.adjoint();
  G.col(ch.N_e()) = std::sqrt(s.w_b) * q_b;
  const cd vh_direct = s.v.dot(ch.h_ab * s.x);
  const CVectorXd d_conj = s.w_b * (vh_direct - 1.0) * q_b + s.w_e * (B_e.adjoint() * (ch.h_ae * s.x));
  const CVectorXd rhs = s.phi + s.rho * s.dual_phi - 2.0 * s.rho * d_conj;

  if (G.cols() < N_i) {
    // (I + 2 rho G G^H)^{-1} by Woodbury
    CMatrixXd small = 2.0 * s.rho * (G.adjoint() * G);
    small.diagonal().array() += 1.0;
    Eigen::LLT<CMatrixXd> llt(small);
    if (llt.info() != Eigen::Success) throw NumericError("update_theta: Cholesky factorization failed");
    return rhs - 2.0 * s.rho * (G * llt.solve(G.adjoint() * rhs));
  }
  CMatrixXd K = 2.0 * s.rho * (G * G.adjoint());
  K.diagonal().array() += 1.0;
  Eigen::LLT<CMatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw NumericError("update_theta: Cholesky factorization failed");
  return llt.solve(rhs);
}

CVectorXd update_t(const PddState& s, bool relax_box) {
  const CVectorXd target = s.x - s.rho * s.dual_t;
  if (relax_box) return target;
  const double a = one_bit_amplitude(s.x.size());
  CVectorXd t(target.size());
  for (Eigen::Index m = 0; m < target.size(); ++m)
    t(m) = cd(std::clamp(target(m).real(), -a, a), std::clamp(target(m).imag(), -a, a));
  return t;
}

CVectorXd update_phi(const PddState& s) {
  const CVectorXd target = s.theta - s.rho * s.dual_phi;
  CVectorXd phi = s.phi;
  for (Eigen::Index n = 0; n < target.size(); ++n) {
    const double mag = std::abs(target(n));
    if (mag > 0.0) phi(n) = target(n) / mag;
  }
  return phi;
}

InnerResult inner_bcd(PddState& s, const Channels& ch, double eps, const PddSettings& settings, SolverTrace* trace,
                      int outer_index, const Stopwatch* clock, int iteration_offset) {
  if (!(eps > 0.0)) throw DomainError("inner_bcd: eps must be positive");
  InnerResult result;
  double previous = augmented_lagrangian(s, ch);
  result.initial_value = previous;
  for (int cycle = 0; cycle < settings.max_inner; ++cycle) {
    std::tie(s.w_b, s.w_e) = update_w(s, ch);
    s.v = update_v(s, ch);
    s.x = update_x(s, ch).x;
    if (settings.optimize_theta) s.theta = update_theta(s, ch);
    s.t = update_t(s, settings.relax_box);
    if (settings.optimize_theta) s.phi = update_phi(s);
    const double current = augmented_lagrangian(s, ch);
    result.values.push_back(current);
    ++result.cycles;
    if (trace != nullptr) {
      TraceRecord rec;
      rec.iteration = iteration_offset + result.cycles;
      rec.outer = outer_index;
      rec.objective = current;
      rec.previous_objective = previous;
      rec.violation = constraint_error(s);
      rec.secrecy = secrecy_rate(ch, s.x, s.phi);
      rec.wall_seconds = clock != nullptr ? clock->seconds() : 0.0;
      trace->inner.push_back(rec);
    }
    const double change = std::abs(previous - current);
    const double scale = std::abs(previous);
    previous = current;
    if (change <= eps * scale) break;
  }
  result.final_value = previous;
  return result;
}

SolveResult solve(const Channels& ch, const PddSettings& settings, const ManifoldPoint& init) {
  settings.validate();
  if (init.x.size() != ch.M() || init.theta.size() != ch.N_i())
    throw DomainError("pdd::solve: initial point does not match the channel set");
  const Stopwatch clock;
  PddState s = PddState::initial(init, ch.N_b(), settings.rho0);
  double eta = settings.eta0;
  double eps = settings.eps0;

  SolveResult result;
  SolverTrace* trace = settings.record_trace ? &result.trace : nullptr;
  double best_secrecy = -1.0;
  OneBitPrecoder best_x;
  IrsPhases best_theta;
  CVectorXd best_continuous;
  double error = constraint_error(s);

  for (int outer = 0; outer < settings.max_outer; ++outer) {
    const double rho_used = s.rho;
    const InnerResult inner = inner_bcd(s, ch, eps, settings, trace, outer, &clock, result.inner_iterations);
    result.inner_iterations += inner.cycles;
    result.outer_iterations = outer + 1;
    error = constraint_error(s);

    const OneBitPrecoder x_snap = quantize_one_bit(s.x);
    const IrsPhases theta_snap = IrsPhases::project(s.theta);
    const double snapped = secrecy_rate(ch, x_snap, theta_snap);
    if (snapped > best_secrecy) {
      best_secrecy = snapped;
      best_x = x_snap;
      best_theta = theta_snap;
      best_continuous = s.x;
    }

    const bool dual_update = error < eta;
    if (dual_update) {
      s.dual_t += (s.t - s.x) / s.rho;
      s.dual_phi += (s.phi - s.theta) / s.rho;
    } else {
      s.rho *= settings.c;
    }
    if (trace != nullptr) {
      OuterRecord rec;
      rec.outer = outer;
      rec.inner_iterations = inner.cycles;
      rec.violation = error;
      rec.penalty = rho_used;
      rec.secrecy = snapped;
      rec.dual_update = dual_update;
      trace->outer.push_back(rec);
    }
    eta = 0.2 * error;
    eps = 0.1 * eps;
    if (error <= settings.eta_min) {
      result.converged = true;
      break;
    }
  }

  result.violation = error;
  if (result.converged) {
    result.x = quantize_one_bit(s.x);
    result.theta = IrsPhases::project(s.theta);
    result.x_continuous = s.x;
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

}  // namespace pdd
}  // namespace irssec
