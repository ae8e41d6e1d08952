#pragma once

#include "irssec/channel_model.hpp"
#include "irssec/solver_common.hpp"

namespace irssec::pdd {

/// Variables of the split WMMSE problem plus duals and penalty.
struct PddState {
  double w_b = 1.0;
  double w_e = 1.0;
  CVectorXd v;         // N_b
  CVectorXd x;         // M, unit norm
  CVectorXd theta;     // N_i, unconstrained copy
  CVectorXd t;         // M, box-constrained copy of x
  CVectorXd phi;       // N_i, unit-modulus copy of theta
  CVectorXd dual_t;    // M
  CVectorXd dual_phi;  // N_i
  double rho = 1.0;

  /// Feasible start: t = x, phi = theta, zero duals, w = 1, v = 0.
  static PddState initial(const ManifoldPoint& start, Eigen::Index N_b, double rho);
};

struct PddSettings {
  double rho0 = 1.0;
  double c = 0.6;
  double eta0 = 1.0;
  double eta_min = 1e-5;
  double eps0 = 1e-3;
  int max_inner = 500;
  int max_outer = 30;
  bool optimize_theta = true;  // false: theta and phi stay at the initial value
  bool relax_box = false;      // sphere-only precoder (t is never projected)
  bool record_trace = true;

  void validate() const;
};

/// The WMMSE objective f (natural log, additive constants dropped).
double wmmse_objective(const PddState& state, const Channels& channels);

/// f + (1/2rho)‖t - x + rho dual_t‖^2 + (1/2rho)‖phi - theta + rho dual_phi‖^2.
double augmented_lagrangian(const PddState& state, const Channels& channels);

/// max(‖t - x‖_inf, ‖phi - theta‖_inf).
double constraint_error(const PddState& state);

std::pair<double, double> update_w(const PddState& state, const Channels& channels);

CVectorXd update_v(const PddState& state, const Channels& channels);

/// Output of the sphere-constrained quadratic solve.
struct XUpdate {
  CVectorXd x;
  double lambda = 0.0;
  int bisection_steps = 0;
  bool hard_case = false;
};

/// Minimizes x^H A x - 2 Re{b^H x} + (1/2rho)‖x - r‖^2 over ‖x‖ = 1 with A
/// Hermitian PSD, via the eigendecomposition of A and bisection on the
/// multiplier. Throws DegenerateError when r = 0 and b = 0.
XUpdate solve_sphere_quadratic(const CMatrixXd& A, const CVectorXd& b, const CVectorXd& r, double rho);

/// Same problem with A = F F^H given through its factor F (M x k). When
/// k < M only a thin SVD of F is needed.
XUpdate solve_sphere_quadratic_factored(const CMatrixXd& F, const CVectorXd& b, const CVectorXd& r, double rho);

/// Builds F, b, r from the state and calls solve_sphere_quadratic_factored.
XUpdate update_x(const PddState& state, const Channels& channels);

CVectorXd update_theta(const PddState& state, const Channels& channels);

CVectorXd update_t(const PddState& state, bool relax_box = false);

CVectorXd update_phi(const PddState& state);

struct InnerResult {
  int cycles = 0;
  double initial_value = 0.0;
  double final_value = 0.0;
  std::vector<double> values;  // L_rho after each cycle
};

/// Cyclic w -> v -> x -> theta -> t -> phi until the relative change of L_rho
/// is <= eps or max_inner cycles ran.
InnerResult inner_bcd(PddState& state, const Channels& channels, double eps, const PddSettings& settings,
                      SolverTrace* trace = nullptr, int outer_index = 0, const Stopwatch* clock = nullptr,
                      int iteration_offset = 0);

/// Full outer PDD schedule from a feasible start.
SolveResult solve(const Channels& channels, const PddSettings& settings, const ManifoldPoint& init);

}  // namespace irssec::pdd
