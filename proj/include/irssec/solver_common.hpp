#pragma once

#include <cstdint>

#include "irssec/manifold.hpp"
#include "irssec/secrecy_metrics.hpp"
#include "irssec/trace.hpp"

namespace irssec {

/// What both solvers hand back: a feasible one-bit/unit-modulus pair plus
/// diagnostics. `secrecy` is evaluated on the snapped pair.
struct SolveResult {
  OneBitPrecoder x;
  IrsPhases theta;
  double secrecy = 0.0;
  CVectorXd x_continuous;  // iterate before the final snap
  double violation = 0.0;  // final error (WMMSE-PDD) or error_r (EPPRGD)
  int inner_iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
  bool alphabet_flag = false;  // continuous iterate was > 1e-3 away from the alphabet
  SolverTrace trace;
};

/// x0 = quantize(CN(0, I)), theta0 uniform random phases. The two draws use
/// separate derived streams so x0 does not depend on N_i.
ManifoldPoint random_initial_point(Eigen::Index M, Eigen::Index N_i, std::uint64_t seed);

}  // namespace irssec
