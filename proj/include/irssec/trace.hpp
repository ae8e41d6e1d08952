#pragma once

#include <chrono>
#include <iosfwd>
#include <vector>

namespace irssec {

/// One inner iteration of either solver.
struct TraceRecord {
  int iteration = 0;         // global inner-iteration counter, strictly increasing
  int outer = 0;             // outer iteration the record belongs to
  double objective = 0.0;    // L_rho (WMMSE-PDD) or g_r (EPPRGD) after the step
  double violation = 0.0;    // error / error_r at this iterate
  double secrecy = 0.0;      // bits, on the current (unsnapped) iterate
  double wall_seconds = 0.0; // cumulative since solve() started
  // EPPRGD only: line-search record for the step that produced this iterate.
  double previous_objective = 0.0;
  double step = 0.0;
  double grad_norm_sq = 0.0;
};

/// End-of-outer-iteration summary.
struct OuterRecord {
  int outer = 0;
  int inner_iterations = 0;
  double violation = 0.0;
  double penalty = 0.0;    // rho (WMMSE-PDD) or rho_r (EPPRGD) used in this pass
  double smoothing = 0.0;  // u (EPPRGD), 0 otherwise
  double secrecy = 0.0;    // bits, on the snapped pair
  bool dual_update = false;
};

struct SolverTrace {
  std::vector<TraceRecord> inner;
  std::vector<OuterRecord> outer;
};

/// First-iteration-relative wall-clock helper.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// CSV with columns iteration,outer,objective,violation,secrecy_bps_hz,wall_s,step,grad_norm_sq.
void write_trace_csv(std::ostream& os, const SolverTrace& trace);

}  // namespace irssec
