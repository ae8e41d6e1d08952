#include "irssec/trace.hpp"

#include <ostream>

namespace irssec {

void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
  os << "iteration,outer,objective,violation,secrecy_bps_hz,wall_s,step,grad_norm_sq\n";
  const auto precision = os.precision(17);
  for (const TraceRecord& r : trace.inner)
    os << r.iteration << ',' << r.outer << ',' << r.objective << ',' << r.violation << ',' << r.secrecy << ','
       << r.wall_seconds << ',' << r.step << ',' << r.grad_norm_sq << '\n';
  os.precision(precision);
}

}  // namespace irssec
