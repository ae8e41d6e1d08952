#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "irssec/channel_model.hpp"
#include "irssec/epprgd.hpp"
#include "irssec/wmmse_pdd.hpp"

namespace irssec::experiments {

enum class SolverId { WmmsePdd, Epprgd, DpIrs, WoirsOneBit };

inline constexpr SolverId kAllSolvers[] = {SolverId::WmmsePdd, SolverId::Epprgd, SolverId::DpIrs,
                                           SolverId::WoirsOneBit};

std::string_view to_string(SolverId id);
/// Accepts wmmse_pdd, epprgd, dp_irs, woirs_onebit; DomainError otherwise.
SolverId parse_solver(std::string_view name);

struct SolverSettings {
  pdd::PddSettings pdd{};
  epprgd::EpprgdSettings epprgd{};
};

struct DpResult {
  OneBitPrecoder x;
  IrsPhases theta;
  double secrecy = 0.0;          // snapped pair, bits
  double relaxed_secrecy = 0.0;  // sphere-only precoder before quantization
  SolveResult relaxed;
};

/// Relaxed WMMSE-PDD (unit sphere only), then x <- quantize_one_bit(x). theta
/// comes from the relaxed solve.
DpResult baseline_dp_irs(const Channels& channels, const pdd::PddSettings& settings, const ManifoldPoint& init);

/// WMMSE-PDD with the IRS dropped: only the precoder blocks do any work.
/// `init.theta` is ignored.
SolveResult baseline_woirs_onebit(const Channels& channels, const pdd::PddSettings& settings,
                                  const ManifoldPoint& init);

struct TrialResult {
  SolverId solver = SolverId::WmmsePdd;
  std::uint64_t seed = 0;
  double secrecy = 0.0;  // bits, evaluated on the true channels
  int inner_iterations = 0;
  int outer_iterations = 0;
  double wall_ms = 0.0;
  double violation = 0.0;
  bool converged = false;
  bool alphabet_flag = false;
  double relaxed_secrecy = 0.0;  // dp_irs only
  std::string error;             // non-empty when the solver threw
  OneBitPrecoder x;
  IrsPhases theta;
  SolverTrace trace;

  bool failed() const { return !error.empty(); }
};

/// Draws channels from `seed`, optimizes against Eve channels estimated with
/// NMSE `delta_e` (exact when 0), and scores the result on the true channels.
/// Solver exceptions are caught and reported in `error`.
TrialResult run_trial(const SystemConfig& config, SolverId solver, std::uint64_t seed,
                      const SolverSettings& settings = {}, double delta_e = 0.0);

struct Sweep {
  std::string param;           // empty: single point at the base config
  std::vector<double> values;  // one entry per sweep point
};

struct ExperimentSpec {
  SystemConfig base{};
  Sweep sweep{};
  int trials = 50;
  std::vector<SolverId> solvers{std::begin(kAllSolvers), std::end(kAllSolvers)};
  SolverSettings settings{};
  std::string output = "results";
  double delta_e = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  bool traces = false;

  /// Throws DomainError on invalid fields or sweep values.
  void validate() const;
};

/// Sweep parameters understood by apply_sweep_value.
const std::vector<std::string>& sweep_parameters();

/// Copy of `config` (and delta_e) with `param` set to `value`. DomainError on
/// unknown names or non-integral values for integer fields.
SystemConfig apply_sweep_value(const SystemConfig& config, const std::string& param, double value,
                               double& delta_e);

/// Missing keys keep their defaults; unknown keys are a DomainError.
ExperimentSpec parse_spec(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::string& path);
void from_json(const nlohmann::json& j, SystemConfig& config);
void from_json(const nlohmann::json& j, pdd::PddSettings& settings);
void from_json(const nlohmann::json& j, epprgd::EpprgdSettings& settings);

struct SweepRecord {
  std::string sweep_param;
  double sweep_value = 0.0;
  int trial = 0;
  TrialResult result;
};

struct SummaryRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  SolverId solver = SolverId::WmmsePdd;
  int count = 0;     // successful trials
  int failures = 0;
  double mean_secrecy = 0.0;
  double std_secrecy = 0.0;  // unbiased (n - 1); NaN when count < 2
  double mean_wall_ms = 0.0;
  double converged_fraction = 0.0;
};

/// Instance seed for (sweep value, trial). Every solver sees the same instance.
std::uint64_t trial_seed(std::uint64_t master, double sweep_value, int trial);

/// All records in (sweep value, trial, solver) order.
std::vector<SweepRecord> run_sweep_records(const ExperimentSpec& spec);
std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records);

void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct SweepOutput {
  std::string records_path;
  std::string summary_path;
  std::vector<SweepRecord> records;
  std::vector<SummaryRow> summary;
};

struct GradientAudit {
  int points = 0;
  int failures = 0;            // points with relative error above the tolerance
  double max_relative_error = 0.0;
  double mean_relative_error = 0.0;
};

/// Compares the analytic Riemannian gradient of the smoothed EPPRGD objective
/// with the tangent projection of a central-difference ambient gradient at
/// `points` random feasible points of the desk-scale channels drawn from
/// `seed`. Relative error is ‖g_fd - g‖ / ‖g‖.
GradientAudit gradient_audit(const SystemConfig& config, std::uint64_t seed, int points, double rho_r, double u,
                             double h = 1e-6, double tolerance = 1e-5);

/// Runs the sweep and writes {output}/records.csv, {output}/summary.csv and,
/// with spec.traces, {output}/{solver}_{trial}.trace.csv where trial is the
/// global index value_index * trials + trial. Throws IoError if a file cannot
/// be written.
SweepOutput run_sweep(const ExperimentSpec& spec);

}  // namespace irssec::experiments
