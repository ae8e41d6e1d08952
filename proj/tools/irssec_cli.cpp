// irssec: single trials, sweeps, oracles and gradient audits from the shell.
//
// Exit codes: 0 success, 1 audit failure or unexpected error, 2 bad
// configuration, 3 I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "irssec/experiments.hpp"
#include "irssec/oracle.hpp"

namespace {

using namespace irssec;
using namespace irssec::experiments;
using nlohmann::json;

constexpr int kBadConfig = 2;
constexpr int kIoFailure = 3;

struct PointArgs {
  std::vector<double> alice, irs, bob, eve;
};

void add_config_options(CLI::App* app, SystemConfig& c, PointArgs& pts) {
  app->add_option("--M", c.M, "Transmit antennas")->capture_default_str();
  app->add_option("--N_b", c.N_b, "Bob antennas")->capture_default_str();
  app->add_option("--N_e", c.N_e, "Eve antennas")->capture_default_str();
  app->add_option("--N_i", c.N_i, "IRS elements")->capture_default_str();
  app->add_option("--P_dbm", c.P_dbm, "Transmit power (dBm)")->capture_default_str();
  app->add_option("--sigma_b_dbm", c.sigma_b_dbm, "Bob noise power (dBm)")->capture_default_str();
  app->add_option("--sigma_e_dbm", c.sigma_e_dbm, "Eve noise power (dBm)")->capture_default_str();
  app->add_option("--alice", pts.alice, "Alice position x y")->expected(2);
  app->add_option("--irs", pts.irs, "IRS position x y")->expected(2);
  app->add_option("--bob", pts.bob, "Bob position x y")->expected(2);
  app->add_option("--eve", pts.eve, "Eve position x y")->expected(2);
  app->add_option("--nu_ai", c.nu_ai, "Path-loss exponent Alice-IRS")->capture_default_str();
  app->add_option("--nu_ib", c.nu_ib, "Path-loss exponent IRS-Bob")->capture_default_str();
  app->add_option("--nu_ie", c.nu_ie, "Path-loss exponent IRS-Eve")->capture_default_str();
  app->add_option("--nu_ab", c.nu_ab, "Path-loss exponent Alice-Bob")->capture_default_str();
  app->add_option("--nu_ae", c.nu_ae, "Path-loss exponent Alice-Eve")->capture_default_str();
  app->add_option("--rician_factor", c.rician_factor, "Rician factor (linear)")->capture_default_str();
  app->add_option("--c0_db", c.c0_db, "Path loss at the reference distance (dB)")->capture_default_str();
  app->add_option("--d0", c.d0, "Reference distance (m)")->capture_default_str();
  app->add_option("--seed", c.seed, "Channel seed")->capture_default_str();
}

void apply_points(SystemConfig& c, const PointArgs& pts) {
  auto set = [](Point2& p, const std::vector<double>& v) {
    if (v.size() == 2) p = {v[0], v[1]};
  };
  set(c.alice, pts.alice);
  set(c.irs, pts.irs);
  set(c.bob, pts.bob);
  set(c.eve, pts.eve);
}

SolverSettings load_settings(const std::string& path) {
  SolverSettings s;
  if (path.empty()) return s;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open settings file '" + path + "'");
  try {
    json doc;
    in >> doc;
    if (!doc.is_object()) throw DomainError("settings: expected an object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "wmmse_pdd") from_json(value, s.pdd);
      else if (key == "epprgd") from_json(value, s.epprgd);
      else throw DomainError("settings: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("settings: ") + e.what());
  }
  s.pdd.validate();
  s.epprgd.validate();
  return s;
}

json complex_array(const CVectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

int cmd_run(const SystemConfig& config, const std::string& solver_name, double delta_e, const std::string& settings_path,
            const std::string& trace_dir) {
  config.validate();
  const SolverId solver = parse_solver(solver_name);
  if (!(delta_e >= 0.0)) throw DomainError("delta_e must be >= 0");
  SolverSettings settings = load_settings(settings_path);
  settings.pdd.record_trace = !trace_dir.empty();
  settings.epprgd.record_trace = !trace_dir.empty();

  SweepRecord rec;
  rec.sweep_param = "none";
  rec.result = run_trial(config, solver, config.seed, settings, delta_e);
  if (rec.result.failed()) std::cerr << "solver error: " << rec.result.error << "\n";
  write_records_csv(std::cout, {rec});
  if (!trace_dir.empty() && !rec.result.failed()) {
    std::error_code ec;
    std::filesystem::create_directories(trace_dir, ec);
    const std::string path =
        (std::filesystem::path(trace_dir) / (std::string(to_string(solver)) + "_0.trace.csv")).string();
    std::ofstream out(path);
    if (ec || !out) throw IoError("cannot write trace file '" + path + "'");
    write_trace_csv(out, rec.result.trace);
    if (!out) throw IoError("write failed for '" + path + "'");
  }
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& output, int threads) {
  ExperimentSpec spec = load_spec(path);
  if (!output.empty()) spec.output = output;
  if (threads >= 0) spec.threads = static_cast<unsigned>(threads);
  const SweepOutput out = run_sweep(spec);
  int failures = 0;
  for (const SweepRecord& r : out.records)
    if (r.result.failed()) {
      ++failures;
      std::cerr << "trial " << r.trial << " (" << to_string(r.result.solver) << ", " << r.sweep_param << "="
                << r.sweep_value << ") failed: " << r.result.error << "\n";
    }
  write_summary_csv(std::cout, out.summary);
  std::cerr << "wrote " << out.records_path << " and " << out.summary_path << " (" << out.records.size()
            << " records, " << failures << " failed)\n";
  return 0;
}

int cmd_oracle(const SystemConfig& config, const std::string& mode, int levels, const std::string& theta_init,
               unsigned threads) {
  config.validate();
  const Channels ch = generate_channels(config);
  const ManifoldPoint start = random_initial_point(config.M, config.N_i, derive_seed(config.seed, {string_key("init")}));
  CVectorXd theta = theta_init == "ones" ? CVectorXd::Ones(config.N_i).eval() : start.theta;
  json out;
  out["mode"] = mode;
  if (mode == "precoders") {
    const auto r = oracle::enumerate_precoders(ch, theta, 12, threads);
    out["secrecy_bps_hz"] = r.secrecy;
    out["log_ratio"] = r.log_ratio;
    out["index"] = r.index;
    out["evaluated"] = r.evaluated;
    out["x"] = complex_array(r.x);
  } else if (mode == "phases") {
    const auto r = oracle::grid_search_phases(ch, start.x, levels);
    out["secrecy_bps_hz"] = r.secrecy;
    out["log_ratio"] = r.log_ratio;
    out["exhaustive"] = r.exhaustive;
    out["evaluated"] = r.evaluated;
    out["theta"] = complex_array(r.theta);
  } else if (mode == "joint") {
    const auto r = oracle::joint_grid_enumeration(ch, levels);
    out["secrecy_bps_hz"] = r.secrecy;
    out["log_ratio"] = r.log_ratio;
    out["x"] = complex_array(r.x);
    out["theta"] = complex_array(r.theta);
  } else {
    throw DomainError("unknown oracle mode '" + mode + "'");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_gradcheck(const SystemConfig& config, int points, const std::vector<double>& rhos,
                  const std::vector<double>& us, double h, double tol) {
  config.validate();
  bool ok = true;
  std::printf("rho_r,u,points,failures,max_rel_error,mean_rel_error\n");
  for (double rho : rhos)
    for (double u : us) {
      const GradientAudit a = gradient_audit(config, config.seed, points, rho, u, h, tol);
      std::printf("%g,%g,%d,%d,%.3e,%.3e\n", rho, u, a.points, a.failures, a.max_relative_error,
                  a.mean_relative_error);
      ok = ok && a.failures == 0;
    }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted one-bit secure precoding: solvers, baselines and experiment harness"};
  app.require_subcommand(1);

  SystemConfig config;
  PointArgs points;

  auto* run = app.add_subcommand("run", "Single trial; prints one CSV record");
  add_config_options(run, config, points);
  std::string solver = "wmmse_pdd";
  double delta_e = 0.0;
  std::string settings_path, trace_dir;
  run->add_option("--solver", solver, "wmmse_pdd | epprgd | dp_irs | woirs_onebit")->capture_default_str();
  run->add_option("--delta_e", delta_e, "NMSE of Alice's estimate of Eve's channels")->capture_default_str();
  run->add_option("--settings", settings_path, "JSON file with wmmse_pdd / epprgd settings blocks");
  run->add_option("--trace-dir", trace_dir, "Write {solver}_0.trace.csv into this directory");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep from a JSON spec file");
  std::string spec_path, output;
  int threads = -1;
  sweep->add_option("spec", spec_path, "Spec file")->required();
  sweep->add_option("--output", output, "Override the spec's output directory");
  sweep->add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* orc = app.add_subcommand("oracle", "Exhaustive reference searches");
  add_config_options(orc, config, points);
  std::string mode = "precoders", theta_init = "random";
  int levels = 16;
  unsigned oracle_threads = 0;
  orc->add_option("--mode", mode, "precoders | phases | joint")->capture_default_str();
  orc->add_option("--levels", levels, "Phase grid size")->capture_default_str();
  orc->add_option("--theta", theta_init, "random | ones (fixed theta for precoder enumeration)")->capture_default_str();
  orc->add_option("--threads", oracle_threads, "Enumeration threads (0: all cores)");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference audit of the EPPRGD gradient");
  add_config_options(grad, config, points);
  int grad_points = 100;
  std::vector<double> rhos{1.0, 10.0}, us{1e-1, 1e-2};
  double h = 1e-6, tol = 1e-5;
  grad->add_option("--points", grad_points, "Random feasible points per (rho_r, u)")->capture_default_str();
  grad->add_option("--rho_r", rhos, "Penalty values");
  grad->add_option("--u", us, "Smoothing values");
  grad->add_option("--step", h, "Central-difference step")->capture_default_str();
  grad->add_option("--tol", tol, "Relative error tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadConfig;
  }

  try {
    apply_points(config, points);
    if (*run) return cmd_run(config, solver, delta_e, settings_path, trace_dir);
    if (*sweep) return cmd_sweep(spec_path, output, threads);
    if (*orc) return cmd_oracle(config, mode, levels, theta_init, oracle_threads);
    if (*grad) return cmd_gradcheck(config, grad_points, rhos, us, h, tol);
  } catch (const DomainError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const RefusalError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kBadConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
