#include "irssec/experiments.hpp"

#include "irssec/oracle.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <thread>
#include <tuple>

namespace irssec::experiments {

using nlohmann::json;

std::string_view to_string(SolverId id) {
  switch (id) {
    case SolverId::WmmsePdd: return "wmmse_pdd";
    case SolverId::Epprgd: return "epprgd";
    case SolverId::DpIrs: return "dp_irs";
    case SolverId::WoirsOneBit: return "woirs_onebit";
  }
  return "unknown";
}

SolverId parse_solver(std::string_view name) {
  for (SolverId id : kAllSolvers)
    if (to_string(id) == name) return id;
  throw DomainError("unknown solver '" + std::string(name) + "'");
}

DpResult baseline_dp_irs(const Channels& ch, const pdd::PddSettings& settings, const ManifoldPoint& init) {
  pdd::PddSettings relaxed = settings;
  relaxed.relax_box = true;
  DpResult out;
  out.relaxed = pdd::solve(ch, relaxed, init);
  out.x = quantize_one_bit(out.relaxed.x_continuous);
  out.theta = out.relaxed.theta;
  out.secrecy = secrecy_rate(ch, out.x, out.theta);
  out.relaxed_secrecy = secrecy_rate(ch, out.relaxed.x_continuous, out.theta.vector());
  return out;
}

SolveResult baseline_woirs_onebit(const Channels& ch, const pdd::PddSettings& settings, const ManifoldPoint& init) {
  const Channels direct = ch.N_i() == 0 ? ch : without_irs(ch);
  pdd::PddSettings s = settings;
  s.optimize_theta = false;
  ManifoldPoint start{init.x, CVectorXd(0)};
  return pdd::solve(direct, s, start);
}

TrialResult run_trial(const SystemConfig& config, SolverId solver, std::uint64_t seed, const SolverSettings& settings,
                      double delta_e) {
  TrialResult r;
  r.solver = solver;
  r.seed = seed;
  try {
    config.validate();
    if (!(delta_e >= 0.0)) throw DomainError("delta_e must be >= 0");
    const Channels truth = generate_channels(config, seed);
    Channels design = truth;
    if (delta_e > 0.0) {
      Rng rng(derive_seed(seed, {string_key("csi")}));
      design = estimate_eve_channels(truth, config, delta_e, rng);
    }
    const ManifoldPoint init = random_initial_point(config.M, config.N_i, derive_seed(seed, {string_key("init")}));

    const Stopwatch clock;
    SolveResult res;
    switch (solver) {
      case SolverId::WmmsePdd: res = pdd::solve(design, settings.pdd, init); break;
      case SolverId::Epprgd: res = epprgd::solve(design, settings.epprgd, init); break;
      case SolverId::DpIrs: {
        DpResult dp = baseline_dp_irs(design, settings.pdd, init);
        res = std::move(dp.relaxed);
        res.x = dp.x;
        res.theta = dp.theta;
        r.relaxed_secrecy = secrecy_rate(truth, res.x_continuous, res.theta.vector());
        break;
      }
      case SolverId::WoirsOneBit: res = baseline_woirs_onebit(design, settings.pdd, init); break;
    }
    r.wall_ms = 1e3 * clock.seconds();

    const Channels& judge_on = truth;
    if (solver == SolverId::WoirsOneBit && truth.N_i() > 0)
      r.secrecy = secrecy_rate(without_irs(judge_on), res.x, res.theta);
    else
      r.secrecy = secrecy_rate(judge_on, res.x, res.theta);
    r.inner_iterations = res.inner_iterations;
    r.outer_iterations = res.outer_iterations;
    r.violation = res.violation;
    r.converged = res.converged;
    r.alphabet_flag = res.alphabet_flag;
    r.x = std::move(res.x);
    r.theta = std::move(res.theta);
    r.trace = std::move(res.trace);
  } catch (const std::exception& e) {
    r.error = e.what();
    r.secrecy = std::numeric_limits<double>::quiet_NaN();
    r.violation = std::numeric_limits<double>::quiet_NaN();
    r.converged = false;
  }
  return r;
}

// --- spec / JSON -----------------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& where) {
  if (!j.is_object()) throw DomainError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || key == k;
    if (!ok) throw DomainError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void get_point(const json& j, const char* key, Point2& p) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw DomainError(std::string(key) + ": expected [x, y]");
  p = {v.at(0).get<double>(), v.at(1).get<double>()};
}

int as_int(const std::string& param, double value) {
  if (value != std::floor(value) || std::abs(value) > 1e9)
    throw DomainError("sweep value for " + param + " must be an integer");
  return static_cast<int>(value);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void from_json(const json& j, SystemConfig& c) {
  reject_unknown(j,
                 {"M", "N_b", "N_e", "N_i", "P_dbm", "sigma_b_dbm", "sigma_e_dbm", "alice", "irs", "bob", "eve", "nu_ai",
                  "nu_ib", "nu_ie", "nu_ab", "nu_ae", "rician_factor", "c0_db", "d0", "seed"},
                 "base");
  get_if(j, "M", c.M);
  get_if(j, "N_b", c.N_b);
  get_if(j, "N_e", c.N_e);
  get_if(j, "N_i", c.N_i);
  get_if(j, "P_dbm", c.P_dbm);
  get_if(j, "sigma_b_dbm", c.sigma_b_dbm);
  get_if(j, "sigma_e_dbm", c.sigma_e_dbm);
  get_point(j, "alice", c.alice);
  get_point(j, "irs", c.irs);
  get_point(j, "bob", c.bob);
  get_point(j, "eve", c.eve);
  get_if(j, "nu_ai", c.nu_ai);
  get_if(j, "nu_ib", c.nu_ib);
  get_if(j, "nu_ie", c.nu_ie);
  get_if(j, "nu_ab", c.nu_ab);
  get_if(j, "nu_ae", c.nu_ae);
  get_if(j, "rician_factor", c.rician_factor);
  get_if(j, "c0_db", c.c0_db);
  get_if(j, "d0", c.d0);
  get_if(j, "seed", c.seed);
}

void from_json(const json& j, pdd::PddSettings& s) {
  reject_unknown(j, {"rho0", "c", "eta0", "eta_min", "eps0", "max_inner", "max_outer", "record_trace"},
                 "settings.wmmse_pdd");
  get_if(j, "rho0", s.rho0);
  get_if(j, "c", s.c);
  get_if(j, "eta0", s.eta0);
  get_if(j, "eta_min", s.eta_min);
  get_if(j, "eps0", s.eps0);
  get_if(j, "max_inner", s.max_inner);
  get_if(j, "max_outer", s.max_outer);
  get_if(j, "record_trace", s.record_trace);
}

void from_json(const json& j, epprgd::EpprgdSettings& s) {
  reject_unknown(j,
                 {"rho_r0", "c_r", "tau", "u0", "u_min", "eps_r0", "max_inner", "max_outer", "alpha0", "contraction",
                  "max_backtracks", "warm_start", "record_trace"},
                 "settings.epprgd");
  get_if(j, "rho_r0", s.rho_r0);
  get_if(j, "c_r", s.c_r);
  get_if(j, "tau", s.tau);
  get_if(j, "u0", s.u0);
  get_if(j, "u_min", s.u_min);
  get_if(j, "eps_r0", s.eps_r0);
  get_if(j, "max_inner", s.max_inner);
  get_if(j, "max_outer", s.max_outer);
  get_if(j, "alpha0", s.armijo.alpha0);
  get_if(j, "contraction", s.armijo.contraction);
  get_if(j, "max_backtracks", s.armijo.max_backtracks);
  get_if(j, "warm_start", s.armijo.warm_start);
  get_if(j, "record_trace", s.record_trace);
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"M",     "N_i",         "N_b",         "N_e",          "P_dbm",
                                              "delta_e", "sigma_b_dbm", "sigma_e_dbm", "rician_factor"};
  return names;
}

SystemConfig apply_sweep_value(const SystemConfig& config, const std::string& param, double value, double& delta_e) {
  SystemConfig c = config;
  if (param == "none") return c;
  if (param == "M") c.M = as_int(param, value);
  else if (param == "N_i") c.N_i = as_int(param, value);
  else if (param == "N_b") c.N_b = as_int(param, value);
  else if (param == "N_e") c.N_e = as_int(param, value);
  else if (param == "P_dbm") c.P_dbm = value;
  else if (param == "delta_e") {
    if (!(value >= 0.0)) throw DomainError("sweep value for delta_e must be >= 0");
    delta_e = value;
  } else if (param == "sigma_b_dbm") c.sigma_b_dbm = value;
  else if (param == "sigma_e_dbm") c.sigma_e_dbm = value;
  else if (param == "rician_factor") c.rician_factor = value;
  else throw DomainError("unknown sweep parameter '" + param + "'");
  c.validate();
  return c;
}

void ExperimentSpec::validate() const {
  base.validate();
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (solvers.empty()) throw DomainError("at least one solver is required");
  if (output.empty()) throw DomainError("output path must not be empty");
  if (!(delta_e >= 0.0)) throw DomainError("delta_e must be >= 0");
  settings.pdd.validate();
  settings.epprgd.validate();
  const std::string param = sweep.param.empty() ? "none" : sweep.param;
  if (param != "none" && sweep.values.empty()) throw DomainError("sweep.values must not be empty");
  for (double v : sweep.values) {
    double d = delta_e;
    apply_sweep_value(base, param, v, d);
  }
}

ExperimentSpec parse_spec(const json& doc) {
  ExperimentSpec spec;
  try {
    reject_unknown(doc,
                   {"base", "sweep", "trials", "solvers", "settings", "output", "delta_e", "seed", "threads", "traces"},
                   "spec");
    if (doc.contains("base")) from_json(doc.at("base"), spec.base);
    if (doc.contains("sweep")) {
      const json& sw = doc.at("sweep");
      reject_unknown(sw, {"param", "values"}, "sweep");
      get_if(sw, "param", spec.sweep.param);
      get_if(sw, "values", spec.sweep.values);
    }
    get_if(doc, "trials", spec.trials);
    if (doc.contains("solvers")) {
      spec.solvers.clear();
      for (const json& s : doc.at("solvers")) spec.solvers.push_back(parse_solver(s.get<std::string>()));
    }
    if (doc.contains("settings")) {
      const json& st = doc.at("settings");
      reject_unknown(st, {"wmmse_pdd", "epprgd"}, "settings");
      if (st.contains("wmmse_pdd")) from_json(st.at("wmmse_pdd"), spec.settings.pdd);
      if (st.contains("epprgd")) from_json(st.at("epprgd"), spec.settings.epprgd);
    }
    get_if(doc, "output", spec.output);
    get_if(doc, "delta_e", spec.delta_e);
    get_if(doc, "seed", spec.seed);
    get_if(doc, "threads", spec.threads);
    get_if(doc, "traces", spec.traces);
  } catch (const json::exception& e) {
    throw DomainError(std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("spec: ") + e.what());
  }
  return parse_spec(doc);
}

// --- sweep -----------------------------------------------------------------

std::uint64_t trial_seed(std::uint64_t master, double sweep_value, int trial) {
  return derive_seed(master, {double_key(sweep_value), static_cast<std::uint64_t>(trial)});
}

namespace {

struct Task {
  std::size_t value_index;
  int trial;
  SolverId solver;
};

std::string trace_path(const ExperimentSpec& spec, SolverId solver, std::size_t global_trial) {
  return (std::filesystem::path(spec.output) / (std::string(to_string(solver)) + "_" + std::to_string(global_trial) +
                                                ".trace.csv"))
      .string();
}

}  // namespace

std::vector<SweepRecord> run_sweep_records(const ExperimentSpec& spec) {
  spec.validate();
  const std::string param = spec.sweep.param.empty() ? "none" : spec.sweep.param;
  const std::vector<double> values = param == "none" ? std::vector<double>{0.0} : spec.sweep.values;

  std::vector<Task> tasks;
  for (std::size_t v = 0; v < values.size(); ++v)
    for (int t = 0; t < spec.trials; ++t)
      for (SolverId s : spec.solvers) tasks.push_back({v, t, s});

  SolverSettings settings = spec.settings;
  settings.pdd.record_trace = spec.traces;
  settings.epprgd.record_trace = spec.traces;
  if (spec.traces) {
    std::error_code ec;
    std::filesystem::create_directories(spec.output, ec);
    if (ec) throw IoError("cannot create output directory '" + spec.output + "': " + ec.message());
  }

  std::vector<SweepRecord> records(tasks.size());
  std::vector<std::string> trace_failures(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& task = tasks[k];
      double delta_e = spec.delta_e;
      const SystemConfig config = apply_sweep_value(spec.base, param, values[task.value_index], delta_e);
      SweepRecord& rec = records[k];
      rec.sweep_param = param;
      rec.sweep_value = values[task.value_index];
      rec.trial = task.trial;
      rec.result = run_trial(config, task.solver, trial_seed(spec.seed, rec.sweep_value, task.trial), settings, delta_e);
      if (spec.traces && !rec.result.failed()) {
        const std::size_t global = task.value_index * static_cast<std::size_t>(spec.trials) + task.trial;
        const std::string path = trace_path(spec, task.solver, global);
        std::ofstream out(path);
        if (out) write_trace_csv(out, rec.result.trace);
        if (!out) trace_failures[k] = path;
      }
      rec.result.trace = {};
    }
  };

  unsigned threads = spec.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : spec.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const std::string& path : trace_failures)
    if (!path.empty()) throw IoError("cannot write trace file '" + path + "'");
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records) {
  // Keyed by first appearance so the row order follows the record order.
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> rates;
  std::map<std::tuple<std::string, double, int>, std::size_t> index;
  std::vector<double> wall_sum;
  std::vector<int> converged;
  for (const SweepRecord& rec : records) {
    const auto key = std::make_tuple(rec.sweep_param, rec.sweep_value, static_cast<int>(rec.result.solver));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      SummaryRow row;
      row.sweep_param = rec.sweep_param;
      row.sweep_value = rec.sweep_value;
      row.solver = rec.result.solver;
      rows.push_back(row);
      rates.emplace_back();
      wall_sum.push_back(0.0);
      converged.push_back(0);
    }
    const std::size_t k = it->second;
    if (rec.result.failed()) {
      ++rows[k].failures;
      continue;
    }
    rates[k].push_back(rec.result.secrecy);
    wall_sum[k] += rec.result.wall_ms;
    converged[k] += rec.result.converged ? 1 : 0;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    SummaryRow& row = rows[k];
    const auto& r = rates[k];
    row.count = static_cast<int>(r.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (r.empty()) {
      row.mean_secrecy = row.std_secrecy = row.mean_wall_ms = row.converged_fraction = nan;
      continue;
    }
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    row.mean_secrecy = mean;
    row.std_secrecy = r.size() > 1 ? std::sqrt(ss / static_cast<double>(r.size() - 1)) : nan;
    row.mean_wall_ms = wall_sum[k] / static_cast<double>(r.size());
    row.converged_fraction = static_cast<double>(converged[k]) / static_cast<double>(r.size());
  }
  return rows;
}

void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "sweep_param,sweep_value,trial,solver,secrecy_bps_hz,iters_inner_total,iters_outer,wall_ms,violation,converged\n";
  for (const SweepRecord& rec : records) {
    const TrialResult& r = rec.result;
    os << rec.sweep_param << ',' << format_double(rec.sweep_value) << ',' << rec.trial << ',' << to_string(r.solver)
       << ',' << format_double(r.secrecy) << ',' << r.inner_iterations << ',' << r.outer_iterations << ','
       << format_double(r.wall_ms) << ',' << format_double(r.violation) << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "sweep_param,sweep_value,solver,trials,failures,mean_secrecy_bps_hz,std_secrecy_bps_hz,mean_wall_ms,"
        "converged_fraction\n";
  for (const SummaryRow& row : rows) {
    os << row.sweep_param << ',' << format_double(row.sweep_value) << ',' << to_string(row.solver) << ',' << row.count
       << ',' << row.failures << ',' << format_double(row.mean_secrecy) << ',' << format_double(row.std_secrecy) << ','
       << format_double(row.mean_wall_ms) << ',' << format_double(row.converged_fraction) << '\n';
  }
}

GradientAudit gradient_audit(const SystemConfig& config, std::uint64_t seed, int points, double rho_r, double u,
                             double h, double tolerance) {
  if (points < 1) throw DomainError("gradient_audit: points must be >= 1");
  const Channels ch = generate_channels(config, seed);
  const epprgd::SmoothedObjective obj(ch, rho_r, u);
  const Eigen::Index M = ch.M();
  const Eigen::Index N_i = ch.N_i();
  Rng rng(derive_seed(seed, {string_key("gradcheck")}));
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);

  GradientAudit audit;
  audit.points = points;
  double sum = 0.0;
  for (int k = 0; k < points; ++k) {
    ManifoldPoint p;
    p.x = complex_gaussian<double>(M, 1, rng).col(0).normalized();
    p.theta.resize(N_i);
    for (Eigen::Index n = 0; n < N_i; ++n) p.theta(n) = std::polar(1.0, phase(rng));

    Eigen::VectorXd coords(2 * (M + N_i));
    coords << oracle::flatten(p.x), oracle::flatten(p.theta);
    auto f = [&](std::span<const double> c) {
      const CVectorXd x = oracle::unflatten(c.subspan(0, 2 * M));
      const CVectorXd theta = oracle::unflatten(c.subspan(2 * M));
      return obj.value(x, theta);
    };
    const Eigen::VectorXd fd = oracle::finite_difference(f, std::span<const double>(coords.data(), coords.size()), h);
    TangentVector ambient{oracle::unflatten(std::span<const double>(fd.data(), 2 * M)),
                          oracle::unflatten(std::span<const double>(fd.data() + 2 * M, 2 * N_i))};
    const TangentVector numeric = project_tangent(p, ambient);
    const TangentVector analytic = obj.riemannian_gradient(p);
    const double diff = std::sqrt((numeric.dx - analytic.dx).squaredNorm() + (numeric.dtheta - analytic.dtheta).squaredNorm());
    const double rel = diff / std::max(std::sqrt(norm_squared(analytic)), std::numeric_limits<double>::min());
    audit.max_relative_error = std::max(audit.max_relative_error, rel);
    sum += rel;
    if (!(rel <= tolerance)) ++audit.failures;
  }
  audit.mean_relative_error = sum / points;
  return audit;
}

SweepOutput run_sweep(const ExperimentSpec& spec) {
  SweepOutput out;
  std::error_code ec;
  std::filesystem::create_directories(spec.output, ec);
  if (ec) throw IoError("cannot create output directory '" + spec.output + "': " + ec.message());
  out.records = run_sweep_records(spec);
  out.summary = summarize(out.records);
  out.records_path = (std::filesystem::path(spec.output) / "records.csv").string();
  out.summary_path = (std::filesystem::path(spec.output) / "summary.csv").string();
  {
    std::ofstream f(out.records_path);
    if (!f) throw IoError("cannot write '" + out.records_path + "'");
    write_records_csv(f, out.records);
    if (!f) throw IoError("write failed for '" + out.records_path + "'");
  }
  {
    std::ofstream f(out.summary_path);
    if (!f) throw IoError("cannot write '" + out.summary_path + "'");
    write_summary_csv(f, out.summary);
    if (!f) throw IoError("write failed for '" + out.summary_path + "'");
  }
  return out;
}

}  // namespace irssec::experiments
