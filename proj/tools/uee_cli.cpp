// Command-line front end: solve one scenario, compare algorithms, sweep a
// parameter axis, or run the self-validation suite. Configuration comes
// from a JSON file (see README); results go to CSV or JSON-lines.

#include "ueeopt/baselines.hpp"
#include "ueeopt/io.hpp"
#include "ueeopt/kkt.hpp"
#include "ueeopt/outer.hpp"
#include "ueeopt/scenario.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace {

using namespace ueeopt;

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("UEE_LOG");
  if (!env) return LogLevel::kQuiet;
  const std::string v(env);
  if (v == "debug") return LogLevel::kDebug;
  if (v == "info") return LogLevel::kInfo;
  return LogLevel::kQuiet;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << "[uee] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::cerr << "[uee] " << msg << "\n";
}

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

RunConfig resolve_config(const CliOptions& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) cfg = load_run_config(opt.config_path);
  if (opt.seed_set) cfg.scenario.seed = opt.seed;
  if (!opt.out_path.empty()) cfg.output_path = opt.out_path;
  if (!opt.format.empty()) {
    if (opt.format == "csv")
      cfg.format = OutputFormat::kCsv;
    else if (opt.format == "jsonl")
      cfg.format = OutputFormat::kJsonl;
    else
      throw ConfigError("--format must be csv or jsonl");
  }
  return cfg;
}

void emit(const RunConfig& cfg, const std::vector<ResultRow>& rows) {
  if (cfg.output_path.empty()) {
    write_rows(std::cout, rows, cfg.format);
    return;
  }
  std::ofstream out(cfg.output_path);
  if (!out) throw ConfigError("cannot open output path '" + cfg.output_path + "'");
  write_rows(out, rows, cfg.format);
  log_info("wrote " + std::to_string(rows.size()) + " rows to " + cfg.output_path);
}

std::string run_tag(const RunConfig& cfg, const std::string& cmd) {
  return cmd + ":seed=" + std::to_string(cfg.scenario.seed);
}

ResultRow summary_row(const RunConfig& cfg, const std::string& cmd, const std::string& algorithm,
                      const std::string& axis, Real axis_value, const ProblemInstance& inst,
                      const SolveReport& rep) {
  ResultRow row;
  row.run_id = run_tag(cfg, cmd);
  row.algorithm = algorithm;
  row.axis = axis;
  row.axis_value = axis_value;
  row.n_users = static_cast<int>(inst.n());
  row.objective = rep.objective;
  row.wall_time_s = rep.wall_time;
  row.outer_iters = rep.outer_iterations;
  row.kkt_residual = rep.kkt_residual;
  return row;
}

SolveReport run_algorithm(const std::string& name, const ProblemInstance& inst,
                          const RunConfig& cfg) {
  if (name == "proposed") return solve(inst, cfg.newton);
  if (name == "ao") return alternating(inst, cfg.baselines);
  if (name == "power_only") return optimize_power_only(inst);
  if (name == "bandwidth_only") {
    const ArrayX p = ArrayX::Constant(inst.n(), cfg.baselines.fixed_power);
    return optimize_bandwidth_only(inst, p, cfg.baselines.root_cfg);
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

int cmd_solve(const CliOptions& opt) {
  const RunConfig cfg = resolve_config(opt);
  const ProblemInstance inst = generate(cfg.scenario);
  const SolveReport rep = solve(inst, cfg.newton);
  if (rep.status == SolveStatus::kError) {
    std::cerr << "solver error: " << rep.message << "\n";
    return 1;
  }
  log_info("status " + std::string(to_string(rep.status)) + ", objective " +
           format_double(rep.objective) + ", " + std::to_string(rep.outer_iterations) +
           " outer iterations");
  if (log_level() >= LogLevel::kDebug) {
    std::ostringstream os;
    os << "phi norm trace:";
    for (double v : rep.phi_norm_trace) os << ' ' << format_double(v);
    log_debug(os.str());
  }

  std::vector<ResultRow> rows;
  ResultRow sum = summary_row(cfg, "solve", "proposed", "",
                              std::numeric_limits<Real>::quiet_NaN(), inst, rep);
  sum.phi_norm_trace = rep.phi_norm_trace;
  rows.push_back(sum);
  for (Index i = 0; i < inst.n(); ++i) {
    ResultRow r = rows.front();
    r.phi_norm_trace.clear();
    r.user_id = std::to_string(i);
    r.p_w = rep.allocation.p[i];
    r.b_hz = rep.allocation.b[i];
    r.uee = rep.per_user_uee[i];
    rows.push_back(std::move(r));
  }
  emit(cfg, rows);
  return rep.status == SolveStatus::kConverged ? 0 : 1;
}

int cmd_compare(const CliOptions& opt) {
  const RunConfig cfg = resolve_config(opt);
  const ProblemInstance inst = generate(cfg.scenario);
  std::vector<ResultRow> rows;
  for (const std::string name : {"proposed", "ao", "power_only", "bandwidth_only"}) {
    const SolveReport rep = run_algorithm(name, inst, cfg);
    if (rep.status == SolveStatus::kError) {
      std::cerr << "solver error in " << name << ": " << rep.message << "\n";
      return 1;
    }
    log_info(name + ": objective " + format_double(rep.objective) + " in " +
             format_double(rep.wall_time) + " s");
    rows.push_back(summary_row(cfg, "compare", name, "",
                               std::numeric_limits<Real>::quiet_NaN(), inst, rep));
  }
  emit(cfg, rows);
  return 0;
}

struct SweepPoint {
  std::string label;
  ScenarioSpec scenario;
};

std::vector<Real> parse_group_values(const std::string& v, const char* axis) {
  std::vector<Real> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ':')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + axis + " value '" + v + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + axis + " value");
  return out;
}

std::vector<SweepPoint> build_sweep(const RunConfig& cfg, const std::string& axis,
                                    const std::vector<std::string>& values) {
  std::vector<SweepPoint> points;
  for (const auto& v : values) {
    SweepPoint pt;
    pt.label = v;
    pt.scenario = cfg.scenario;
    if (axis == "b_total") {
      pt.scenario.b_total_hz = std::stod(v);
    } else if (axis == "n_users") {
      pt.scenario.n_users = std::stoi(v);
    } else if (axis == "weights") {
      const auto weights = parse_group_values(v, "weights");
      if (pt.scenario.groups.size() != weights.size()) pt.scenario.groups.resize(weights.size());
      for (std::size_t g = 0; g < weights.size(); ++g) pt.scenario.groups[g].weight = weights[g];
    } else if (axis == "r_e_groups") {
      const auto factors = parse_group_values(v, "r_e_groups");
      if (pt.scenario.groups.size() != factors.size()) pt.scenario.groups.resize(factors.size());
      for (std::size_t g = 0; g < factors.size(); ++g)
        pt.scenario.groups[g].r_e_factor = factors[g];
    } else {
      throw ConfigError("unknown sweep axis '" + axis + "'");
    }
    points.push_back(std::move(pt));
  }
  return points;
}

int cmd_sweep(const CliOptions& opt, const std::string& axis,
              const std::vector<std::string>& values,
              const std::vector<std::string>& algorithms) {
  const RunConfig cfg = resolve_config(opt);
  const std::vector<SweepPoint> points = build_sweep(cfg, axis, values);

  struct PointResult {
    std::vector<ResultRow> rows;
    std::string error;
  };
  std::vector<PointResult> results(points.size());
  std::atomic<std::size_t> next{0};
  const int jobs = std::max(1, opt.jobs);

  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= points.size()) return;
      const SweepPoint& pt = points[idx];
      try {
        const ProblemInstance inst = generate(pt.scenario);
        for (const auto& name : algorithms) {
          const SolveReport rep = run_algorithm(name, inst, cfg);
          if (rep.status == SolveStatus::kError)
            throw SolverError(name + " failed at " + axis + "=" + pt.label + ": " + rep.message);
          ResultRow sum = summary_row(cfg, "sweep", name, axis, static_cast<Real>(idx), inst, rep);
          sum.run_id =
              "sweep:" + axis + "=" + pt.label + ":seed=" + std::to_string(pt.scenario.seed);
          try {
            sum.axis_value = std::stod(pt.label);
          } catch (const std::exception&) {
            sum.axis_value = static_cast<Real>(idx);
          }
          results[idx].rows.push_back(sum);

          const int n_groups =
              pt.scenario.groups.empty() ? 1 : static_cast<int>(pt.scenario.groups.size());
          for (int g = 0; g < n_groups; ++g) {
            ResultRow row = sum;
            row.user_id = "group:" + std::to_string(g);
            double sum_uee = 0, sum_p = 0, sum_b = 0;
            int count = 0;
            for (Index i = 0; i < inst.n(); ++i) {
              if (!pt.scenario.groups.empty() && pt.scenario.group_of(static_cast<int>(i)) != g)
                continue;
              sum_uee += rep.per_user_uee[i];
              sum_p += rep.allocation.p[i];
              sum_b += rep.allocation.b[i];
              ++count;
            }
            row.objective = sum_uee;                // group sum-UEE (unweighted)
            row.uee = sum_uee / std::max(count, 1); // group average UEE
            row.p_w = sum_p / std::max(count, 1);
            row.b_hz = sum_b / std::max(count, 1);
            results[idx].rows.push_back(std::move(row));
          }
        }
      } catch (const std::exception& e) {
        results[idx].error = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].error.empty()) {
      std::cerr << "solver error: " << results[i].error << "\n";
      return 1;
    }
    for (auto& r : results[i].rows) rows.push_back(std::move(r));
  }
  emit(cfg, rows);
  return 0;
}

// ---- validate: the runtime property suite ----

struct CheckOutcome {
  std::string name;
  bool pass;
  std::string note;
};

void run_check(std::vector<CheckOutcome>& out, const std::string& name,
               const std::function<std::string()>& body) {
  CheckOutcome c;
  c.name = name;
  try {
    c.note = body();
    c.pass = true;
  } catch (const std::exception& e) {
    c.pass = false;
    c.note = e.what();
  }
  out.push_back(std::move(c));
}

int cmd_validate(const CliOptions& opt, bool inject_fault) {
  RunConfig cfg = resolve_config(opt);
  cfg.newton.fault_flip_sigma = inject_fault;
  std::vector<CheckOutcome> checks;

  run_check(checks, "utility families and presets satisfy the concavity contract", [&] {
    for (const auto& s : {UtilitySpec::type1(1, 0.5, 1), UtilitySpec::type2(1, 1, 0),
                          UtilitySpec::type3(1, 0.5, 0)}) {
      const auto rep = validate_spec(s);
      if (!rep.ok) throw SolverError(rep.failures.front());
    }
    for (const char* name : {"ssv360_user1_seated", "ssv360_user2_seated",
                             "ssv360_user1_standing", "netflix_elfuente1",
                             "netflix_bigbuckbunny", "netflix_birdsincage"}) {
      const auto rep = validate_spec(preset_utility(name).spec);
      if (!rep.ok) throw SolverError(std::string(name) + ": " + rep.failures.front());
    }
    return std::string("9 specs");
  });

  run_check(checks, "Lambert W residual within 1e-12", [&] {
    for (int i = 0; i <= 100000; ++i) {
      const double z = std::pow(10.0, -6.0 + 18.0 * i / 100000.0);
      const double w = lambert_w0(z);
      if (std::abs(w * std::exp(w) - z) > 1e-12 * std::max(1.0, z))
        throw SolverError("residual bound violated at z = " + format_double(z));
    }
    return std::string("1e5 samples");
  });

  run_check(checks, "aggregate bandwidth demand strictly decreasing", [&] {
    ScenarioSpec spec = cfg.scenario;
    spec.n_users = std::min(spec.n_users, 8);
    const ProblemInstance inst = generate(spec);
    const DualParams dual = init_dual(inst, default_initial_allocation(inst));
    double log_ref = 0;
    for (Index i = 0; i < inst.n(); ++i)
      log_ref += std::log(dual.nu[i] * dual.beta[i] * inst.users[i].sigma2 / inst.users[i].g);
    const double lam_ref = std::exp(log_ref / inst.n());
    std::mt19937_64 rng(cfg.scenario.seed);
    for (int k = 0; k < 100; ++k) {
      const double a = lam_ref * std::pow(10.0, -3.0 + 6.0 * ((rng() >> 11) * 0x1.0p-53));
      const double b = a * 1.37;
      if (!(total_bandwidth_at(a, inst, dual) > total_bandwidth_at(b, inst, dual)))
        throw SolverError("demand not decreasing at lambda = " + format_double(a));
    }
    return std::string("100 pairs");
  });

  run_check(checks, "single-user Jacobian diagonal matches finite differences", [&] {
    ScenarioSpec spec = cfg.scenario;
    spec.n_users = 1;
    const ProblemInstance inst = generate(spec);
    DualParams dual = init_dual(inst, default_initial_allocation(inst));
    RootConfig rc;
    rc.rel_tol = 1e-13;
    const PhiEval base = eval_phi(inst, dual, rc);
    const double denom = base.inner.allocation.p[0] + inst.users[0].p_cir;
    const double hb = 1e-6 * dual.beta[0];
    DualParams bp = dual, bm = dual;
    bp.beta[0] += hb;
    bm.beta[0] -= hb;
    const double d1 = (eval_phi(inst, bp, rc).phi1[0] - eval_phi(inst, bm, rc).phi1[0]) / (2 * hb);
    if (std::abs(d1 - denom) > 1e-3 * denom)
      throw SolverError("d phi1 / d beta = " + format_double(d1) + " vs " + format_double(denom));
    const double hn = 1e-6 * dual.nu[0];
    DualParams np = dual, nm = dual;
    np.nu[0] += hn;
    nm.nu[0] -= hn;
    const double d2 = (eval_phi(inst, np, rc).phi2[0] - eval_phi(inst, nm, rc).phi2[0]) / (2 * hn);
    if (std::abs(d2 - denom) > 1e-3 * denom)
      throw SolverError("d phi2 / d nu = " + format_double(d2) + " vs " + format_double(denom));
    return std::string("rel err <= 1e-3");
  });

  run_check(checks, "solver contraction and KKT certificate on the default scenario", [&] {
    ScenarioSpec spec = cfg.scenario;
    spec.n_users = std::min(spec.n_users, 12);
    const ProblemInstance inst = generate(spec);
    const SolveReport rep = solve(inst, cfg.newton);
    if (rep.status != SolveStatus::kConverged)
      throw SolverError(std::string("solve did not converge: ") + rep.message);
    for (std::size_t i = 0; i + 1 < rep.phi_norm_trace.size(); ++i) {
      const double factor = 1.0 - std::pow(cfg.newton.xi, rep.j_history[i]) * cfg.newton.epsilon;
      if (!(rep.phi_norm_trace[i + 1] <= factor * rep.phi_norm_trace[i] * (1.0 + 1e-12)))
        throw SolverError("contraction violated at iteration " + std::to_string(i));
    }
    if (!(rep.kkt_residual <= 1e-4))
      throw SolverError("KKT residual " + format_double(rep.kkt_residual));
    if (!check_feasible(rep.allocation, inst).is_feasible)
      throw SolverError("returned point infeasible");
    return "kkt residual " + format_double(rep.kkt_residual);
  });

  run_check(checks, "grid-oracle equivalence at N = 1 and N = 2", [&] {
    for (int n : {1, 2}) {
      ScenarioSpec spec = cfg.scenario;
      spec.n_users = n;
      const ProblemInstance inst = generate(spec);
      const SolveReport rep = solve(inst, cfg.newton);
      if (rep.status != SolveStatus::kConverged) throw SolverError("no convergence");
      double best = -std::numeric_limits<double>::infinity();
      const int splits = 80;
      for (int s = 1; s <= (n == 1 ? 1 : splits - 1); ++s) {
        ArrayX b(n);
        if (n == 1)
          b[0] = inst.b_total;
        else {
          b[0] = inst.b_total * s / splits;
          b[1] = inst.b_total - b[0];
        }
        double total = 0;
        for (int i = 0; i < n; ++i) {
          const UserParams& u = inst.users[static_cast<std::size_t>(i)];
          const double p_lo = (std::exp2(u.r_min / b[i]) - 1.0) * u.sigma2 * b[i] / u.g;
          double ubest = -std::numeric_limits<double>::infinity();
          for (int k = 0; k <= 400; ++k) {
            const double p = p_lo * std::pow(1e5, k / 400.0);
            if (secrecy_rate(p, b[i], u) < 0) continue;
            ubest = std::max(ubest, u.c * uee(p, b[i], u));
          }
          total += ubest;
        }
        best = std::max(best, total);
      }
      if (!(rep.objective >= best - 1e-2 * std::abs(best)))
        throw SolverError("below grid oracle at N = " + std::to_string(n));
    }
    return std::string("within 1e-2");
  });

  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
              << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "validate: all checks passed" : "validate: FAILURES present") << "\n";
  return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted sum utility-energy-efficiency allocation solver"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", opt.seed, "override the scenario seed");
  app.add_option("--out", opt.out_path, "output file (default stdout)");
  app.add_option("--format", opt.format, "csv or jsonl");
  app.add_option("--jobs", opt.jobs, "concurrent sweep points")->default_val(1);

  auto* solve_cmd = app.add_subcommand("solve", "solve one scenario with the joint optimizer");
  solve_cmd->fallthrough();
  auto* compare_cmd =
      app.add_subcommand("compare", "run all four algorithms on the same instance");
  compare_cmd->fallthrough();
  auto* sweep_cmd = app.add_subcommand("sweep", "solve across an axis of scenario values");
  sweep_cmd->fallthrough();
  std::string axis;
  std::vector<std::string> values;
  std::vector<std::string> algorithms{"proposed"};
  sweep_cmd->add_option("--axis", axis, "b_total | n_users | weights | r_e_groups")->required();
  sweep_cmd->add_option("--values", values, "axis values (weights/r_e_groups use colon lists)")
      ->required();
  sweep_cmd->add_option("--algorithms", algorithms,
                        "proposed | ao | power_only | bandwidth_only");
  auto* validate_cmd = app.add_subcommand("validate", "run the numerical property suite");
  validate_cmd->fallthrough();
  bool inject_fault = false;
  validate_cmd->add_flag("--inject-fault", inject_fault,
                         "negative control: flip a search direction sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    opt.seed_set = seed_opt->count() > 0;
    if (*solve_cmd) return cmd_solve(opt);
    if (*compare_cmd) return cmd_compare(opt);
    if (*sweep_cmd) return cmd_sweep(opt, axis, values, algorithms);
    if (*validate_cmd) return cmd_validate(opt, inject_fault);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
