#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>

#include "hamel/config.hpp"
#include "hamel/io.hpp"
#include "hamel/verify.hpp"

namespace {

using namespace hamel;

Vec parse_vec(const std::string& text, const std::string& flag) {
  std::vector<double> vals;
  std::string cur;
  std::stringstream ss(text);
  while (std::getline(ss, cur, ',')) {
    try {
      size_t used = 0;
      vals.push_back(std::stod(cur, &used));
      if (used != cur.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InvalidProblem(fmt::format("{}: '{}' is not a number", flag, cur));
    }
  }
  Vec out(static_cast<int>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out(static_cast<int>(i)) = vals[i];
  return out;
}

std::string join_vec(const Vec& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i)
    out += fmt::format("{}{:.6g}", i ? ", " : "", v(i));
  return out;
}

void apply_params(const std::vector<std::string>& entries, ModelParams& params) {
  for (const auto& entry : entries) {
    const size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidProblem(
          fmt::format("--param '{}' is not of the form key=value", entry));
    const std::string key = entry.substr(0, eq);
    try {
      size_t used = 0;
      const std::string num = entry.substr(eq + 1);
      params[key] = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InvalidProblem(
          fmt::format("--param '{}' has a non-numeric value", entry));
    }
  }
}

struct OutputTarget {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit OutputTarget(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file)
      throw InvalidProblem(fmt::format("cannot open output file '{}'", path));
    os = &file;
  }
};

struct SolveArgs {
  std::string config_path, model, scenario, layout;
  std::vector<std::string> params;
  std::optional<double> t0, t1, tol;
  std::string q0, q1, u0, u1, guess;
  std::optional<int> steps, max_iters, restarts;
  std::optional<long long> seed;
  bool serial = false;
  std::string out, format;
};

ScenarioConfig merge_args(const SolveArgs& args) {
  ScenarioConfig cfg;
  if (!args.config_path.empty())
    cfg = ScenarioConfig::from_toml(TomlTable::parse_file(args.config_path));

  if (!args.model.empty()) cfg.model = args.model;
  if (cfg.model.empty())
    throw InvalidProblem("--model (or a config file with problem.model) is required");
  if (!args.scenario.empty()) cfg.scenario = args.scenario;
  if (!args.layout.empty()) cfg.layout = layout_from_name(args.layout);
  apply_params(args.params, cfg.params);

  if (args.t0) cfg.t0 = *args.t0;
  if (args.t1) cfg.t1 = *args.t1;
  if (!args.q0.empty()) cfg.q0 = parse_vec(args.q0, "--q0");
  if (!args.q1.empty()) cfg.q1 = parse_vec(args.q1, "--q1");
  if (!args.u0.empty()) cfg.u0 = parse_vec(args.u0, "--u0");
  if (!args.u1.empty()) cfg.u1 = parse_vec(args.u1, "--u1");
  if (!args.guess.empty()) cfg.guess = parse_vec(args.guess, "--guess");

  if (args.steps) cfg.steps = *args.steps;
  if (args.tol) cfg.tol = *args.tol;
  if (args.max_iters) cfg.max_iters = *args.max_iters;
  if (args.restarts) cfg.restarts = *args.restarts;
  if (args.seed) {
    if (*args.seed < 0) throw InvalidProblem("--seed must be >= 0");
    cfg.seed = static_cast<uint64_t>(*args.seed);
  }
  if (args.serial) cfg.serial = true;
  if (!args.out.empty()) cfg.out_path = args.out;
  if (!args.format.empty()) {
    if (args.format != "csv" && args.format != "json")
      throw InvalidProblem(
          fmt::format("--format '{}' (csv | json)", args.format));
    cfg.format = args.format;
  }
  return cfg;
}

void emit(const BuiltinModel& model, const Trajectory& traj,
          const SolveInfo& info, const std::string& path,
          const std::string& format) {
  OutputTarget target(path);
  if (format == "json")
    write_json(*target.os, model, traj, info);
  else
    write_csv(*target.os, model, traj, info);
}

int run_solve(const SolveArgs& args) {
  const ScenarioConfig cfg = merge_args(args);
  const BuiltinModel model = builtin(cfg.model, cfg.params);
  const Scenario sc = cfg.resolve(model);

  SolveInfo info;
  info.model = model.name;
  info.scenario = sc.name;

  const bool dynamic = sc.layout == Layout::dynamic_oc;
  try {
    ShootResult result =
        dynamic ? shoot_dynamic(*model.dynamic, sc.bc, sc.guess, sc.config)
                : shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
    info.converged = true;
    info.residual_norm = result.residual_norm;
    info.iterations = result.iterations;
    info.unknowns = result.unknowns;
    info.cost = dynamic ? evaluate_cost(*model.dynamic, result.trajectory)
                        : evaluate_cost(*model.kinematic, result.trajectory);
    emit(model, result.trajectory, info, cfg.out_path, cfg.format);
    std::cerr << fmt::format(
        "converged: residual {:.3e}, {} iteration(s), {} restart(s), cost "
        "{:.9g}, unknowns [{}]{}\n",
        result.residual_norm, result.iterations, result.restarts_used,
        info.cost, join_vec(result.unknowns),
        result.degenerate_directions
            ? fmt::format(", {} degenerate direction(s)",
                          result.degenerate_directions)
            : "");
    return 0;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.best_unknowns.size()) {
      info.converged = false;
      info.residual_norm = e.best_residual;
      info.iterations = e.iterations;
      info.unknowns = e.best_unknowns;
      try {
        const Trajectory traj =
            dynamic
                ? integrate_dynamic(*model.dynamic, sc.bc, e.best_unknowns,
                                    sc.config.steps)
                : integrate_kinematic(*model.kinematic, sc.bc, e.best_unknowns,
                                      sc.config.steps);
        info.cost = dynamic ? evaluate_cost(*model.dynamic, traj)
                            : evaluate_cost(*model.kinematic, traj);
        emit(model, traj, info, cfg.out_path, cfg.format);
        std::cerr << fmt::format(
            "best-effort trajectory written (residual {:.3e})\n",
            e.best_residual);
      } catch (const Error& inner) {
        std::cerr << "best-effort output unavailable: " << inner.what() << "\n";
      }
    }
    return 2;
  }
}

struct VerifyArgs {
  std::string model;
  int samples = 200;
  std::optional<long long> seed;
  bool serial = false;
  std::string out;
};

int run_verify(const VerifyArgs& args) {
  VerifyOptions opts;
  opts.samples = args.samples;
  if (args.seed) {
    if (*args.seed < 0) throw InvalidProblem("--seed must be >= 0");
    opts.seed = static_cast<uint64_t>(*args.seed);
  }
  opts.parallel = !args.serial;

  std::vector<std::string> names;
  if (args.model.empty() || args.model == "all")
    names = builtin_names();
  else
    names.push_back(args.model);

  VerificationReport merged;
  merged.subject = names.size() == 1 ? names.front() : "all";
  merged.seed = opts.seed;
  for (const auto& name : names) {
    const BuiltinModel model = builtin(name);
    merged.merge(verify_model(model, opts));
  }

  for (const auto& c : merged.checks)
    std::cerr << fmt::format("{} {} (max error {:.3e}, threshold {:.0e}{})\n",
                             c.pass ? "PASS" : "FAIL", c.name, c.max_abs_error,
                             c.threshold,
                             c.note.empty() ? "" : ", " + c.note);

  OutputTarget target(args.out);
  *target.os << merged.to_json() << "\n";
  return merged.all_pass() ? 0 : 1;
}

struct SimulateArgs {
  std::string model;
  std::vector<std::string> params;
  std::string q0, u0, forces;
  double t0 = 0.0, t1 = 1.0;
  int steps = 200;
  std::string out, format = "csv";
};

int run_simulate(const SimulateArgs& args) {
  if (args.model.empty()) throw InvalidProblem("--model is required");
  ModelParams params;
  apply_params(args.params, params);
  const BuiltinModel model = builtin(args.model, params);
  if (!model.mechanical)
    throw UnsupportedLayout(
        fmt::format("model {} has no mechanical system to simulate", model.name));

  const QuasiFrame& frame = model.frame;
  const StateLayout lay(Layout::mechanics, frame.dof(), frame.constraint_count());

  Vec q0 = args.q0.empty()
               ? (model.scenarios.empty() ? Vec(Vec::Zero(lay.n))
                                          : model.scenarios.front().bc.q0)
               : parse_vec(args.q0, "--q0");
  Vec u0 = args.u0.empty() ? Vec(Vec::Zero(lay.f)) : parse_vec(args.u0, "--u0");
  if (q0.size() != lay.n)
    throw InvalidProblem(
        fmt::format("--q0 length {}, expected {}", q0.size(), lay.n));
  if (u0.size() != lay.f)
    throw InvalidProblem(fmt::format(
        "--u0 length {}, expected {} (free slots)", u0.size(), lay.f));

  std::function<Vec(double)> forces;
  if (!args.forces.empty()) {
    const Vec w = parse_vec(args.forces, "--forces");
    if (w.size() != lay.f)
      throw InvalidProblem(fmt::format(
          "--forces length {}, expected {} (free slots)", w.size(), lay.f));
    forces = [w](double) { return w; };
  }

  Vec x0(lay.size());
  x0.segment(0, lay.n) = q0;
  x0.segment(lay.u_offset(), lay.f) = u0;
  const Trajectory traj = integrate(
      [&](double t, const Vec& x) {
        return mechanics_rhs(*model.mechanical, forces, t, x);
      },
      x0, args.t0, args.t1, args.steps, Layout::mechanics);

  SolveInfo info;
  info.model = model.name;
  OutputTarget target(args.out);
  if (args.format == "json")
    write_json(*target.os, model, traj, info);
  else if (args.format == "csv")
    write_csv(*target.os, model, traj, info);
  else
    throw InvalidProblem(fmt::format("--format '{}' (csv | json)", args.format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Quasi-velocity toolkit for nonholonomic mechanics and optimal control"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand(
      "solve", "Solve a kinematic or dynamic boundary problem by shooting");
  solve->add_option("--config", solve_args.config_path, "Scenario file (TOML subset)");
  solve->add_option("--model", solve_args.model, "Built-in model name");
  solve->add_option("--scenario", solve_args.scenario, "Named built-in scenario");
  solve->add_option("--layout", solve_args.layout, "kinematic | dynamic");
  solve->add_option("--param", solve_args.params, "Model parameter key=value")
      ->take_all();
  solve->add_option("--t0", solve_args.t0, "Start time");
  solve->add_option("--t1", solve_args.t1, "End time");
  solve->add_option("--q0", solve_args.q0, "Initial configuration (comma list)");
  solve->add_option("--q1", solve_args.q1, "Final configuration (comma list)");
  solve->add_option("--u0", solve_args.u0, "Initial free velocities (dynamic)");
  solve->add_option("--u1", solve_args.u1, "Final free velocities (dynamic)");
  solve->add_option("--guess", solve_args.guess, "Initial shooting unknowns");
  solve->add_option("--steps", solve_args.steps, "Integration steps (>= 16)");
  solve->add_option("--tol", solve_args.tol, "Newton residual tolerance");
  solve->add_option("--max-iters", solve_args.max_iters, "Newton iteration cap");
  solve->add_option("--restarts", solve_args.restarts, "Random restarts");
  solve->add_option("--seed", solve_args.seed, "Restart seed");
  solve->add_flag("--serial", solve_args.serial, "Disable parallel Jacobian columns");
  solve->add_option("--out", solve_args.out, "Output path (default stdout)");
  solve->add_option("--format", solve_args.format, "csv | json");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand(
      "verify", "Run the oracle and invariant checks for built-in models");
  verify->add_option("--model", verify_args.model, "Model name or 'all'");
  verify->add_option("--samples", verify_args.samples, "Samples per check")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_args.seed, "Sampling seed");
  verify->add_flag("--serial", verify_args.serial, "Disable parallel sweeps");
  verify->add_option("--out", verify_args.out, "Report path (default stdout)");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand(
      "simulate", "Integrate the forced mechanical equations forward");
  simulate->add_option("--model", sim_args.model, "Built-in model name");
  simulate->add_option("--param", sim_args.params, "Model parameter key=value")
      ->take_all();
  simulate->add_option("--q0", sim_args.q0, "Initial configuration");
  simulate->add_option("--u0", sim_args.u0, "Initial free velocities");
  simulate->add_option("--forces", sim_args.forces, "Constant free-slot forces");
  simulate->add_option("--t0", sim_args.t0, "Start time");
  simulate->add_option("--t1", sim_args.t1, "End time");
  simulate->add_option("--steps", sim_args.steps, "Integration steps")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_args.out, "Output path (default stdout)");
  simulate->add_option("--format", sim_args.format, "csv | json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return run_solve(solve_args);
    if (verify->parsed()) return run_verify(verify_args);
    if (simulate->parsed()) return run_simulate(sim_args);
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
