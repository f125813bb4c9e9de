#include "cli.hpp"

#include "avgtrack/avgtrack.hpp"
#include "problem_file.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace avgtrack::cli {

namespace {

// Reference totals for the scalar example from x(0) = 12, in the order
// (average-cost index, surrogate index, quadratic index).
struct ReferenceRow {
  const char* method;
  std::array<double, 3> values;
};
constexpr std::array<ReferenceRow, 3> kReferenceRows{{
    {"LQR", {420.3626, 420.3626, 319.5642}},
    {"Exact-scalar", {420.2428, 420.2428, 392.9962}},
    {"MPC", {611.2143, 659.0715, 659.0715}},
}};

constexpr double kReferenceX0 = 12.0;

std::string fmt_vector(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt::format("{:.10g}", v(i));
  return s + "]";
}

std::string fmt_matrix(const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + fmt::format("{:.10g}", m(i, j));
    s += "]";
  }
  return s + "]";
}

std::optional<Vector> parse_vector_flag(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) return std::nullopt;
      values.push_back(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (values.empty()) return std::nullopt;
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Shared state of the commands that need a steady state and an LQR gain.
struct Setup {
  std::optional<ProblemFile> file;
  std::optional<StageContext> ctx;
  LqrSolution lqr;
};

// Returns an exit code on failure, nullopt when `setup` is ready.
std::optional<int> prepare(const std::string& path, Setup& setup, std::ostream& err) {
  try {
    setup.file.emplace(load_problem(path));
  } catch (const ProblemFileError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  const TrackingProblem& prob = setup.file->problem;
  try {
    setup.ctx.emplace(prob, steady_state(prob, setup.file->convention));
  } catch (const Error& e) {
    err << "error: steady state unavailable: " << e.what() << '\n';
    return kAssumptionFailure;
  }
  try {
    setup.lqr = solve_dare(prob.system(), prob.Q(), prob.R());
  } catch (const Error& e) {
    err << "error: LQR design failed: " << e.what() << '\n';
    return kAssumptionFailure;
  }
  return std::nullopt;
}

std::optional<Vector> resolve_x0(const Setup& setup, const std::string& flag, std::ostream& err) {
  if (!flag.empty()) {
    std::optional<Vector> x0 = parse_vector_flag(flag);
    if (!x0) {
      err << "error: --x0 expects comma-separated numbers, got '" << flag << "'\n";
      return std::nullopt;
    }
    if (x0->size() != setup.file->problem.system().n()) {
      err << "error: --x0 has " << x0->size() << " entries, the system has " << setup.file->problem.system().n()
          << " states\n";
      return std::nullopt;
    }
    return x0;
  }
  if (setup.file->x0) return setup.file->x0;
  err << "error: no initial state: pass --x0 or add \"x0\" to the problem file\n";
  return std::nullopt;
}

bool is_scalar(const TrackingProblem& prob) {
  const LinearSystem& s = prob.system();
  return s.n() == 1 && s.m() == 1 && s.p() == 1;
}

// Writes via a callback to a file or, for "-", to `out`.
template <typename Writer>
bool write_output(const std::string& path, std::ostream& out, std::ostream& err, Writer&& writer) {
  if (path.empty()) return true;
  if (path == "-") {
    writer(out);
    return true;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  writer(file);
  return static_cast<bool>(file);
}

int cmd_analyze(const std::string& path, std::ostream& out) {
  const ProblemFile pf = load_problem(path);
  const TrackingProblem& prob = pf.problem;
  const LinearSystem& sys = prob.system();
  bool ok = true;

  out << fmt::format("problem: {} (n={}, m={}, p={})\n", path, sys.n(), sys.m(), sys.p());
  const bool controllable = check_controllable(sys);
  const bool observable = check_observable(sys, prob.Q());
  ok = ok && controllable && observable;
  out << fmt::format("controllable (A, B):            {}\n", controllable ? "yes" : "NO");
  out << fmt::format("observable (A, sqrt(Q) C):      {}\n", observable ? "yes" : "NO");

  try {
    const SteadyState ss = steady_state(prob, pf.convention);
    out << "steady-state block invertible:  yes\n";
    out << "x_ss = " << fmt_vector(ss.x_ss) << '\n';
    out << "u_ss = " << fmt_vector(ss.u_ss) << '\n';
    out << fmt::format("C_ss = {:.10g}\n", ss.C_ss);
    out << "s = " << fmt_vector(ss.s) << ", r_lin = " << fmt_vector(ss.r_lin) << " ("
        << (pf.convention == Convention::HalfLinearTerms ? "half" : "exact") << " convention)\n";
  } catch (const Error& e) {
    ok = false;
    out << "steady-state block invertible:  NO (" << e.what() << ")\n";
  }

  try {
    const LqrSolution lqr = solve_dare(sys, prob.Q(), prob.R());
    out << "DARE P = " << fmt_matrix(lqr.P)
        << fmt::format("  (iterations {}, residual {:.3g})\n", lqr.iterations, lqr.residual);
    out << "LQR K = " << fmt_matrix(lqr.K) << '\n';
    out << fmt::format("spectral radius of A - BK: {:.10g}\n", spectral_radius(sys.A() - sys.B() * lqr.K));
  } catch (const Error& e) {
    ok = false;
    out << "DARE: failed (" << e.what() << ")\n";
  }

  out << (ok ? "assumptions: all hold\n" : "assumptions: at least one check FAILED\n");
  return ok ? kSuccess : kAssumptionFailure;
}

struct SimulateOptions {
  std::string path;
  std::string controller = "lqr";
  std::string x0;
  int steps = 0;
  std::string out;
  double settle_tol = 1e-3;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  Setup setup;
  if (const auto code = prepare(opt.path, setup, err)) return *code;
  const StageContext& ctx = *setup.ctx;
  const TrackingProblem& prob = setup.file->problem;

  const std::optional<Vector> x0 = resolve_x0(setup, opt.x0, err);
  if (!x0) return kUsageError;

  std::optional<Controller> ctrl;
  try {
    if (opt.controller == "lqr") {
      ctrl = lqr_tracking_controller(prob.system(), setup.lqr.K, ctx.steady());
    } else if (opt.controller == "mpc") {
      ctrl = mpc_controller(ctx, setup.lqr.K, setup.file->mpc);
    } else {
      if (!is_scalar(prob)) {
        err << "error: --controller exact-scalar needs a scalar problem (n = m = p = 1), got n=" << prob.system().n()
            << ", m=" << prob.system().m() << ", p=" << prob.system().p() << '\n';
        return kUsageError;
      }
      ctrl = exact_scalar_controller(ctx.steady());
    }
  } catch (const UnstableGain& e) {
    err << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  }

  Trajectory traj;
  bool converged = false;
  try {
    if (opt.steps > 0) {
      traj = rollout(prob.system(), *ctrl, *x0, opt.steps);
      converged = tail_converged(avg_cost_terms(ctx, traj));
    } else {
      AdaptiveRollout ar = adaptive_rollout(ctx, *ctrl, *x0);
      traj = std::move(ar.trajectory);
      converged = ar.converged;
    }
  } catch (const NonFinite& e) {
    err << "error: closed loop diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const SolverFailure& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  }

  if (!write_output(opt.out, out, err, [&](std::ostream& os) { write_trajectory_csv(os, traj); })) {
    return kUsageError;
  }

  const ConvergenceMetrics metrics = convergence_metrics(traj, prob, opt.settle_tol);
  out << fmt::format("controller: {}\nsteps: {}{}\n", ctrl->name, traj.steps(),
                     converged ? "" : " (tail not converged: indices are truncated sums)");
  out << fmt::format("avg_index:       {:.10f}\n", avg_cost_index(ctx, traj));
  out << fmt::format("surrogate_index: {:.10f}\n", surrogate_index(ctx, traj));
  out << fmt::format("quadratic_index: {:.10f}\n", quadratic_index(ctx, traj));
  if (metrics.settling_step) {
    out << fmt::format("settling_step:   {} (tol {:g})\n", *metrics.settling_step, opt.settle_tol);
  } else {
    out << fmt::format("settling_step:   none (tol {:g})\n", opt.settle_tol);
  }
  out << fmt::format("final_error:     {:.3e}\n", metrics.final_error);
  return kSuccess;
}

struct BenchmarkOptions {
  std::string path;
  std::string x0;
  int steps = 0;
  std::string out;
};

int cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out, std::ostream& err) {
  Setup setup;
  if (const auto code = prepare(opt.path, setup, err)) return *code;
  const StageContext& ctx = *setup.ctx;
  const TrackingProblem& prob = setup.file->problem;

  const std::optional<Vector> x0 = resolve_x0(setup, opt.x0, err);
  if (!x0) return kUsageError;

  std::vector<Controller> controllers;
  try {
    controllers.push_back(lqr_tracking_controller(prob.system(), setup.lqr.K, ctx.steady()));
  } catch (const UnstableGain& e) {
    err << "error: " << e.what() << '\n';
    return kAssumptionFailure;
  }
  if (is_scalar(prob)) {
    controllers.push_back(exact_scalar_controller(ctx.steady()));
  } else {
    out << "note: closed-form scalar controller skipped (problem is not scalar)\n";
  }
  controllers.push_back(mpc_controller(ctx, setup.lqr.K, setup.file->mpc));

  const std::optional<int> steps = opt.steps > 0 ? std::optional<int>(opt.steps) : std::nullopt;
  const std::vector<BenchmarkRow> rows = benchmark_table(ctx, controllers, *x0, steps);

  if (!write_output(opt.out, out, err, [&](std::ostream& os) { write_benchmark_csv(os, rows); })) {
    return kUsageError;
  }

  const bool with_reference =
      is_reference_scalar_example(*setup.file) && x0->size() == 1 && (*x0)(0) == kReferenceX0;
  out << fmt::format("{:<14}{:>18}{:>18}{:>18}{:>7}{:>10}", "method", "avg_index", "surrogate_index",
                     "quadratic_index", "steps", "converged");
  if (with_reference) out << fmt::format("{:>14}{:>14}{:>14}", "ref_avg", "ref_surrogate", "ref_quadratic");
  out << '\n';
  bool diverged = false;
  for (const BenchmarkRow& row : rows) {
    out << fmt::format("{:<14}{:>18.10f}{:>18.10f}{:>18.10f}{:>7}{:>10}", row.method, row.avg_index,
                       row.surrogate_index, row.quadratic_index, row.steps,
                       row.diverged ? "diverged" : (row.converged ? "yes" : "no"));
    if (with_reference) {
      const auto ref = std::find_if(kReferenceRows.begin(), kReferenceRows.end(),
                                    [&](const ReferenceRow& r) { return row.method == r.method; });
      if (ref != kReferenceRows.end()) {
        out << fmt::format("{:>14.4f}{:>14.4f}{:>14.4f}", ref->values[0], ref->values[1], ref->values[2]);
      }
    }
    out << '\n';
    if (row.diverged) {
      diverged = true;
      err << "warning: " << row.method << " diverged: " << row.failure << '\n';
    }
  }
  if (with_reference) {
    out << "ref_* columns: reference values for this example (horizon and MPC settings unknown; not "
           "expected to match exactly)\n";
  }
  return diverged ? kDivergence : kSuccess;
}

struct OracleOptions {
  std::string path;
  double grid_min = -2.0;
  double grid_max = 2.0;
  int nodes = 4001;
  double u_min = -6.0;
  double u_max = 6.0;
  int controls = 6001;
  double tol = 1e-9;
  std::string out;
};

int cmd_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err) {
  const ProblemFile pf = load_problem(opt.path);
  if (!is_scalar(pf.problem)) {
    err << "error: the oracle needs a scalar problem (n = m = p = 1)\n";
    return kUsageError;
  }
  std::optional<StageContext> ctx;
  try {
    ctx.emplace(pf.problem, steady_state(pf.problem, pf.convention));
  } catch (const Error& e) {
    err << "error: steady state unavailable: " << e.what() << '\n';
    return kAssumptionFailure;
  }

  std::optional<Grid1D> grid;
  try {
    grid.emplace(opt.grid_min, opt.grid_max, opt.nodes);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  const ControlGrid controls{opt.u_min, opt.u_max, opt.controls};
  if (controls.n_controls < 2 || !(controls.u_min < controls.u_max)) {
    err << "error: control grid needs u_min < u_max and at least two controls\n";
    return kUsageError;
  }
  if (opt.nodes < 4001) {
    out << fmt::format("warning: {} nodes is coarser than the 4001-node reference grid; expect larger "
                       "discretization error\n",
                       opt.nodes);
  }
  // The origin is reachable from node x only if -A x / B lies on the control
  // grid; otherwise undiscounted value iteration accumulates cost forever.
  const double a = pf.problem.system().A()(0, 0);
  const double b = pf.problem.system().B()(0, 0);
  const double ratio = std::abs(a * grid->spacing() / (b * controls.spacing()));
  const double offset = -controls.u_min / controls.spacing();
  if (std::abs(ratio - std::round(ratio)) > 1e-6 || std::abs(offset - std::round(offset)) > 1e-6) {
    out << "warning: the control grid does not contain the input that returns every node to the origin; "
           "value iteration may not converge\n";
  }

  ValueTable table{*grid, {}, {}, 0, 0.0};
  try {
    table = value_iteration(*ctx, *grid, controls, opt.tol);
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  }

  if (!write_output(opt.out, out, err, [&](std::ostream& os) { write_value_table_csv(os, table); })) {
    return kUsageError;
  }

  out << fmt::format("sweeps: {} (last max change {:.3e})\n", table.sweeps, table.residual);
  out << fmt::format("V(0) = {:.10g}\n", table.value_at(0.0));
  if (is_reference_scalar_example(pf)) {
    double value_gap = 0.0;
    double policy_gap = 0.0;
    for (int i = 0; i < grid->size(); ++i) {
      const double x = grid->node(i);
      if (std::abs(x) > 0.45 + 1e-12) continue;
      const auto idx = static_cast<std::size_t>(i);
      value_gap = std::max(value_gap, std::abs(table.values[idx] - closed_form_value(x)));
      policy_gap = std::max(policy_gap, std::abs(table.policy[idx] - closed_form_policy(x)));
    }
    out << fmt::format("max |V - closed_form_value| on |x~| <= 0.45: {:.3e}\n", value_gap);
    out << fmt::format("max |policy - closed_form_policy| on |x~| <= 0.45: {:.3e} (control spacing {:.3g})\n",
                       policy_gap, controls.spacing());
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Average-cost optimal tracking toolkit", "avgtrack"};
  app.require_subcommand(1);

  std::string analyze_path;
  auto* analyze = app.add_subcommand("analyze", "Check assumptions, steady state and the LQR design");
  analyze->add_option("file", analyze_path, "Problem file (JSON)")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop simulation of one controller");
  simulate->add_option("file", sim.path, "Problem file (JSON)")->required();
  simulate->add_option("--controller", sim.controller, "lqr | mpc | exact-scalar")
      ->check(CLI::IsMember({"lqr", "mpc", "exact-scalar"}));
  simulate->add_option("--x0", sim.x0, "Initial state, comma separated (default: file's x0)");
  simulate->add_option("--steps", sim.steps, "Fixed number of steps (default: adaptive)")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", sim.out, "Trajectory CSV path ('-' for stdout)");
  simulate->add_option("--settle-tol", sim.settle_tol, "Output-error tolerance for the settling step")
      ->check(CLI::PositiveNumber);

  BenchmarkOptions bench;
  auto* benchmark = app.add_subcommand("benchmark", "Compare LQR, closed-form scalar and MPC controllers");
  benchmark->add_option("file", bench.path, "Problem file (JSON)")->required();
  benchmark->add_option("--x0", bench.x0, "Initial state, comma separated (default: file's x0)");
  benchmark->add_option("--steps", bench.steps, "Fixed number of steps (default: adaptive)")
      ->check(CLI::NonNegativeNumber);
  benchmark->add_option("--out", bench.out, "Benchmark CSV path ('-' for stdout)");

  OracleOptions orc;
  auto* oracle = app.add_subcommand("oracle", "Grid value iteration for scalar problems");
  oracle->add_option("file", orc.path, "Problem file (JSON)")->required();
  oracle->add_option("--grid-min", orc.grid_min, "Lower end of the deviation-state grid");
  oracle->add_option("--grid-max", orc.grid_max, "Upper end of the deviation-state grid");
  oracle->add_option("--nodes", orc.nodes, "Number of state nodes (>= 101)");
  oracle->add_option("--u-min", orc.u_min, "Lower end of the control grid");
  oracle->add_option("--u-max", orc.u_max, "Upper end of the control grid");
  oracle->add_option("--controls", orc.controls, "Number of control grid points");
  oracle->add_option("--tol", orc.tol, "Stop when the max node change is below this")->check(CLI::PositiveNumber);
  oracle->add_option("--out", orc.out, "Value table CSV path ('-' for stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_path, out);
    if (*simulate) return cmd_simulate(sim, out, err);
    if (*benchmark) return cmd_benchmark(bench, out, err);
    if (*oracle) return cmd_oracle(orc, out, err);
  } catch (const ProblemFileError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace avgtrack::cli
