#include "avgtrack/avgtrack.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace avgtrack;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

TrackingProblem scalar_problem() {
  return TrackingProblem(LinearSystem(scalar(2.0), scalar(1.0), scalar(1.0)), scalar(1.0), scalar(1.0),
                         Vector::Constant(1, 1.0));
}

// Lightly damped chain of n integrators driven by one input, tracking the
// first state.
TrackingProblem chain_problem(int n) {
  Matrix a = Matrix::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 0.1;
  a *= 0.99;
  Matrix b = Matrix::Zero(n, 1);
  b(n - 1, 0) = 0.1;
  Matrix c = Matrix::Zero(1, n);
  c(0, 0) = 1.0;
  return TrackingProblem(LinearSystem(a, b, c), scalar(1.0), scalar(0.1), Vector::Constant(1, 1.0));
}

void BM_SolveDare(benchmark::State& state) {
  const TrackingProblem prob = chain_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dare(prob.system(), prob.Q(), prob.R()));
  }
}
BENCHMARK(BM_SolveDare)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_SolveLinear(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = dist(rng);
  a += static_cast<double>(n) * Matrix::Identity(n, n);
  const Vector b = Vector::Ones(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_linear(a, b));
  }
}
BENCHMARK(BM_SolveLinear)->RangeMultiplier(4)->Range(4, 256);

void BM_MpcStep(benchmark::State& state) {
  const TrackingProblem prob = scalar_problem();
  const StageContext ctx(prob, steady_state(prob));
  const LqrSolution lqr = solve_dare(prob.system(), prob.Q(), prob.R());
  MpcConfig cfg;
  cfg.horizon = static_cast<int>(state.range(0));
  cfg.rollout = static_cast<int>(state.range(1));
  const Controller ctrl = mpc_controller(ctx, lqr.K, cfg);
  const Vector x = Vector::Constant(1, 12.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctrl(x));
  }
}
BENCHMARK(BM_MpcStep)->Args({5, 10})->Args({10, 30})->Unit(benchmark::kMillisecond);

void BM_BellmanSweep(benchmark::State& state) {
  const TrackingProblem prob = scalar_problem();
  const StageContext ctx(prob, steady_state(prob));
  const Grid1D grid(-2.0, 2.0, static_cast<int>(state.range(0)));
  const ControlGrid controls{-6.0, 6.0, static_cast<int>(state.range(1))};
  const std::vector<double> values(grid.size(), 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bellman_sweep(ctx, grid, controls, values));
  }
}
BENCHMARK(BM_BellmanSweep)->Args({1001, 1501})->Args({4001, 6001})->Unit(benchmark::kMillisecond);

void BM_LqrRollout(benchmark::State& state) {
  const TrackingProblem prob = chain_problem(4);
  const SteadyState ss = steady_state(prob);
  const LqrSolution lqr = solve_dare(prob.system(), prob.Q(), prob.R());
  const Controller ctrl = lqr_tracking_controller(prob.system(), lqr.K, ss);
  const Vector x0 = Vector::Zero(4);
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(prob.system(), ctrl, x0, steps));
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_LqrRollout)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
