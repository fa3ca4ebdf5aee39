#include <benchmark/benchmark.h>

#include <ridebot/sweep.hpp>
#include <ridebot/trajopt.hpp>

namespace {

using namespace ridebot;

NLPInstance instance(int segments) {
  static const RiderBallbotParams p = default_rider();
  static const Gains g = synthesize_gains(p);
  BrakingProblem prob;
  prob.scheme = ControlScheme::hacs1(1.0);
  prob.segments = segments;
  return transcribe(prob, p, g);
}

void BM_Transcribe(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(instance(static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Transcribe)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ConstraintJacobian(benchmark::State& state) {
  const NLPInstance inst = instance(static_cast<int>(state.range(0)));
  const Eigen::VectorXd x = inst.initial_guess();
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.nlp.equality_jacobian(x));
  }
}
BENCHMARK(BM_ConstraintJacobian)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_LagrangianHessian(benchmark::State& state) {
  const NLPInstance inst = instance(static_cast<int>(state.range(0)));
  const Eigen::VectorXd x = inst.initial_guess();
  const Eigen::VectorXd y_eq = Eigen::VectorXd::Ones(inst.nlp.num_equalities());
  const Eigen::VectorXd y_in = Eigen::VectorXd::Ones(inst.nlp.num_inequalities());
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.nlp.lagrangian_hessian(x, 1.0, y_eq, y_in));
  }
}
BENCHMARK(BM_LagrangianHessian)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_SolveNlp(benchmark::State& state) {
  const NLPInstance inst = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const OptimalSolution sol = solve_nlp(inst);
    state.counters["iterations"] = sol.iterations;
    benchmark::DoNotOptimize(sol.J_star);
  }
}
BENCHMARK(BM_SolveNlp)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond)->Iterations(3);

// One warm-started chain of the sweep harness.
void BM_SweepChain(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  const Gains g = synthesize_gains(p);
  SweepOptions opt;
  opt.schemes = {"hacs1"};
  opt.sensitivities = {1.0, 0.9, 0.8, 0.7};
  opt.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sweep(opt, p, g, BrakingWeights{}));
  }
}
BENCHMARK(BM_SweepChain)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
