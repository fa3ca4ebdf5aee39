#include <benchmark/benchmark.h>

#include <ridebot/control.hpp>
#include <ridebot/dynamics.hpp>
#include <ridebot/equilibrium.hpp>
#include <ridebot/linearize.hpp>
#include <ridebot/phri.hpp>
#include <ridebot/simulate.hpp>

namespace {

using namespace ridebot;

void BM_EomForward(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  const PlanarState s{0.1, -0.2, 0.5, 0.3, -0.4, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(eom_forward(s, {5.0, -3.0}, p));
  }
}
BENCHMARK(BM_EomForward);

void BM_PhriWrench(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  const PlanarState s{0.1, -0.2, 0.5, 0.3, -0.4, 2.0};
  const Accelerations qdd = eom_forward(s, {5.0, -3.0}, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(phri_wrench(s, qdd, 5.0, p));
  }
}
BENCHMARK(BM_PhriWrench);

void BM_Linearize(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  for (auto _ : state) {
    benchmark::DoNotOptimize(linearize(p, {}, {}));
  }
}
BENCHMARK(BM_Linearize);

void BM_SynthesizeGains(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_gains(p));
  }
}
BENCHMARK(BM_SynthesizeGains);

void BM_FindEquilibrium(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  const Gains g = synthesize_gains(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_equilibrium(ControlScheme::hics2(0.7), g, p, 1.4));
  }
}
BENCHMARK(BM_FindEquilibrium);

// Five seconds of closed-loop braking at dt = 1e-3.
void BM_SimulateBraking(benchmark::State& state) {
  const RiderBallbotParams p = default_rider();
  const Gains g = synthesize_gains(p);
  const ControlScheme sch = ControlScheme::hacs1(0.5);
  const Equilibrium eq = find_equilibrium(sch, g, p, 1.4);
  const RiderPolicy rider = stiff_torso_rider();
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(eq.state, rider, sch, g, p, SimOptions{}));
  }
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_SimulateBraking)->Unit(benchmark::kMillisecond);

}  // namespace
