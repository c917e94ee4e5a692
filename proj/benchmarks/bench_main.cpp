// Copyright 2026 The tmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "tmpc/dynamics.hpp"
#include "tmpc/integrator.hpp"
#include "tmpc/nmpc.hpp"
#include "tmpc/residual_net.hpp"
#include "tmpc/scenario.hpp"
#include "tmpc/training.hpp"

namespace tmpc {
namespace {

void BM_Rk4Step(benchmark::State& state) {
  const PhysicalParams p = default_params();
  State x = hover_state({0, 0, 1});
  x.omega_b = {0.1, -0.2, 0.05};
  const ControlInput u = hover_input(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rk4_step(x, u, 0.1, p));
  }
}
BENCHMARK(BM_Rk4Step);

void BM_MlpForward(benchmark::State& state) {
  const MlpParams net = MlpParams::xavier(3);
  NetworkInput xi;
  xi.z = 1.0;
  xi.f.setConstant(4.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, xi));
  }
}
BENCHMARK(BM_MlpForward);

void BM_MlpBackward(benchmark::State& state) {
  const MlpParams net = MlpParams::xavier(3);
  NetworkInput xi;
  xi.z = 1.0;
  xi.f.setConstant(4.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(net, xi, Vec3(1.0, -0.5, 0.25)));
  }
}
BENCHMARK(BM_MlpBackward);

void BM_EnergyLossGrad(benchmark::State& state) {
  const PhysicalParams p = default_params();
  const NetworkInput xi = NetworkInput::from(hover_state({0, 0, 1}), hover_input(p));
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_loss_grad(xi, Vec3(0.1, 0.2, -0.3), p, 0.1));
  }
}
BENCHMARK(BM_EnergyLossGrad);

void BM_Linearize(benchmark::State& state) {
  const PhysicalParams p = default_params();
  const DynamicsModel model = DynamicsModel::analytical(p);
  const State x = hover_state({0, 0, 1});
  const ControlInput u = hover_input(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(linearize(model, x, u, 0.1));
  }
}
BENCHMARK(BM_Linearize);

void BM_SolveRti(benchmark::State& state) {
  const PhysicalParams p = default_params();
  const DynamicsModel model = state.range(0) == 0
                                  ? DynamicsModel::analytical(p)
                                  : DynamicsModel::neural(p, MlpParams::xavier(5));
  const OcpConfig cfg;
  const Scenario s = circle_scenario(p);
  SolverMemory mem =
      SolverMemory::cold_start(s.initial_state, hover_input(p), cfg.horizon_N);
  const auto refs = horizon_references(s, 5.0, cfg.horizon_N, cfg.t_step);
  State x_hat = s.initial_state;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_rti(mem, x_hat, refs, cfg, model));
  }
}
BENCHMARK(BM_SolveRti)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tmpc
BENCHMARK_MAIN();
