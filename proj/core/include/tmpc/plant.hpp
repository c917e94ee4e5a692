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

// Simulated "true" vehicle: the analytical model plus disturbances it does
// not know about, and a noisy measurement model.

#ifndef TMPC_PLANT_HPP_
#define TMPC_PLANT_HPP_

#include <cstdint>
#include <random>

#include "tmpc/dynamics.hpp"

namespace tmpc {

enum class DragModel { kLinear, kQuadratic };

struct DisturbanceConfig {
  bool ground_effect_enabled = true;
  double ground_effect_rotor_radius = 0.1;    // m
  double ground_effect_cutoff_height = 0.6;   // m
  Vec3 drag_coeff{0.4, 0.4, 0.2};             // N s/m (linear)
  DragModel drag_model = DragModel::kLinear;
  double thrust_gain_error = 0.95;
  double thrust_bias = 0.0;                   // N per rotor
  double noise_std_pos = 0.001;               // m
  double noise_std_vel = 0.005;               // m/s
  std::uint64_t rng_seed = 7;

  void validate() const;

  // Unit gain, no bias, drag, ground effect or noise.
  static DisturbanceConfig none();
};

struct PlantState {
  State true_state;
  double time = 0.0;
  std::mt19937_64 rng;  // measurement noise stream
};

PlantState make_plant_state(const State& initial, const DisturbanceConfig& dist);

// Cheeseman-Bennett in-ground-effect thrust ratio at height z, clamped to
// [1, 2]; exactly 1 at or above the cutoff height or when disabled.
double ground_effect_factor(double z, const DisturbanceConfig& dist);

// Derivative of the true dynamics.
StateDerivative true_state_derivative(const State& x, const ControlInput& u,
                                      const DisturbanceConfig& dist,
                                      const PhysicalParams& params);

inline constexpr int kPlantSubsteps = 10;

// Advances the true state by dt using kPlantSubsteps RK4 substeps. Servo
// commands and servo angles are clamped to the servo limit. Throws
// GroundContactError if the vehicle reaches z <= 0.
PlantState plant_step(PlantState ps, const ControlInput& u, double dt,
                      const DisturbanceConfig& dist,
                      const PhysicalParams& params);

// True state with Gaussian noise on position and velocity. Advances the
// noise stream held in ps.
State measure(PlantState& ps, const DisturbanceConfig& dist);

}  // namespace tmpc

#endif  // TMPC_PLANT_HPP_
