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

#include "tmpc/plant.hpp"

#include <algorithm>
#include <cmath>

#include "tmpc/errors.hpp"
#include "tmpc/integrator.hpp"

namespace tmpc {

void DisturbanceConfig::validate() const {
  if (!(ground_effect_rotor_radius > 0.0)) {
    throw InvalidArgument("DisturbanceConfig: rotor radius must be > 0");
  }
  if (!(ground_effect_cutoff_height > 0.5 * ground_effect_rotor_radius)) {
    throw InvalidArgument(
        "DisturbanceConfig: cutoff height must exceed half the rotor radius");
  }
  if (thrust_gain_error < 0.5 || thrust_gain_error > 1.5) {
    throw InvalidArgument("DisturbanceConfig: thrust_gain_error outside [0.5, 1.5]");
  }
  if ((drag_coeff.array() < 0.0).any()) {
    throw InvalidArgument("DisturbanceConfig: drag_coeff must be >= 0");
  }
  if (noise_std_pos < 0.0 || noise_std_vel < 0.0) {
    throw InvalidArgument("DisturbanceConfig: noise std must be >= 0");
  }
}

DisturbanceConfig DisturbanceConfig::none() {
  DisturbanceConfig d;
  d.ground_effect_enabled = false;
  d.drag_coeff.setZero();
  d.thrust_gain_error = 1.0;
  d.thrust_bias = 0.0;
  d.noise_std_pos = 0.0;
  d.noise_std_vel = 0.0;
  return d;
}

PlantState make_plant_state(const State& initial,
                            const DisturbanceConfig& dist) {
  PlantState ps;
  ps.true_state = initial;
  ps.time = 0.0;
  ps.rng.seed(dist.rng_seed);
  return ps;
}

double ground_effect_factor(double z, const DisturbanceConfig& dist) {
  if (!dist.ground_effect_enabled || z >= dist.ground_effect_cutoff_height) {
    return 1.0;
  }
  if (z <= 0.0) return 2.0;
  const double ratio = dist.ground_effect_rotor_radius / (4.0 * z);
  const double denom = 1.0 - ratio * ratio;
  if (denom <= 0.5) return 2.0;
  return std::clamp(1.0 / denom, 1.0, 2.0);
}

StateDerivative true_state_derivative(const State& x, const ControlInput& u,
                                      const DisturbanceConfig& dist,
                                      const PhysicalParams& params) {
  ControlInput effective = u;
  const double ge = ground_effect_factor(x.p.z(), dist);
  effective.f = ((dist.thrust_gain_error * u.f).array() + dist.thrust_bias)
                    .cwiseMax(0.0) * ge;
  StateDerivative d = state_derivative(x, effective, params);

  Vec3 drag;
  if (dist.drag_model == DragModel::kLinear) {
    drag = -dist.drag_coeff.cwiseProduct(x.v);
  } else {
    drag = -dist.drag_coeff.cwiseProduct(x.v.cwiseAbs().cwiseProduct(x.v));
  }
  d.dv += drag / params.mass_kg;
  return d;
}

PlantState plant_step(PlantState ps, const ControlInput& u, double dt,
                      const DisturbanceConfig& dist,
                      const PhysicalParams& params) {
  if (!(dt > 0.0)) throw InvalidArgument("plant_step: dt must be > 0");
  const double limit = params.servo_limit_rad;
  ControlInput applied = u;
  applied.alpha_c = u.alpha_c.cwiseMax(-limit).cwiseMin(limit);

  const double h = dt / kPlantSubsteps;
  auto deriv = [&dist, &params](const State& s, const ControlInput& in) {
    return true_state_derivative(s, in, dist, params);
  };
  for (int i = 0; i < kPlantSubsteps; ++i) {
    ps.true_state = rk4_step(deriv, ps.true_state, applied, h);
    ps.true_state.alpha_s = ps.true_state.alpha_s.cwiseMax(-limit).cwiseMin(limit);
    ps.time += h;
    if (ps.true_state.p.z() <= 0.0) {
      throw GroundContactError(ps.time, ps.true_state.p.z());
    }
  }
  return ps;
}

State measure(PlantState& ps, const DisturbanceConfig& dist) {
  State y = ps.true_state;
  if (dist.noise_std_pos > 0.0) {
    std::normal_distribution<double> n(0.0, dist.noise_std_pos);
    for (int i = 0; i < 3; ++i) y.p[i] += n(ps.rng);
  }
  if (dist.noise_std_vel > 0.0) {
    std::normal_distribution<double> n(0.0, dist.noise_std_vel);
    for (int i = 0; i < 3; ++i) y.v[i] += n(ps.rng);
  }
  return y;
}

}  // namespace tmpc
