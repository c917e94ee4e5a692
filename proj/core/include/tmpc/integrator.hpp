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

// Classical fourth-order Runge-Kutta propagation.

#ifndef TMPC_INTEGRATOR_HPP_
#define TMPC_INTEGRATOR_HPP_

#include <concepts>

#include "tmpc/dynamics.hpp"
#include "tmpc/errors.hpp"
#include "tmpc/network_input.hpp"

namespace tmpc {

struct IntegratorConfig {
  double dt = 0.1;
  int n_stages = 4;

  void validate() const;
};

template <typename F>
concept DerivativeFn = requires(F f, const State& x, const ControlInput& u) {
  { f(x, u) } -> std::convertible_to<StateDerivative>;
};

// x + h * d with the quaternion treated as a plain 4-vector.
State advance(const State& x, const StateDerivative& d, double h);

// One RK4 step with the input held constant across stages. The quaternion
// is renormalized once, after the step. Throws NonFiniteError if any stage
// produces NaN/Inf.
template <DerivativeFn F>
State rk4_step(F&& deriv, const State& x, const ControlInput& u, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step: dt must be > 0");
  const StateDerivative k1 = deriv(x, u);
  if (!is_finite(k1)) throw NonFiniteError("rk4_step: stage 1 not finite");
  const StateDerivative k2 = deriv(advance(x, k1, 0.5 * dt), u);
  if (!is_finite(k2)) throw NonFiniteError("rk4_step: stage 2 not finite");
  const StateDerivative k3 = deriv(advance(x, k2, 0.5 * dt), u);
  if (!is_finite(k3)) throw NonFiniteError("rk4_step: stage 3 not finite");
  const StateDerivative k4 = deriv(advance(x, k3, dt), u);
  if (!is_finite(k4)) throw NonFiniteError("rk4_step: stage 4 not finite");

  StateDerivative sum;
  sum.dp = k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp;
  sum.dv = k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv;
  sum.dq = k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq;
  sum.domega_b = k1.domega_b + 2.0 * k2.domega_b + 2.0 * k3.domega_b +
                 k4.domega_b;
  sum.dalpha_s = k1.dalpha_s + 2.0 * k2.dalpha_s + 2.0 * k3.dalpha_s +
                 k4.dalpha_s;
  State next = advance(x, sum, dt / 6.0);
  next.q.normalize();
  if (!is_finite(next)) throw NonFiniteError("rk4_step: result not finite");
  return next;
}

// RK4 on the analytical model.
State rk4_step(const State& x, const ControlInput& u, double dt,
               const PhysicalParams& params);

struct HeightVelocity {
  double h = 0.0;
  Vec3 v = Vec3::Zero();
};

// Sensitivity of the restricted step with respect to the residual.
struct HeightVelocitySensitivity {
  HeightVelocity value;
  Vec3 dh_dresidual = Vec3::Zero();  // row vector stored as a column
  Mat3 dv_dresidual = Mat3::Zero();
};

// RK4 over height and velocity only. Attitude, servo angles and thrusts are
// frozen at their xi values; the residual acceleration is added to dv/dt and
// held constant across the stages.
HeightVelocity rk4_step_hv(const NetworkInput& xi, const Vec3& residual_accel,
                           double dt, const PhysicalParams& params);

// Same step, also propagating d(h, v)/d(residual) through every stage.
HeightVelocitySensitivity rk4_step_hv_sensitivity(const NetworkInput& xi,
                                                  const Vec3& residual_accel,
                                                  double dt,
                                                  const PhysicalParams& params);

}  // namespace tmpc

#endif  // TMPC_INTEGRATOR_HPP_
