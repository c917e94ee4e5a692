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

#include "tmpc/integrator.hpp"

#include <array>

#include "tmpc/so3.hpp"

namespace tmpc {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("IntegratorConfig: dt must be > 0");
  if (n_stages != 4) {
    throw InvalidArgument("IntegratorConfig: only 4-stage RK4 is supported");
  }
}

State advance(const State& x, const StateDerivative& d, double h) {
  State out;
  out.p = x.p + h * d.dp;
  out.v = x.v + h * d.dv;
  out.q = so3::from_wxyz(so3::to_wxyz(x.q) + h * d.dq);
  out.omega_b = x.omega_b + h * d.domega_b;
  out.alpha_s = x.alpha_s + h * d.dalpha_s;
  return out;
}

State rk4_step(const State& x, const ControlInput& u, double dt,
               const PhysicalParams& params) {
  return rk4_step(
      [&params](const State& s, const ControlInput& in) {
        return state_derivative(s, in, params);
      },
      x, u, dt);
}

namespace {

// (h, v) packed as a 4-vector and its 4x3 sensitivity to the residual.
using HvVec = Eigen::Vector4d;
using HvJac = Eigen::Matrix<double, 4, 3>;

struct HvStage {
  HvVec k;
  HvJac dk;
};

HvStage hv_derivative(const HvVec& y, const HvJac& dy, const Vec3& accel) {
  HvStage s;
  s.k[0] = y[3];  // dh/dt = v_z
  s.k.tail<3>() = accel;
  s.dk.row(0) = dy.row(3);
  s.dk.bottomRows<3>() = Mat3::Identity();
  return s;
}

HeightVelocitySensitivity integrate_hv(const NetworkInput& xi,
                                       const Vec3& residual_accel, double dt,
                                       const PhysicalParams& params) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step_hv: dt must be > 0");
  State frozen;
  frozen.q = xi.q.normalized();
  frozen.alpha_s = xi.alpha_s;
  // Attitude, servo angles and thrusts are frozen, so the analytical part of
  // the acceleration is the same at every stage.
  const Vec3 accel = linear_acceleration(frozen, xi.f, params) + residual_accel;

  HvVec y0;
  y0 << xi.z, xi.v;
  const HvJac dy0 = HvJac::Zero();

  const HvStage s1 = hv_derivative(y0, dy0, accel);
  const HvStage s2 = hv_derivative(y0 + 0.5 * dt * s1.k,
                                   dy0 + 0.5 * dt * s1.dk, accel);
  const HvStage s3 = hv_derivative(y0 + 0.5 * dt * s2.k,
                                   dy0 + 0.5 * dt * s2.dk, accel);
  const HvStage s4 = hv_derivative(y0 + dt * s3.k, dy0 + dt * s3.dk, accel);

  const HvVec y1 = y0 + dt / 6.0 * (s1.k + 2.0 * s2.k + 2.0 * s3.k + s4.k);
  const HvJac dy1 =
      dy0 + dt / 6.0 * (s1.dk + 2.0 * s2.dk + 2.0 * s3.dk + s4.dk);
  if (!y1.allFinite() || !dy1.allFinite()) {
    throw NonFiniteError("rk4_step_hv: result not finite");
  }

  HeightVelocitySensitivity out;
  out.value.h = y1[0];
  out.value.v = y1.tail<3>();
  out.dh_dresidual = dy1.row(0).transpose();
  out.dv_dresidual = dy1.bottomRows<3>();
  return out;
}

}  // namespace

HeightVelocity rk4_step_hv(const NetworkInput& xi, const Vec3& residual_accel,
                           double dt, const PhysicalParams& params) {
  return integrate_hv(xi, residual_accel, dt, params).value;
}

HeightVelocitySensitivity rk4_step_hv_sensitivity(const NetworkInput& xi,
                                                  const Vec3& residual_accel,
                                                  double dt,
                                                  const PhysicalParams& params) {
  return integrate_hv(xi, residual_accel, dt, params);
}

}  // namespace tmpc
