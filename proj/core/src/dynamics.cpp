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

#include "tmpc/dynamics.hpp"

#include <cmath>
#include <string>

#include "tmpc/errors.hpp"
#include "tmpc/so3.hpp"

namespace tmpc {

void PhysicalParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("PhysicalParams: ") + what);
  };
  require(mass_kg > 0.0, "mass_kg must be > 0");
  require((inertia_diag.array() > 0.0).all(), "inertia_diag entries must be > 0");
  require(k_t > 0.0, "k_t must be > 0");
  require(k_q > 0.0, "k_q must be > 0");
  require(f_min >= 0.0 && f_min < f_max, "need 0 <= f_min < f_max");
  require(T_servo > 0.0, "T_servo must be > 0");
  require(servo_limit_rad > 0.0, "servo_limit_rad must be > 0");
  require(g > 0.0, "g must be > 0");
  double dir_sum = 0.0;
  for (double d : rotor_dir) {
    require(d == 1.0 || d == -1.0, "rotor_dir entries must be +1 or -1");
    dir_sum += d;
  }
  require(dir_sum == 0.0, "rotor_dir must sum to zero");
  for (const Mat3& r : arm_rot_body) {
    require((r.transpose() * r - Mat3::Identity()).norm() < 1e-9 &&
                r.determinant() > 0.0,
            "arm_rot_body entries must be proper rotations");
  }
}

PhysicalParams with_symmetric_geometry(PhysicalParams params,
                                       double arm_length_m) {
  // Arms at 45, 135, 225 and 315 deg. Cosines and sines share one magnitude
  // so opposite arms cancel exactly.
  constexpr double kHalfSqrt2 = std::numbers::sqrt2 / 2.0;
  constexpr double kCos[kNumRotors] = {1.0, -1.0, -1.0, 1.0};
  constexpr double kSin[kNumRotors] = {1.0, 1.0, -1.0, -1.0};
  for (int r = 0; r < kNumRotors; ++r) {
    const double c = kCos[r] * kHalfSqrt2;
    const double s = kSin[r] * kHalfSqrt2;
    Mat3 rot;
    rot << c, -s, 0.0,
           s, c, 0.0,
           0.0, 0.0, 1.0;
    params.arm_rot_body[r] = rot;
    params.rotor_pos_body[r] = arm_length_m * Vec3(c, s, 0.0);
  }
  return params;
}

PhysicalParams default_params() {
  return with_symmetric_geometry(PhysicalParams{}, 0.2);
}

Mat3 rotor_to_body(const PhysicalParams& params, int rotor, double alpha) {
  return params.arm_rot_body[rotor] * so3::rot_x(alpha);
}

Wrench rotor_wrench(const Vec4& alpha_s, const Vec4& f,
                    const PhysicalParams& params) {
  Wrench w;
  const double torque_ratio = params.k_q / params.k_t;
  for (int r = 0; r < kNumRotors; ++r) {
    // Third column of B_R_E * Rx(alpha) is the rotor thrust axis in B.
    const Vec3 axis = rotor_to_body(params, r, alpha_s[r]).col(2);
    const Vec3 force = f[r] * axis;
    w.force_b += force;
    w.torque_b += (-params.rotor_dir[r] * f[r] * torque_ratio) * axis +
                  params.rotor_pos_body[r].cross(force);
  }
  return w;
}

Vec3 linear_acceleration(const State& x, const Vec4& f,
                         const PhysicalParams& params) {
  const Wrench w = rotor_wrench(x.alpha_s, f, params);
  return x.q * w.force_b / params.mass_kg - Vec3(0.0, 0.0, params.g);
}

StateDerivative state_derivative(const State& x, const ControlInput& u,
                                 const PhysicalParams& params) {
  const Wrench w = rotor_wrench(x.alpha_s, u.f, params);
  StateDerivative d;
  d.dp = x.v;
  d.dv = x.q * w.force_b / params.mass_kg - Vec3(0.0, 0.0, params.g);

  const Eigen::Quaterniond omega_quat(0.0, x.omega_b.x(), x.omega_b.y(),
                                      x.omega_b.z());
  const Eigen::Quaterniond qdot = x.q * omega_quat;
  d.dq = 0.5 * so3::to_wxyz(qdot);

  const Vec3 inertia_omega = params.inertia_diag.cwiseProduct(x.omega_b);
  d.domega_b = (-x.omega_b.cross(inertia_omega) + w.torque_b)
                   .cwiseQuotient(params.inertia_diag);
  d.dalpha_s = (u.alpha_c - x.alpha_s) / params.T_servo;
  return d;
}

ControlInput hover_input(const PhysicalParams& params) {
  const double per_rotor = params.mass_kg * params.g / kNumRotors;
  if (per_rotor < params.f_min || per_rotor > params.f_max) {
    throw InfeasibleHoverError("hover thrust " + std::to_string(per_rotor) +
                               " N outside [f_min, f_max]");
  }
  ControlInput u;
  u.f.setConstant(per_rotor);
  u.alpha_c.setZero();
  return u;
}

State hover_state(const Vec3& position) {
  State x;
  x.p = position;
  return x;
}

double thrust_from_rotor_speed(double omega, const PhysicalParams& params) {
  return params.k_t * omega * omega;
}

double rotor_speed_from_thrust(double thrust, const PhysicalParams& params) {
  if (thrust < 0.0) throw InvalidArgument("thrust must be >= 0");
  return std::sqrt(thrust / params.k_t);
}

bool is_finite(const State& x) {
  return x.p.allFinite() && x.v.allFinite() && x.q.coeffs().allFinite() &&
         x.omega_b.allFinite() && x.alpha_s.allFinite();
}

bool is_finite(const StateDerivative& d) {
  return d.dp.allFinite() && d.dv.allFinite() && d.dq.allFinite() &&
         d.domega_b.allFinite() && d.dalpha_s.allFinite();
}

}  // namespace tmpc
