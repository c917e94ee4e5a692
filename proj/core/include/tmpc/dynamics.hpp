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

// Analytical rigid-body model of a tiltable quadrotor.
//
// Frames: world W is ENU (z up), body B is FLU with its origin at the center
// of gravity. Each arm r has an end-of-arm frame E_r whose x axis points
// outwards; the rotor frame R_r is E_r rotated by the servo angle about E_r's
// x axis. Rotor thrust acts along R_r's z axis.
//
// Quaternions are Hamilton, map body to world, and are flattened scalar
// first (w, x, y, z).

#ifndef TMPC_DYNAMICS_HPP_
#define TMPC_DYNAMICS_HPP_

#include <array>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tmpc {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kNumRotors = 4;

struct PhysicalParams {
  double mass_kg = 2.0;
  Vec3 inertia_diag{0.02, 0.02, 0.04};
  double k_t = 1.3e-5;  // thrust coefficient, f = k_t * Omega^2
  double k_q = 2.1e-7;  // drag torque coefficient, tau = k_q * Omega^2
  std::array<Vec3, kNumRotors> rotor_pos_body{};
  std::array<double, kNumRotors> rotor_dir{1.0, -1.0, 1.0, -1.0};
  std::array<Mat3, kNumRotors> arm_rot_body{};
  double f_min = 0.0;
  double f_max = 15.0;
  double servo_limit_rad = std::numbers::pi / 2.0;
  double T_servo = 0.048;
  double g = 9.81;

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

// Synthetic ~2 kg airframe: 0.2 m arms at 45/135/225/315 deg in the body
// x-y plane, alternating rotor directions.
PhysicalParams default_params();

// Arm frames rotated about body z so that each arm's x axis points outwards.
PhysicalParams with_symmetric_geometry(PhysicalParams params,
                                       double arm_length_m);

struct State {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vec3 omega_b = Vec3::Zero();
  Vec4 alpha_s = Vec4::Zero();
};

struct ControlInput {
  Vec4 f = Vec4::Zero();
  Vec4 alpha_c = Vec4::Zero();
};

struct Wrench {
  Vec3 force_b = Vec3::Zero();
  Vec3 torque_b = Vec3::Zero();
};

struct StateDerivative {
  Vec3 dp = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Vec4 dq = Vec4::Zero();  // (w, x, y, z), not renormalized
  Vec3 domega_b = Vec3::Zero();
  Vec4 dalpha_s = Vec4::Zero();
};

// Rotation from rotor frame r to the body frame for servo angle alpha.
Mat3 rotor_to_body(const PhysicalParams& params, int rotor, double alpha);

Wrench rotor_wrench(const Vec4& alpha_s, const Vec4& f,
                    const PhysicalParams& params);

// Full state derivative. The wrench is built from the current servo state
// alpha_s and the commanded thrusts; u.alpha_c only drives the servo lag.
StateDerivative state_derivative(const State& x, const ControlInput& u,
                                 const PhysicalParams& params);

// World-frame linear acceleration predicted by the analytical model.
Vec3 linear_acceleration(const State& x, const Vec4& f,
                         const PhysicalParams& params);

ControlInput hover_input(const PhysicalParams& params);

State hover_state(const Vec3& position);

// Rotor speed (rad/s) <-> thrust (N) via f = k_t * Omega^2.
double thrust_from_rotor_speed(double omega, const PhysicalParams& params);
double rotor_speed_from_thrust(double thrust, const PhysicalParams& params);

bool is_finite(const State& x);
bool is_finite(const StateDerivative& d);

}  // namespace tmpc

#endif  // TMPC_DYNAMICS_HPP_
