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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tmpc/dynamics.hpp"
#include "tmpc/errors.hpp"
#include "tmpc/integrator.hpp"
#include "tmpc/so3.hpp"

namespace tmpc {
namespace {

constexpr double kPi = std::numbers::pi;

// Per-rotor brute force with hand-written rotation matrices and plain loops.
struct RawWrench {
  double force[3] = {0, 0, 0};
  double torque[3] = {0, 0, 0};
};

RawWrench brute_force_wrench(const double yaw[4], const double pos[4][3],
                             const double dir[4], const double alpha[4],
                             const double f[4], double kq_over_kt) {
  RawWrench w;
  for (int r = 0; r < 4; ++r) {
    const double cz = std::cos(yaw[r]), sz = std::sin(yaw[r]);
    const double cx = std::cos(alpha[r]), sx = std::sin(alpha[r]);
    const double rz[3][3] = {{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}};
    const double rx[3][3] = {{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}};
    double rot[3][3] = {};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) rot[i][j] += rz[i][k] * rx[k][j];
    double force[3], axis[3];
    for (int i = 0; i < 3; ++i) {
      axis[i] = rot[i][2];
      force[i] = f[r] * axis[i];
      w.force[i] += force[i];
    }
    const double lever[3] = {pos[r][1] * force[2] - pos[r][2] * force[1],
                             pos[r][2] * force[0] - pos[r][0] * force[2],
                             pos[r][0] * force[1] - pos[r][1] * force[0]};
    for (int i = 0; i < 3; ++i) {
      w.torque[i] += lever[i] - dir[r] * f[r] * kq_over_kt * axis[i];
    }
  }
  return w;
}

TEST(RotorWrench, LevelEqualThrustIsPureLift) {
  const PhysicalParams p = default_params();
  const Wrench w = rotor_wrench(Vec4::Zero(), Vec4::Constant(3.0), p);
  EXPECT_NEAR(w.force_b.x(), 0.0, 1e-14);
  EXPECT_NEAR(w.force_b.y(), 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(w.force_b.z(), 12.0);
  EXPECT_NEAR(w.torque_b.norm(), 0.0, 1e-14);
}

TEST(RotorWrench, FullTiltHasNoVerticalForce) {
  const PhysicalParams p = default_params();
  const Wrench w = rotor_wrench(Vec4::Constant(kPi / 2), Vec4(2.0, 3.0, 4.0, 5.0), p);
  EXPECT_NEAR(w.force_b.z(), 0.0, 1e-12);
}

TEST(RotorWrench, MatchesBruteForce) {
  const PhysicalParams p = default_params();
  double yaw[4], pos[4][3], dir[4];
  for (int r = 0; r < 4; ++r) {
    yaw[r] = kPi / 4 + r * kPi / 2;
    for (int i = 0; i < 3; ++i) pos[r][i] = p.rotor_pos_body[r][i];
    dir[r] = p.rotor_dir[r];
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi / 2, kPi / 2), thr(0.0, 15.0);
  for (int trial = 0; trial < 200; ++trial) {
    double alpha[4], f[4];
    Vec4 a, fv;
    for (int r = 0; r < 4; ++r) {
      a[r] = alpha[r] = ang(rng);
      fv[r] = f[r] = thr(rng);
    }
    const RawWrench ref = brute_force_wrench(yaw, pos, dir, alpha, f, p.k_q / p.k_t);
    const Wrench w = rotor_wrench(a, fv, p);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(w.force_b[i], ref.force[i], 1e-12);
      EXPECT_NEAR(w.torque_b[i], ref.torque[i], 1e-12);
    }
  }
}

TEST(RotorWrench, LinearInThrust) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec4 alpha = Vec4::NullaryExpr([&] { return 1.5 * u(rng); });
    const Vec4 f1 = Vec4::NullaryExpr([&] { return 10.0 * u(rng); });
    const Vec4 f2 = Vec4::NullaryExpr([&] { return 10.0 * u(rng); });
    const double a = u(rng), b = u(rng);
    const Wrench lhs = rotor_wrench(alpha, a * f1 + b * f2, p);
    const Wrench w1 = rotor_wrench(alpha, f1, p), w2 = rotor_wrench(alpha, f2, p);
    EXPECT_LT((lhs.force_b - (a * w1.force_b + b * w2.force_b)).norm(), 1e-12);
    EXPECT_LT((lhs.torque_b - (a * w1.torque_b + b * w2.torque_b)).norm(), 1e-12);
  }
}

TEST(RotorWrench, ForceMagnitudeInvariantUnderCommonFrameRotation) {
  const PhysicalParams p = default_params();
  PhysicalParams turned = p;
  const Mat3 g = so3::exp(Vec3(0.3, -0.2, 0.7)).toRotationMatrix();
  for (int r = 0; r < kNumRotors; ++r) {
    turned.arm_rot_body[r] = g * p.arm_rot_body[r];
    turned.rotor_pos_body[r] = g * p.rotor_pos_body[r];
  }
  const Vec4 alpha(0.2, -0.4, 0.9, 0.1), f(3.0, 5.0, 1.0, 7.0);
  EXPECT_NEAR(rotor_wrench(alpha, f, p).force_b.norm(),
              rotor_wrench(alpha, f, turned).force_b.norm(), 1e-12);
}

TEST(StateDerivative, HoverIsEquilibrium) {
  const PhysicalParams p = default_params();
  const StateDerivative d =
      state_derivative(hover_state(Vec3(0.4, -1.0, 2.0)), hover_input(p), p);
  EXPECT_EQ(d.dp, Vec3::Zero());
  EXPECT_EQ(d.dv, Vec3::Zero());
  EXPECT_EQ(d.dq, Vec4::Zero());
  EXPECT_EQ(d.domega_b, Vec3::Zero());
  EXPECT_EQ(d.dalpha_s, Vec4::Zero());
}

TEST(StateDerivative, FreeFall) {
  const PhysicalParams p = default_params();
  const StateDerivative d = state_derivative(State{}, ControlInput{}, p);
  EXPECT_EQ(d.dv, Vec3(0.0, 0.0, -9.81));
}

TEST(StateDerivative, ServoFirstOrderLag) {
  const PhysicalParams p = default_params();
  ControlInput u;
  u.alpha_c = Vec4(0.1, 0.0, 0.0, 0.0);
  const StateDerivative d = state_derivative(State{}, u, p);
  EXPECT_NEAR(d.dalpha_s[0], 2.0833333333333335, 1e-12);
  EXPECT_EQ(d.dalpha_s.tail<3>(), Vec3::Zero());
}

TEST(StateDerivative, QuaternionRateOrthogonalToQuaternion) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    State x;
    x.q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
    x.omega_b = Vec3(n(rng), n(rng), n(rng));
    const StateDerivative d = state_derivative(x, hover_input(p), p);
    EXPECT_NEAR(so3::to_wxyz(x.q).dot(d.dq), 0.0, 1e-12);
  }
}

TEST(StateDerivative, TorqueFreeAngularMomentumIsConserved) {
  const PhysicalParams p = default_params();
  State x;
  x.omega_b = Vec3(1.5, -0.7, 2.0);
  const auto momentum = [&](const State& s) {
    return Vec3(s.q * p.inertia_diag.cwiseProduct(s.omega_b));
  };
  const Vec3 h0 = momentum(x);
  for (int k = 0; k < 1000; ++k) x = rk4_step(x, ControlInput{}, 1e-3, p);
  EXPECT_LT((momentum(x) - h0).norm(), 1e-6);
}

TEST(HoverInput, SplitsWeightEvenly) {
  const ControlInput u = hover_input(default_params());
  EXPECT_EQ(u.f, Vec4::Constant(4.905));
  EXPECT_EQ(u.alpha_c, Vec4::Zero());
}

TEST(HoverInput, InfeasibleWhenTooHeavy) {
  PhysicalParams p = default_params();
  p.mass_kg = 7.0;
  EXPECT_THROW(hover_input(p), InfeasibleHoverError);
}

TEST(PhysicalParams, RejectsBadValues) {
  PhysicalParams p = default_params();
  EXPECT_NO_THROW(p.validate());
  p.rotor_dir = {1.0, 1.0, 1.0, -1.0};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = default_params();
  p.T_servo = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = default_params();
  p.f_min = 20.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(RotorSpeed, RoundTrip) {
  const PhysicalParams p = default_params();
  const double omega = rotor_speed_from_thrust(4.905, p);
  EXPECT_NEAR(thrust_from_rotor_speed(omega, p), 4.905, 1e-12);
}

}  // namespace
}  // namespace tmpc
