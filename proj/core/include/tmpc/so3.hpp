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

// Small rotation-group helpers. Quaternions are Hamilton, stored scalar-first
// when flattened (w, x, y, z).

#ifndef TMPC_SO3_HPP_
#define TMPC_SO3_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tmpc::so3 {

Eigen::Matrix3d hat(const Eigen::Vector3d& w);

// Rotation vector (axis * angle) of a unit quaternion, angle in [0, pi].
Eigen::Vector3d log(const Eigen::Quaterniond& q);

Eigen::Quaterniond exp(const Eigen::Vector3d& phi);

// Inverse of the right Jacobian of SO(3): Log(R Exp(d)) ~ Log(R) + Jr^-1 d.
Eigen::Matrix3d right_jacobian_inverse(const Eigen::Vector3d& phi);

// Rotation about the local x axis.
Eigen::Matrix3d rot_x(double angle);
Eigen::Matrix3d rot_z(double angle);

inline Eigen::Vector4d to_wxyz(const Eigen::Quaterniond& q) {
  return {q.w(), q.x(), q.y(), q.z()};
}

inline Eigen::Quaterniond from_wxyz(const Eigen::Vector4d& v) {
  return Eigen::Quaterniond(v[0], v[1], v[2], v[3]);
}

}  // namespace tmpc::so3

#endif  // TMPC_SO3_HPP_
