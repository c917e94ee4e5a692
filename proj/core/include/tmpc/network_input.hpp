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

#ifndef TMPC_NETWORK_INPUT_HPP_
#define TMPC_NETWORK_INPUT_HPP_

#include <Eigen/Core>

#include "tmpc/dynamics.hpp"

namespace tmpc {

inline constexpr int kNetInputDim = 16;
using NetVector = Eigen::Matrix<double, kNetInputDim, 1>;

// The slice of state and input fed to the residual network.
// Flattened order: [z, v(3), q(4, wxyz), alpha_s(4), f(4)].
struct NetworkInput {
  double z = 0.0;
  Vec3 v = Vec3::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vec4 alpha_s = Vec4::Zero();
  Vec4 f = Vec4::Zero();

  static NetworkInput from(const State& x, const ControlInput& u);
  static NetworkInput unflatten(const NetVector& flat);
  NetVector flatten() const;

  // Indices into the flattened vector.
  static constexpr int kZ = 0;
  static constexpr int kV = 1;
  static constexpr int kQ = 4;
  static constexpr int kAlpha = 8;
  static constexpr int kF = 12;
};

}  // namespace tmpc

#endif  // TMPC_NETWORK_INPUT_HPP_
