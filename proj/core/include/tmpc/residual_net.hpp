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

// Residual-dynamics MLP: 16 -> 32 (GELU) -> 3, float64 throughout.

#ifndef TMPC_RESIDUAL_NET_HPP_
#define TMPC_RESIDUAL_NET_HPP_

#include <cstdint>
#include <filesystem>
#include <utility>

#include <Eigen/Core>

#include "tmpc/network_input.hpp"

namespace tmpc {

inline constexpr int kNetHiddenDim = 32;
inline constexpr int kNetOutputDim = 3;

using HiddenVector = Eigen::Matrix<double, kNetHiddenDim, 1>;

struct MlpParams {
  NetVector input_shift = NetVector::Zero();
  NetVector input_scale = NetVector::Ones();
  Eigen::Matrix<double, kNetHiddenDim, kNetInputDim> W1 =
      Eigen::Matrix<double, kNetHiddenDim, kNetInputDim>::Zero();
  HiddenVector b1 = HiddenVector::Zero();
  Eigen::Matrix<double, kNetOutputDim, kNetHiddenDim> W2 =
      Eigen::Matrix<double, kNetOutputDim, kNetHiddenDim>::Zero();
  Vec3 b2 = Vec3::Zero();
  Vec3 output_scale = Vec3::Ones();

  // All weights and biases zero, identity normalization.
  static MlpParams zeros();
  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static MlpParams xavier(std::uint64_t seed);

  bool all_finite() const;
  void validate() const;
};

// Gradients share the parameter layout. Normalization constants are not
// trained and their gradient entries stay zero.
using MlpGradients = MlpParams;

MlpGradients zero_gradients();

struct ResidualAcceleration {
  Vec3 a_tilde = Vec3::Zero();  // world frame, m/s^2
};

enum class Activation { kGelu, kIdentity };

// Exact GELU, x * Phi(x).
double gelu(double x);
double gelu_derivative(double x);

ResidualAcceleration forward(const MlpParams& params, const NetworkInput& xi,
                             Activation act = Activation::kGelu);
Vec3 forward_flat(const MlpParams& params, const NetVector& x,
                  Activation act = Activation::kGelu);

struct BackwardResult {
  MlpGradients grad_params;
  NetVector grad_input;
};

// Reverse-mode gradients of <grad_out, forward(params, xi)>.
BackwardResult backward(const MlpParams& params, const NetworkInput& xi,
                        const Vec3& grad_out,
                        Activation act = Activation::kGelu);
BackwardResult backward_flat(const MlpParams& params, const NetVector& x,
                             const Vec3& grad_out,
                             Activation act = Activation::kGelu);

// Adds scale * src into dst for the trainable tensors.
void accumulate(MlpGradients& dst, const MlpGradients& src, double scale);

struct AdamWState {
  MlpGradients m1 = zero_gradients();
  MlpGradients m2 = zero_gradients();
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
  int epoch = 0;
};

// Decoupled weight decay (weights only) followed by the bias-corrected Adam
// update.
std::pair<AdamWState, MlpParams> adamw_step(AdamWState opt, MlpParams params,
                                            const MlpGradients& grads,
                                            double lr);

// max(1e-3 * 0.99^epoch, 1e-5)
double lr_schedule(int epoch);

// Checkpoint layout: "TMPC", u32 version, then little-endian float64 arrays
// input_shift, input_scale, W1, b1, W2, b2, output_scale (matrices row-major).
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace tmpc

#endif  // TMPC_RESIDUAL_NET_HPP_
