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

// Residual labels from flight logs, the L2 and energy losses, and the
// training loop.

#ifndef TMPC_TRAINING_HPP_
#define TMPC_TRAINING_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tmpc/dynamics.hpp"
#include "tmpc/residual_net.hpp"
#include "tmpc/trajectory_log.hpp"

namespace tmpc {

struct Sample {
  NetworkInput xi;
  Vec3 label_a_prime = Vec3::Zero();  // m/s^2
  double dt = 0.0;
  // Kept for auditing the label.
  Vec3 v_hat_i = Vec3::Zero();
  Vec3 v_hat_next = Vec3::Zero();
  Vec3 v_A_next = Vec3::Zero();
};

struct NormalizationStats {
  NetVector input_shift = NetVector::Zero();
  NetVector input_scale = NetVector::Ones();
  Vec3 output_scale = Vec3::Ones();
};

struct Dataset {
  std::vector<Sample> samples;
  NormalizationStats stats;
  std::vector<std::string> provenance;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

// Per-dimension mean/std of the inputs (quaternion slots left at 0/1) and
// per-axis std of the labels. Stds are floored to stay positive.
NormalizationStats compute_stats(const std::vector<Sample>& samples);

inline constexpr double kMaxGapFraction = 0.2;

// Propagates every measured state through the analytical model with the
// applied input and labels the velocity mismatch:
//   a' = (v_hat_{i+1} - v_A_{i+1}) / (t_{i+1} - t_i)
// Throws EmptyDataError for fewer than two rows and LogGapError when a
// spacing deviates from t_step by more than 20 %.
Dataset make_labels(const TrajectoryLog& log, const PhysicalParams& params,
                    double t_step = 0.1);

// Contiguous time blocks, a seeded subset of which becomes validation.
std::pair<Dataset, Dataset> split_train_validation(const Dataset& data,
                                                   double val_fraction,
                                                   std::uint64_t seed,
                                                   std::size_t block_len = 50);

double l2_loss(const Vec3& a_prime, const Vec3& a_tilde);

enum class EnergyVariant { kSigned, kAbsolute, kHinge };

const char* to_string(EnergyVariant v);
EnergyVariant parse_energy_variant(const std::string& s);

// Kinetic plus potential energy difference between the neural-enhanced and
// the analytical restricted propagation of xi over dt. The signed value is
// transformed by the variant (|E| or max(0, E)).
double energy_loss(const NetworkInput& xi, const Vec3& a_tilde,
                   const PhysicalParams& params, double dt,
                   EnergyVariant variant = EnergyVariant::kSigned);

// d energy_loss / d a_tilde, differentiated through the RK4 stages.
Vec3 energy_loss_grad(const NetworkInput& xi, const Vec3& a_tilde,
                      const PhysicalParams& params, double dt,
                      EnergyVariant variant = EnergyVariant::kSigned);

struct LossBreakdown {
  double l2 = 0.0;
  double energy = 0.0;
  double total = 0.0;
  double lambda_E = 0.0;
};

inline constexpr double kDefaultLambdaE = 1e3;

LossBreakdown total_loss(const Vec3& a_prime, const Vec3& a_tilde,
                         const NetworkInput& xi, const PhysicalParams& params,
                         double dt, double lambda_E,
                         EnergyVariant variant = EnergyVariant::kSigned);

// d total_loss / d a_tilde.
Vec3 total_loss_grad(const Vec3& a_prime, const Vec3& a_tilde,
                     const NetworkInput& xi, const PhysicalParams& params,
                     double dt, double lambda_E,
                     EnergyVariant variant = EnergyVariant::kSigned);

struct TrainConfig {
  double lambda_E = kDefaultLambdaE;
  EnergyVariant energy_variant = EnergyVariant::kSigned;
  int epochs = 130;
  int batch_size = 64;
  double weight_decay = 1e-3;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  LossBreakdown mean;  // over the epoch's training samples, pre-update
  double lr = 0.0;
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochStats> curve;
};

// Mean loss of a fixed network over a dataset.
LossBreakdown evaluate_loss(const MlpParams& params, const Dataset& data,
                            const PhysicalParams& phys, double lambda_E,
                            EnergyVariant variant);

// Gradient of the mean total loss over samples[indices] w.r.t. every
// trainable parameter. Summation order follows indices.
MlpGradients batch_gradient(const MlpParams& params,
                            const std::vector<Sample>& samples,
                            const std::vector<std::size_t>& indices,
                            const PhysicalParams& phys, double lambda_E,
                            EnergyVariant variant,
                            LossBreakdown* batch_loss = nullptr);

// Seeded minibatch AdamW training with lr_schedule(epoch). Normalization
// comes from data.stats when set by make_labels/compute_stats. Deterministic
// given (data, cfg).
TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const PhysicalParams& params);

void write_training_curve_csv(std::ostream& os,
                              const std::vector<EpochStats>& curve);

// Mean |a_tilde| of the network over a dataset.
double mean_prediction_norm(const MlpParams& params, const Dataset& data);

}  // namespace tmpc

#endif  // TMPC_TRAINING_HPP_
