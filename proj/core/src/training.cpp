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

#include "tmpc/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "tmpc/errors.hpp"
#include "tmpc/integrator.hpp"

namespace tmpc {
namespace {

constexpr double kMinInputStd = 1e-3;
constexpr double kMinOutputStd = 0.05;

double transform_energy(double e, EnergyVariant v) {
  switch (v) {
    case EnergyVariant::kSigned:
      return e;
    case EnergyVariant::kAbsolute:
      return std::abs(e);
    case EnergyVariant::kHinge:
      return std::max(0.0, e);
  }
  return e;
}

double transform_slope(double e, EnergyVariant v) {
  switch (v) {
    case EnergyVariant::kSigned:
      return 1.0;
    case EnergyVariant::kAbsolute:
      return e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
    case EnergyVariant::kHinge:
      return e > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

double signed_energy(const HeightVelocity& n, const HeightVelocity& a,
                     const PhysicalParams& params) {
  return 0.5 * params.mass_kg * (n.v.squaredNorm() - a.v.squaredNorm()) +
         params.mass_kg * params.g * (n.h - a.h);
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

}  // namespace

NormalizationStats compute_stats(const std::vector<Sample>& samples) {
  if (samples.empty()) throw EmptyDataError("compute_stats: no samples");
  const double n = static_cast<double>(samples.size());
  NetVector mean = NetVector::Zero();
  Vec3 label_mean = Vec3::Zero();
  for (const Sample& s : samples) {
    mean += s.xi.flatten();
    label_mean += s.label_a_prime;
  }
  mean /= n;
  label_mean /= n;
  NetVector var = NetVector::Zero();
  Vec3 label_var = Vec3::Zero();
  for (const Sample& s : samples) {
    var += (s.xi.flatten() - mean).cwiseAbs2();
    label_var += (s.label_a_prime - label_mean).cwiseAbs2();
  }
  var /= n;
  label_var /= n;

  NormalizationStats st;
  for (int i = 0; i < kNetInputDim; ++i) {
    if (i >= NetworkInput::kQ && i < NetworkInput::kQ + 4) continue;
    st.input_shift[i] = mean[i];
    st.input_scale[i] = std::max(std::sqrt(var[i]), kMinInputStd);
  }
  for (int i = 0; i < 3; ++i) {
    st.output_scale[i] = std::max(std::sqrt(label_var[i]), kMinOutputStd);
  }
  return st;
}

Dataset make_labels(const TrajectoryLog& log, const PhysicalParams& params,
                    double t_step) {
  if (!(t_step > 0.0)) throw InvalidArgument("make_labels: t_step must be > 0");
  if (log.rows.size() < 2) {
    throw EmptyDataError("make_labels: log needs at least two entries");
  }
  params.validate();
  Dataset ds;
  ds.samples.reserve(log.rows.size() - 1);
  for (std::size_t i = 0; i + 1 < log.rows.size(); ++i) {
    const TrajectoryRow& r0 = log.rows[i];
    const TrajectoryRow& r1 = log.rows[i + 1];
    const double dt = r1.t - r0.t;
    if (!(std::abs(dt - t_step) <= kMaxGapFraction * t_step)) {
      throw LogGapError("make_labels: spacing " + std::to_string(dt) +
                        " s at row " + std::to_string(i) + " in " +
                        (log.source.empty() ? "<log>" : log.source));
    }
    const State xa = rk4_step(r0.x, r0.u, dt, params);
    Sample s;
    s.xi = NetworkInput::from(r0.x, r0.u);
    s.dt = dt;
    s.v_hat_i = r0.x.v;
    s.v_hat_next = r1.x.v;
    s.v_A_next = xa.v;
    s.label_a_prime = (r1.x.v - xa.v) / dt;
    if (!s.label_a_prime.allFinite()) {
      throw NonFiniteError("make_labels: non-finite label");
    }
    ds.samples.push_back(s);
  }
  ds.stats = compute_stats(ds.samples);
  if (!log.source.empty()) ds.provenance.push_back(log.source);
  return ds;
}

std::pair<Dataset, Dataset> split_train_validation(const Dataset& data,
                                                   double val_fraction,
                                                   std::uint64_t seed,
                                                   std::size_t block_len) {
  if (data.empty()) throw EmptyDataError("split_train_validation: no samples");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidArgument("split_train_validation: val_fraction in [0, 1)");
  }
  if (block_len == 0) throw InvalidArgument("split_train_validation: block_len");
  const std::size_t n_blocks = (data.size() + block_len - 1) / block_len;
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(val_fraction * static_cast<double>(n_blocks)));
  if (val_fraction > 0.0 && n_blocks > 1) n_val = std::max<std::size_t>(n_val, 1);
  n_val = std::min(n_val, n_blocks - 1);

  std::vector<std::size_t> order(n_blocks);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n_blocks; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::vector<bool> is_val(n_blocks, false);
  for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;

  Dataset train, val;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (is_val[i / block_len] ? val : train).samples.push_back(data.samples[i]);
  }
  train.stats = data.stats;
  val.stats = data.stats;
  train.provenance = data.provenance;
  val.provenance = data.provenance;
  return {std::move(train), std::move(val)};
}

double l2_loss(const Vec3& a_prime, const Vec3& a_tilde) {
  return (a_prime - a_tilde).squaredNorm();
}

const char* to_string(EnergyVariant v) {
  switch (v) {
    case EnergyVariant::kSigned:
      return "signed";
    case EnergyVariant::kAbsolute:
      return "abs";
    case EnergyVariant::kHinge:
      return "hinge";
  }
  return "signed";
}

EnergyVariant parse_energy_variant(const std::string& s) {
  if (s == "signed") return EnergyVariant::kSigned;
  if (s == "abs") return EnergyVariant::kAbsolute;
  if (s == "hinge") return EnergyVariant::kHinge;
  throw InvalidArgument("unknown energy variant: " + s);
}

double energy_loss(const NetworkInput& xi, const Vec3& a_tilde,
                   const PhysicalParams& params, double dt,
                   EnergyVariant variant) {
  const HeightVelocity n = rk4_step_hv(xi, a_tilde, dt, params);
  const HeightVelocity a = rk4_step_hv(xi, Vec3::Zero(), dt, params);
  return transform_energy(signed_energy(n, a, params), variant);
}

Vec3 energy_loss_grad(const NetworkInput& xi, const Vec3& a_tilde,
                      const PhysicalParams& params, double dt,
                      EnergyVariant variant) {
  const HeightVelocitySensitivity s =
      rk4_step_hv_sensitivity(xi, a_tilde, dt, params);
  const HeightVelocity a = rk4_step_hv(xi, Vec3::Zero(), dt, params);
  const double e = signed_energy(s.value, a, params);
  const Vec3 grad = params.mass_kg * s.dv_dresidual.transpose() * s.value.v +
                    params.mass_kg * params.g * s.dh_dresidual;
  return transform_slope(e, variant) * grad;
}

LossBreakdown total_loss(const Vec3& a_prime, const Vec3& a_tilde,
                         const NetworkInput& xi, const PhysicalParams& params,
                         double dt, double lambda_E, EnergyVariant variant) {
  if (!(lambda_E >= 0.0)) throw InvalidArgument("total_loss: lambda_E < 0");
  LossBreakdown b;
  b.lambda_E = lambda_E;
  b.l2 = l2_loss(a_prime, a_tilde);
  b.energy = lambda_E == 0.0 ? 0.0
                             : energy_loss(xi, a_tilde, params, dt, variant);
  b.total = b.l2 + lambda_E * b.energy;
  return b;
}

Vec3 total_loss_grad(const Vec3& a_prime, const Vec3& a_tilde,
                     const NetworkInput& xi, const PhysicalParams& params,
                     double dt, double lambda_E, EnergyVariant variant) {
  Vec3 g = 2.0 * (a_tilde - a_prime);
  if (lambda_E != 0.0) {
    g += lambda_E * energy_loss_grad(xi, a_tilde, params, dt, variant);
  }
  return g;
}

void TrainConfig::validate() const {
  if (!(lambda_E >= 0.0)) throw InvalidArgument("TrainConfig: lambda_E < 0");
  if (epochs < 1) throw InvalidArgument("TrainConfig: epochs < 1");
  if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size < 1");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("TrainConfig: weight_decay");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidArgument("TrainConfig: val_fraction in [0, 1)");
  }
}

LossBreakdown evaluate_loss(const MlpParams& params, const Dataset& data,
                            const PhysicalParams& phys, double lambda_E,
                            EnergyVariant variant) {
  if (data.empty()) throw EmptyDataError("evaluate_loss: no samples");
  LossBreakdown sum;
  sum.lambda_E = lambda_E;
  for (const Sample& s : data.samples) {
    const Vec3 a = forward(params, s.xi).a_tilde;
    const LossBreakdown b =
        total_loss(s.label_a_prime, a, s.xi, phys, s.dt, lambda_E, variant);
    sum.l2 += b.l2;
    sum.energy += b.energy;
  }
  const double n = static_cast<double>(data.size());
  sum.l2 /= n;
  sum.energy /= n;
  sum.total = sum.l2 + lambda_E * sum.energy;
  return sum;
}

MlpGradients batch_gradient(const MlpParams& params,
                            const std::vector<Sample>& samples,
                            const std::vector<std::size_t>& indices,
                            const PhysicalParams& phys, double lambda_E,
                            EnergyVariant variant, LossBreakdown* batch_loss) {
  if (indices.empty()) throw EmptyDataError("batch_gradient: empty batch");
  MlpGradients grad = zero_gradients();
  LossBreakdown sum;
  sum.lambda_E = lambda_E;
  const double scale = 1.0 / static_cast<double>(indices.size());
  for (std::size_t idx : indices) {
    const Sample& s = samples.at(idx);
    const Vec3 a = forward(params, s.xi).a_tilde;
    const LossBreakdown b =
        total_loss(s.label_a_prime, a, s.xi, phys, s.dt, lambda_E, variant);
    sum.l2 += b.l2;
    sum.energy += b.energy;
    const Vec3 g =
        total_loss_grad(s.label_a_prime, a, s.xi, phys, s.dt, lambda_E, variant);
    accumulate(grad, backward(params, s.xi, g).grad_params, scale);
  }
  if (batch_loss != nullptr) {
    sum.l2 *= scale;
    sum.energy *= scale;
    sum.total = sum.l2 + lambda_E * sum.energy;
    *batch_loss = sum;
  }
  return grad;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const PhysicalParams& params) {
  if (data.empty()) throw EmptyDataError("train: dataset is empty");
  cfg.validate();
  params.validate();

  MlpParams net = MlpParams::xavier(cfg.seed);
  net.input_shift = data.stats.input_shift;
  net.input_scale = data.stats.input_scale;
  net.output_scale = data.stats.output_scale;

  AdamWState opt;
  opt.weight_decay = cfg.weight_decay;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.curve.reserve(static_cast<std::size_t>(cfg.epochs));
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    const double lr = lr_schedule(epoch);
    opt.epoch = epoch;
    double l2_sum = 0.0;
    double e_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::vector<std::size_t> batch(order.begin() + start,
                                           order.begin() + end);
      LossBreakdown bl;
      const MlpGradients g = batch_gradient(net, data.samples, batch, params,
                                            cfg.lambda_E, cfg.energy_variant,
                                            &bl);
      const double w = static_cast<double>(batch.size());
      l2_sum += bl.l2 * w;
      e_sum += bl.energy * w;
      auto [next_opt, next_net] = adamw_step(std::move(opt), std::move(net), g, lr);
      opt = std::move(next_opt);
      net = std::move(next_net);
      if (!net.all_finite()) {
        throw NonFiniteError("train: parameters diverged at epoch " +
                             std::to_string(epoch));
      }
    }
    EpochStats es;
    es.epoch = epoch;
    es.lr = lr;
    const double n = static_cast<double>(data.size());
    es.mean.lambda_E = cfg.lambda_E;
    es.mean.l2 = l2_sum / n;
    es.mean.energy = e_sum / n;
    es.mean.total = es.mean.l2 + cfg.lambda_E * es.mean.energy;
    result.curve.push_back(es);
  }
  result.params = net;
  return result;
}

void write_training_curve_csv(std::ostream& os,
                              const std::vector<EpochStats>& curve) {
  os << "epoch,mean_l2,mean_energy,mean_total,lr\n";
  for (const EpochStats& e : curve) {
    os << e.epoch << ',' << format_double(e.mean.l2) << ','
       << format_double(e.mean.energy) << ',' << format_double(e.mean.total)
       << ',' << format_double(e.lr) << '\n';
  }
}

double mean_prediction_norm(const MlpParams& params, const Dataset& data) {
  if (data.empty()) throw EmptyDataError("mean_prediction_norm: no samples");
  double sum = 0.0;
  for (const Sample& s : data.samples) sum += forward(params, s.xi).a_tilde.norm();
  return sum / static_cast<double>(data.size());
}

}  // namespace tmpc
