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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tmpc/dynamics.hpp"
#include "tmpc/errors.hpp"
#include "tmpc/experiments.hpp"
#include "tmpc/integrator.hpp"
#include "tmpc/plant.hpp"
#include "tmpc/training.hpp"

namespace tmpc {
namespace {

NetworkInput hover_xi(const PhysicalParams& p) {
  return NetworkInput::from(hover_state(Vec3(0, 0, 1)), hover_input(p));
}

NetworkInput random_xi(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NetworkInput xi;
  xi.z = 0.1 + 2.0 * u(rng);
  xi.v = Vec3(n(rng), n(rng), n(rng));
  xi.q = Eigen::Quaterniond(1.0 + u(rng), 0.3 * n(rng), 0.3 * n(rng), 0.3 * n(rng))
             .normalized();
  xi.alpha_s = Vec4::NullaryExpr([&] { return 0.5 * n(rng); });
  xi.f = Vec4::NullaryExpr([&] { return 2.0 + 6.0 * u(rng); });
  return xi;
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n;
  return scale * Vec3(n(rng), n(rng), n(rng));
}

TEST(L2Loss, Basics) {
  EXPECT_EQ(l2_loss(Vec3(1, 2, 3), Vec3(1, 2, 3)), 0.0);
  EXPECT_EQ(l2_loss(Vec3(1, 0, 0), Vec3::Zero()), 1.0);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 a = random_vec(rng, 1.0), b = random_vec(rng, 1.0);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    EXPECT_NEAR(l2_loss(a, b), sum, 1e-15);
  }
}

TEST(EnergyLoss, HoverClosedFormValues) {
  const PhysicalParams p = default_params();
  const NetworkInput xi = hover_xi(p);
  EXPECT_NEAR(energy_loss(xi, Vec3(0, 0, 1), p, 0.1), 0.1081, 1e-12);
  EXPECT_NEAR(energy_loss(xi, Vec3(0, 0, -1), p, 0.1), -0.0881, 1e-12);
}

TEST(EnergyLoss, ZeroResidualIsExactlyZero) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    EXPECT_EQ(energy_loss(random_xi(rng), Vec3::Zero(), p, 0.1), 0.0);
  }
}

TEST(EnergyLoss, MatchesConstantResidualClosedForm) {
  const PhysicalParams p = default_params();
  const double dt = 0.1, m = p.mass_kg;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const NetworkInput xi = random_xi(rng);
    const Vec3 a = random_vec(rng, 0.5);
    const Vec3 vA = rk4_step_hv(xi, Vec3::Zero(), dt, p).v;
    const double closed = 0.5 * m * ((vA + a * dt).squaredNorm() - vA.squaredNorm()) +
                          m * p.g * 0.5 * a.z() * dt * dt;
    EXPECT_NEAR(energy_loss(xi, a, p, dt), closed, 1e-12);
  }
}

TEST(EnergyLoss, Variants) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkInput xi = random_xi(rng);
    const Vec3 a = random_vec(rng, 0.5);
    const double e = energy_loss(xi, a, p, 0.1, EnergyVariant::kSigned);
    EXPECT_EQ(energy_loss(xi, a, p, 0.1, EnergyVariant::kAbsolute), std::abs(e));
    EXPECT_EQ(energy_loss(xi, a, p, 0.1, EnergyVariant::kHinge), std::max(0.0, e));
  }
  EXPECT_EQ(parse_energy_variant("hinge"), EnergyVariant::kHinge);
  EXPECT_EQ(parse_energy_variant(to_string(EnergyVariant::kAbsolute)), EnergyVariant::kAbsolute);
  EXPECT_THROW(parse_energy_variant("clamped"), InvalidArgument);
}

TEST(EnergyLossGrad, HoverEquilibrium) {
  const PhysicalParams p = default_params();
  const Vec3 g = energy_loss_grad(hover_xi(p), Vec3::Zero(), p, 0.1);
  EXPECT_LT((g - Vec3(0, 0, 0.0981)).norm(), 1e-12);
}

TEST(EnergyLossGrad, MatchesFiniteDifferences) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  for (const EnergyVariant variant : {EnergyVariant::kSigned, EnergyVariant::kHinge}) {
    for (int trial = 0; trial < 100; ++trial) {
      const NetworkInput xi = random_xi(rng);
      const Vec3 a = random_vec(rng, 0.5);
      if (variant == EnergyVariant::kHinge && std::abs(energy_loss(xi, a, p, 0.1)) < 1e-3) continue;
      const Vec3 g = energy_loss_grad(xi, a, p, 0.1, variant);
      for (int i = 0; i < 3; ++i) {
        const Vec3 d = h * Vec3::Unit(i);
        const double fd = (energy_loss(xi, a + d, p, 0.1, variant) -
                           energy_loss(xi, a - d, p, 0.1, variant)) /
                          (2 * h);
        EXPECT_NEAR(g[i], fd, 1e-7);
      }
    }
  }
}

TEST(EnergyLossGrad, ClosedForm) {
  const PhysicalParams p = default_params();
  const double dt = 0.1, m = p.mass_kg;
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkInput xi = random_xi(rng);
    const Vec3 a = random_vec(rng, 0.5);
    const Vec3 vN = rk4_step_hv(xi, a, dt, p).v;
    const Vec3 closed = m * vN * dt + Vec3(0, 0, m * p.g * 0.5 * dt * dt);
    EXPECT_LT((energy_loss_grad(xi, a, p, dt) - closed).norm(), 1e-12);
  }
}

TEST(TotalLoss, Composition) {
  const PhysicalParams p = default_params();
  const NetworkInput xi = hover_xi(p);
  const LossBreakdown b = total_loss(Vec3::Zero(), Vec3(0, 0, 1), xi, p, 0.1, 1e3);
  EXPECT_EQ(b.l2, 1.0);
  EXPECT_NEAR(b.energy, 0.1081, 1e-12);
  EXPECT_NEAR(b.total, 109.1, 1e-9);
  EXPECT_EQ(b.lambda_E, 1e3);

  EXPECT_EQ(total_loss(Vec3::Zero(), Vec3::Zero(), xi, p, 0.1, 1e3).total, 0.0);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkInput x = random_xi(rng);
    const Vec3 a_prime = random_vec(rng, 1.0), a = random_vec(rng, 0.5);
    const LossBreakdown base = total_loss(a_prime, a, x, p, 0.1, 0.0);
    EXPECT_EQ(base.total, base.l2);
    for (const EnergyVariant v :
         {EnergyVariant::kSigned, EnergyVariant::kAbsolute, EnergyVariant::kHinge}) {
      const LossBreakdown lb = total_loss(a_prime, a, x, p, 0.1, 1e3, v);
      EXPECT_EQ(lb.total, lb.l2 + lb.lambda_E * lb.energy);
    }
  }
}

TEST(TotalLossGrad, EnergyPartIgnoresLabel) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(8);
  const NetworkInput xi = random_xi(rng);
  const Vec3 a = random_vec(rng, 0.5);
  const Vec3 a1 = random_vec(rng, 1.0), a2 = random_vec(rng, 1.0);
  const Vec3 d1 = total_loss_grad(a1, a, xi, p, 0.1, 1e3) - total_loss_grad(a1, a, xi, p, 0.1, 0.0);
  const Vec3 d2 = total_loss_grad(a2, a, xi, p, 0.1, 1e3) - total_loss_grad(a2, a, xi, p, 0.1, 0.0);
  EXPECT_LT((d1 - d2).norm(), 1e-9);
}

std::vector<Sample> random_samples(std::mt19937_64& rng, int n) {
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.xi = random_xi(rng);
    s.label_a_prime = random_vec(rng, 0.5);
    s.dt = 0.1;
    out.push_back(s);
  }
  return out;
}

// Every trainable scalar of the network, in a fixed order.
std::vector<double*> trainable(MlpParams& p) {
  std::vector<double*> out;
  auto add = [&](double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(d + i);
  };
  add(p.W1.data(), p.W1.size());
  add(p.b1.data(), p.b1.size());
  add(p.W2.data(), p.W2.size());
  add(p.b2.data(), p.b2.size());
  return out;
}

TEST(BatchGradient, MatchesFiniteDifferencesForEveryParameter) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(9);
  Dataset data;
  data.samples = random_samples(rng, 6);
  data.stats = compute_stats(data.samples);
  MlpParams net = MlpParams::xavier(3);
  net.input_shift = data.stats.input_shift;
  net.input_scale = data.stats.input_scale;
  net.output_scale = data.stats.output_scale;
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  for (const double lambda : {0.0, 1e3}) {
    for (const EnergyVariant v : {EnergyVariant::kSigned, EnergyVariant::kHinge}) {
      MlpGradients g = batch_gradient(net, data.samples, idx, p, lambda, v);
      MlpParams probe = net;
      const std::vector<double*> w = trainable(probe);
      const std::vector<double*> gw = trainable(g);
      double max_g = 0.0, max_err = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double saved = *w[k], h = 1e-6;
        *w[k] = saved + h;
        const double up = evaluate_loss(probe, data, p, lambda, v).total;
        *w[k] = saved - h;
        const double down = evaluate_loss(probe, data, p, lambda, v).total;
        *w[k] = saved;
        max_g = std::max(max_g, std::abs(*gw[k]));
        max_err = std::max(max_err, std::abs((up - down) / (2 * h) - *gw[k]));
      }
      EXPECT_LT(max_err / max_g, 1e-5) << "lambda " << lambda << " " << to_string(v);
    }
  }
}

TEST(BatchGradient, ReportsBatchLoss) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(10);
  Dataset data;
  data.samples = random_samples(rng, 8);
  const MlpParams net = MlpParams::xavier(4);
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  LossBreakdown lb;
  batch_gradient(net, data.samples, idx, p, 1e3, EnergyVariant::kSigned, &lb);
  const LossBreakdown ref = evaluate_loss(net, data, p, 1e3, EnergyVariant::kSigned);
  EXPECT_NEAR(lb.l2, ref.l2, 1e-12);
  EXPECT_NEAR(lb.energy, ref.energy, 1e-12);
}

TrajectoryRow row(double t, const State& x, const ControlInput& u) {
  TrajectoryRow r;
  r.t = t;
  r.x = x;
  r.u = u;
  return r;
}

TEST(MakeLabels, SyntheticVelocityOffset) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  TrajectoryLog log;
  State x = hover_state(Vec3(0, 0, 2));
  x.omega_b = Vec3(0.2, -0.1, 0.05);
  for (int i = 0; i < 30; ++i) {
    ControlInput u = hover_input(p);
    u.f += 0.3 * Vec4(n(rng), n(rng), n(rng), n(rng));
    u.alpha_c = 0.1 * Vec4(n(rng), n(rng), n(rng), n(rng));
    log.rows.push_back(row(0.1 * i, x, u));
    x = rk4_step(x, u, 0.1, p);
    x.v += Vec3(0.1, 0, 0) * 0.1;
  }
  const Dataset d = make_labels(log, p);
  ASSERT_EQ(d.size(), 29u);
  for (const Sample& s : d.samples) {
    EXPECT_LT((s.label_a_prime - Vec3(0.1, 0, 0)).norm(), 1e-12);
    EXPECT_NEAR(s.dt, 0.1, 1e-15);
    EXPECT_LT((s.v_hat_next - s.v_A_next - 0.01 * Vec3::UnitX()).norm(), 1e-13);
  }
}

TEST(MakeLabels, ThrustGainHoverLog) {
  const PhysicalParams p = default_params();
  DisturbanceConfig d = DisturbanceConfig::none();
  d.thrust_gain_error = 0.95;
  PlantState ps = make_plant_state(hover_state(Vec3(0, 0, 5)), d);
  TrajectoryLog log;
  for (int i = 0; i <= 20; ++i) {
    log.rows.push_back(row(ps.time, ps.true_state, hover_input(p)));
    ps = plant_step(ps, hover_input(p), 0.1, d, p);
  }
  for (const Sample& s : make_labels(log, p).samples) {
    EXPECT_NEAR(s.label_a_prime.z(), -0.4905, 1e-9);
    EXPECT_LT(s.label_a_prime.head<2>().norm(), 1e-12);
  }
}

TEST(MakeLabels, DisturbanceFreeClosedLoopHover) {
  const PhysicalParams p = default_params();
  const DisturbanceConfig none = DisturbanceConfig::none();
  const RunResult r = run_scenario(hover_scenario(p, Vec3(0.2, -0.1, 1.0), 3.0),
                                   DynamicsModel::analytical(p), p, none, OcpConfig{});
  ASSERT_FALSE(r.crashed);
  const Dataset d = make_labels(r.log, p);
  ASSERT_GE(d.size(), 25u);
  double worst = 0.0;
  for (const Sample& s : d.samples) worst = std::max(worst, s.label_a_prime.cwiseAbs().maxCoeff());
  EXPECT_LT(worst, 1e-6);
}

TEST(MakeLabels, Errors) {
  const PhysicalParams p = default_params();
  TrajectoryLog log;
  EXPECT_THROW(make_labels(log, p), EmptyDataError);
  log.rows.push_back(row(0.0, hover_state(Vec3(0, 0, 1)), hover_input(p)));
  EXPECT_THROW(make_labels(log, p), EmptyDataError);
  log.rows.push_back(row(0.1, hover_state(Vec3(0, 0, 1)), hover_input(p)));
  log.rows.push_back(row(0.2, hover_state(Vec3(0, 0, 1)), hover_input(p)));
  EXPECT_NO_THROW(make_labels(log, p));
  log.rows.push_back(row(0.33, hover_state(Vec3(0, 0, 1)), hover_input(p)));
  EXPECT_THROW(make_labels(log, p), LogGapError);
  log.rows.back().t = 0.319;
  EXPECT_NO_THROW(make_labels(log, p));
}

TEST(Split, ContiguousDisjointAndSeeded) {
  std::mt19937_64 rng(12);
  Dataset data;
  data.samples = random_samples(rng, 1000);
  for (std::size_t i = 0; i < data.size(); ++i) data.samples[i].dt = static_cast<double>(i);
  const auto [train, val] = split_train_validation(data, 0.1, 5);
  EXPECT_EQ(train.size() + val.size(), data.size());
  EXPECT_EQ(val.size(), 100u);
  std::set<double> seen;
  for (const Sample& s : train.samples) seen.insert(s.dt);
  for (const Sample& s : val.samples) EXPECT_TRUE(seen.insert(s.dt).second);
  for (std::size_t i = 0; i < val.size(); i += 50) {
    for (std::size_t j = 1; j < 50; ++j) {
      EXPECT_EQ(val.samples[i + j].dt, val.samples[i].dt + static_cast<double>(j));
    }
  }
  const auto again = split_train_validation(data, 0.1, 5);
  ASSERT_EQ(again.second.size(), val.size());
  for (std::size_t i = 0; i < val.size(); ++i) EXPECT_EQ(again.second.samples[i].dt, val.samples[i].dt);
  const auto other = split_train_validation(data, 0.1, 6);
  bool differs = false;
  for (std::size_t i = 0; i < val.size(); ++i) differs |= other.second.samples[i].dt != val.samples[i].dt;
  EXPECT_TRUE(differs);
}

Dataset constant_label_dataset(const Vec3& c, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset data;
  data.samples = random_samples(rng, n);
  for (Sample& s : data.samples) s.label_a_prime = c;
  data.stats = compute_stats(data.samples);
  return data;
}

TEST(Train, FitsConstantLabel) {
  const PhysicalParams p = default_params();
  const Vec3 c(0.04, -0.03, 0.05);
  const Dataset data = constant_label_dataset(c, 6400, 13);
  TrainConfig cfg;
  cfg.lambda_E = 0.0;
  const TrainResult r = train(data, cfg, p);
  ASSERT_EQ(r.curve.size(), 130u);
  double mse = 0.0;
  for (const Sample& s : data.samples) mse += (forward(r.params, s.xi).a_tilde - c).squaredNorm();
  mse /= 3.0 * static_cast<double>(data.size());
  EXPECT_LT(mse, 1e-4 * c.squaredNorm() / 3.0);
}

bool same_params(const MlpParams& a, const MlpParams& b) {
  return std::memcmp(a.W1.data(), b.W1.data(), sizeof(double) * a.W1.size()) == 0 &&
         std::memcmp(a.b1.data(), b.b1.data(), sizeof(double) * a.b1.size()) == 0 &&
         std::memcmp(a.W2.data(), b.W2.data(), sizeof(double) * a.W2.size()) == 0 &&
         std::memcmp(a.b2.data(), b.b2.data(), sizeof(double) * a.b2.size()) == 0;
}

TEST(Train, DeterministicUnderSeed) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(14);
  Dataset data;
  data.samples = random_samples(rng, 300);
  data.stats = compute_stats(data.samples);
  TrainConfig cfg;
  cfg.epochs = 5;
  const TrainResult a = train(data, cfg, p), b = train(data, cfg, p);
  EXPECT_TRUE(same_params(a.params, b.params));
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_EQ(a.curve[i].mean.total, b.curve[i].mean.total);
  cfg.seed = 2;
  EXPECT_FALSE(same_params(train(data, cfg, p).params, a.params));
  EXPECT_THROW(train(Dataset{}, cfg, p), EmptyDataError);
}

// Hover-like inputs with labels that push upwards, so a' injects energy.
Dataset energetic_dataset(std::uint64_t seed) {
  const PhysicalParams p = default_params();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Dataset data;
  for (int i = 0; i < 640; ++i) {
    Sample s;
    State x = hover_state(Vec3(0, 0, 0.5 + 0.2 * std::abs(n(rng))));
    x.v = 0.2 * Vec3(n(rng), n(rng), n(rng));
    ControlInput u = hover_input(p);
    u.f += 0.2 * Vec4(n(rng), n(rng), n(rng), n(rng));
    s.xi = NetworkInput::from(x, u);
    s.label_a_prime = Vec3(0, 0, 0.5) + 0.05 * Vec3(n(rng), n(rng), n(rng));
    s.dt = 0.1;
    data.samples.push_back(s);
  }
  data.stats = compute_stats(data.samples);
  return data;
}

TEST(Train, HingeEnergyWeightShrinksEnergeticOutputs) {
  const PhysicalParams p = default_params();
  const Dataset data = energetic_dataset(15);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.energy_variant = EnergyVariant::kHinge;
  cfg.lambda_E = 0.0;
  const double norm_l2 = mean_prediction_norm(train(data, cfg, p).params, data);
  cfg.lambda_E = 1e3;
  const double norm_e = mean_prediction_norm(train(data, cfg, p).params, data);
  EXPECT_LE(norm_e, norm_l2);
}

// The signed loss is unbounded below in a_z, so the weighted run overshoots
// into large downward residuals.
TEST(Train, SignedEnergyWeightRewardsDownwardResiduals) {
  const PhysicalParams p = default_params();
  const Dataset data = energetic_dataset(15);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.energy_variant = EnergyVariant::kSigned;
  const MlpParams net = train(data, cfg, p).params;
  double mean_z = 0.0;
  for (const Sample& s : data.samples) mean_z += forward(net, s.xi).a_tilde.z();
  mean_z /= static_cast<double>(data.size());
  EXPECT_LT(mean_z, 0.0);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lambda_E = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(TrainingCurve, CsvLayout) {
  std::vector<EpochStats> curve(3);
  for (int i = 0; i < 3; ++i) {
    curve[i].epoch = i;
    curve[i].mean.l2 = 1.0 / (i + 1);
    curve[i].lr = lr_schedule(i);
  }
  std::ostringstream os;
  write_training_curve_csv(os, curve);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "epoch,mean_l2,mean_energy,mean_total,lr");
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_NE(os.str().find("0.33333333333333331"), std::string::npos);
}

}  // namespace
}  // namespace tmpc
