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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "tmpc/errors.hpp"
#include "tmpc/residual_net.hpp"

namespace tmpc {
namespace {

namespace fs = std::filesystem;

MlpParams random_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  MlpParams p = MlpParams::xavier(seed);
  for (int i = 0; i < kNetInputDim; ++i) {
    p.input_shift[i] = n(rng);
    p.input_scale[i] = u(rng);
  }
  for (int i = 0; i < kNetHiddenDim; ++i) p.b1[i] = 0.3 * n(rng);
  for (int i = 0; i < 3; ++i) {
    p.b2[i] = 0.3 * n(rng);
    p.output_scale[i] = u(rng);
  }
  return p;
}

NetVector random_input(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return NetVector::NullaryExpr([&] { return n(rng); });
}

// Scalar loops with the erf form written out independently.
Vec3 naive_forward(const MlpParams& p, const NetVector& x) {
  double xn[kNetInputDim];
  for (int j = 0; j < kNetInputDim; ++j) xn[j] = (x[j] - p.input_shift[j]) / p.input_scale[j];
  double h[kNetHiddenDim];
  for (int i = 0; i < kNetHiddenDim; ++i) {
    double s = p.b1[i];
    for (int j = 0; j < kNetInputDim; ++j) s += p.W1(i, j) * xn[j];
    h[i] = s * 0.5 * (1.0 + std::erf(s / std::sqrt(2.0)));
  }
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    double s = p.b2[k];
    for (int i = 0; i < kNetHiddenDim; ++i) s += p.W2(k, i) * h[i];
    out[k] = p.output_scale[k] * s;
  }
  return out;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1e-6, std::max(std::abs(a), std::abs(b)));
}

TEST(Gelu, Asymptotics) {
  EXPECT_EQ(gelu(0.0), 0.0);
  EXPECT_NEAR(gelu(10.0), 10.0, 1e-12);
  EXPECT_NEAR(gelu(-10.0), 0.0, 1e-8);
  EXPECT_NEAR(gelu_derivative(0.0), 0.5, 1e-15);
}

TEST(Forward, ZeroNetworkOutputsZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(forward_flat(MlpParams::zeros(), random_input(rng)), Vec3::Zero());
  }
}

TEST(Forward, MatchesNaiveLoops) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const MlpParams p = random_params(100 + trial);
    const NetVector x = random_input(rng);
    const Vec3 a = forward_flat(p, x), b = naive_forward(p, x);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(Forward, Deterministic) {
  std::mt19937_64 rng(3);
  const MlpParams p = random_params(7);
  const NetVector x = random_input(rng);
  const Vec3 a = forward_flat(p, x), b = forward_flat(p, x);
  EXPECT_EQ(a, b);
}

TEST(Forward, InputNormalizationFoldsIntoFirstLayer) {
  std::mt19937_64 rng(4);
  const MlpParams p = random_params(8);
  MlpParams folded = p;
  folded.input_shift.setZero();
  folded.input_scale.setOnes();
  folded.W1 = p.W1 * p.input_scale.cwiseInverse().asDiagonal();
  folded.b1 = p.b1 - folded.W1 * p.input_shift;
  for (int i = 0; i < 20; ++i) {
    const NetVector x = random_input(rng);
    EXPECT_LT((forward_flat(p, x) - forward_flat(folded, x)).norm(), 1e-12);
  }
}

TEST(NetworkInput, FlattenOrderAndRoundTrip) {
  NetworkInput xi;
  xi.z = 1.5;
  xi.v = Vec3(1, 2, 3);
  xi.q = Eigen::Quaterniond(0.5, 0.5, 0.5, 0.5);
  xi.alpha_s = Vec4(4, 5, 6, 7);
  xi.f = Vec4(8, 9, 10, 11);
  const NetVector flat = xi.flatten();
  NetVector expected;
  expected << 1.5, 1, 2, 3, 0.5, 0.5, 0.5, 0.5, 4, 5, 6, 7, 8, 9, 10, 11;
  EXPECT_EQ(flat, expected);
  EXPECT_EQ(NetworkInput::unflatten(flat).flatten(), flat);
}

// Central differences of <w, forward> with respect to one scalar parameter.
void check_parameter_block(MlpParams p, const NetVector& x, const Vec3& w,
                           const std::function<double&(MlpParams&, int)>& at,
                           const std::function<double(const MlpGradients&, int)>& grad_at,
                           int count, const MlpGradients& analytic) {
  const double h = 1e-5;
  for (int i = 0; i < count; ++i) {
    const double saved = at(p, i);
    at(p, i) = saved + h;
    const double up = w.dot(forward_flat(p, x));
    at(p, i) = saved - h;
    const double down = w.dot(forward_flat(p, x));
    at(p, i) = saved;
    const double fd = (up - down) / (2 * h);
    EXPECT_LT(rel_err(grad_at(analytic, i), fd), 1e-5) << "index " << i;
  }
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(5);
  const BackwardResult r = backward_flat(random_params(9), random_input(rng), Vec3::Zero());
  EXPECT_EQ(r.grad_params.W1.norm(), 0.0);
  EXPECT_EQ(r.grad_params.b1.norm(), 0.0);
  EXPECT_EQ(r.grad_params.W2.norm(), 0.0);
  EXPECT_EQ(r.grad_params.b2.norm(), 0.0);
  EXPECT_EQ(r.grad_input.norm(), 0.0);
}

TEST(Backward, ParameterGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 5; ++trial) {
    const MlpParams p = random_params(200 + trial);
    const NetVector x = random_input(rng);
    const Vec3 w(n(rng), n(rng), n(rng));
    const MlpGradients g = backward_flat(p, x, w).grad_params;
    check_parameter_block(
        p, x, w, [](MlpParams& q, int i) -> double& { return q.W1.data()[i]; },
        [](const MlpGradients& q, int i) { return q.W1.data()[i]; },
        static_cast<int>(p.W1.size()), g);
    check_parameter_block(
        p, x, w, [](MlpParams& q, int i) -> double& { return q.b1[i]; },
        [](const MlpGradients& q, int i) { return q.b1[i]; }, kNetHiddenDim, g);
    check_parameter_block(
        p, x, w, [](MlpParams& q, int i) -> double& { return q.W2.data()[i]; },
        [](const MlpGradients& q, int i) { return q.W2.data()[i]; },
        static_cast<int>(p.W2.size()), g);
    check_parameter_block(
        p, x, w, [](MlpParams& q, int i) -> double& { return q.b2[i]; },
        [](const MlpGradients& q, int i) { return q.b2[i]; }, 3, g);
  }
}

TEST(Backward, DirectionalDerivativeOfInput) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const MlpParams p = random_params(300 + trial);
    const NetVector x = random_input(rng), d = random_input(rng);
    const Vec3 w(n(rng), n(rng), n(rng));
    const double fd = (w.dot(forward_flat(p, x + h * d)) - w.dot(forward_flat(p, x - h * d))) / (2 * h);
    EXPECT_LT(rel_err(backward_flat(p, x, w).grad_input.dot(d), fd), 1e-5);
  }
}

TEST(Backward, LinearNetworkInputGradient) {
  std::mt19937_64 rng(8);
  const MlpParams p = random_params(10);
  const NetVector x = random_input(rng);
  const Vec3 w(0.3, -1.2, 0.7);
  const NetVector expected = (p.W1.transpose() * p.W2.transpose() *
                              p.output_scale.cwiseProduct(w))
                                 .cwiseQuotient(p.input_scale);
  const NetVector got = backward_flat(p, x, w, Activation::kIdentity).grad_input;
  EXPECT_LT((got - expected).norm(), 1e-12);
}

TEST(AdamW, ZeroGradientNoDecayLeavesParams) {
  const MlpParams p = random_params(11);
  AdamWState opt;
  opt.weight_decay = 0.0;
  const auto [opt2, q] = adamw_step(opt, p, zero_gradients(), 1e-3);
  EXPECT_EQ(q.W1, p.W1);
  EXPECT_EQ(q.b1, p.b1);
  EXPECT_EQ(q.W2, p.W2);
  EXPECT_EQ(q.b2, p.b2);
  EXPECT_EQ(opt2.step_count, 1);
}

TEST(AdamW, FirstStepIsSignLike) {
  const MlpParams p = random_params(12);
  MlpGradients g = zero_gradients();
  g.W1.setConstant(0.25);
  g.b1.setConstant(-3.0);
  g.W2.setConstant(1e-3);
  g.b2.setConstant(7.0);
  AdamWState opt;
  opt.weight_decay = 0.0;
  const double lr = 1e-3, eps = opt.eps;
  const MlpParams q = adamw_step(opt, p, g, lr).second;
  auto step = [&](double gi) { return -lr * gi / (std::abs(gi) + eps); };
  EXPECT_LT(((q.W1 - p.W1).array() - step(0.25)).abs().maxCoeff(), 1e-15);
  for (int i = 0; i < kNetHiddenDim; ++i) EXPECT_NEAR(q.b1[i] - p.b1[i], step(-3.0), 1e-15);
  EXPECT_NEAR(q.W2(0, 0) - p.W2(0, 0), step(1e-3), 1e-15);
  EXPECT_NEAR(q.b2[2] - p.b2[2], step(7.0), 1e-15);
}

TEST(AdamW, DecoupledDecayShrinksWeightsOnly) {
  const MlpParams p = random_params(13);
  AdamWState opt;
  opt.weight_decay = 1e-3;
  const double lr = 1e-2;
  const MlpParams q = adamw_step(opt, p, zero_gradients(), lr).second;
  EXPECT_LT((q.W1 - (1.0 - lr * 1e-3) * p.W1).norm(), 1e-15);
  EXPECT_LT((q.W2 - (1.0 - lr * 1e-3) * p.W2).norm(), 1e-15);
  EXPECT_EQ(q.b1, p.b1);
  EXPECT_EQ(q.b2, p.b2);
  EXPECT_EQ(q.input_scale, p.input_scale);
  EXPECT_EQ(q.output_scale, p.output_scale);
}

TEST(AdamW, RejectsNonPositiveRate) {
  EXPECT_THROW(adamw_step(AdamWState{}, MlpParams{}, zero_gradients(), 0.0), InvalidArgument);
}

TEST(LrSchedule, Values) {
  EXPECT_DOUBLE_EQ(lr_schedule(0), 1e-3);
  EXPECT_DOUBLE_EQ(lr_schedule(1), 9.9e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(1000), 1e-5);
  EXPECT_THROW(lr_schedule(-1), InvalidArgument);
}

struct FitData {
  std::vector<NetVector> x;
  std::vector<Vec3> y;
};

// Full-batch squared-error AdamW with a constant rate.
// Full-batch AdamW. With cosine set, lr decays to zero over the run.
MlpParams fit(MlpParams p, const FitData& d, int steps, double lr, double* mse,
              double eps = 1e-8, bool cosine = false) {
  AdamWState opt;
  opt.weight_decay = 0.0;
  opt.eps = eps;
  const double n = static_cast<double>(d.x.size());
  for (int s = 0; s < steps; ++s) {
    MlpGradients g = zero_gradients();
    for (std::size_t i = 0; i < d.x.size(); ++i) {
      const Vec3 r = forward_flat(p, d.x[i]) - d.y[i];
      accumulate(g, backward_flat(p, d.x[i], 2.0 * r / n).grad_params, 1.0);
    }
    const double rate =
        cosine ? lr * 0.5 * (1.0 + std::cos(std::numbers::pi * s / steps)) + 1e-6 : lr;
    std::tie(opt, p) = adamw_step(opt, p, g, rate);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    sum += (forward_flat(p, d.x[i]) - d.y[i]).squaredNorm();
  }
  *mse = sum / (3.0 * n);
  return p;
}

TEST(Training, OverfitsSixtyFourPairs) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n;
  FitData d;
  for (int i = 0; i < 64; ++i) {
    d.x.push_back(random_input(rng));
    d.y.emplace_back(n(rng), n(rng), n(rng));
  }
  double mse = 0.0;
  fit(MlpParams::xavier(1), d, 5000, 1e-2, &mse, 1e-8, true);
  EXPECT_LT(mse, 1e-6);
}

TEST(Training, OutputScaleRoundTrip) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> n;
  const double c = 4.0;
  FitData raw, scaled;
  for (int i = 0; i < 32; ++i) {
    const NetVector x = random_input(rng);
    const Vec3 y(n(rng), n(rng), n(rng));
    raw.x.push_back(x);
    raw.y.push_back(c * y);
    scaled.x.push_back(x);
    scaled.y.push_back(y);
  }
  MlpParams with_scale = MlpParams::xavier(2);
  with_scale.output_scale.setConstant(c);
  double mse = 0.0;
  // eps = 0 keeps Adam exactly invariant to the power-of-two gradient scale.
  const MlpParams a = fit(with_scale, raw, 200, 1e-3, &mse, 0.0);
  const MlpParams b = fit(MlpParams::xavier(2), scaled, 200, 1e-3, &mse, 0.0);
  for (const NetVector& x : raw.x) {
    EXPECT_LT((forward_flat(a, x) - c * forward_flat(b, x)).norm(), 1e-6);
  }
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = fs::temp_directory_path() /
            ("tmpc_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name() + ".bin");
  }
  void TearDown() override { fs::remove(path_); }

  std::vector<unsigned char> bytes() const {
    std::ifstream f(path_, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  }
  void write(const std::vector<unsigned char>& b) const {
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }

  fs::path path_;
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const MlpParams p = random_params(16);
  save_checkpoint(path_, p);
  const MlpParams q = load_checkpoint(path_);
  EXPECT_EQ(q.input_shift, p.input_shift);
  EXPECT_EQ(q.input_scale, p.input_scale);
  EXPECT_EQ(q.W1, p.W1);
  EXPECT_EQ(q.b1, p.b1);
  EXPECT_EQ(q.W2, p.W2);
  EXPECT_EQ(q.b2, p.b2);
  EXPECT_EQ(q.output_scale, p.output_scale);
}

TEST_F(CheckpointTest, Layout) {
  MlpParams p = MlpParams::zeros();
  p.W1(0, 1) = 1.0;  // second float64 of W1 when row-major
  save_checkpoint(path_, p);
  const std::vector<unsigned char> b = bytes();
  ASSERT_EQ(b.size(), 8u + 8u * (16 + 16 + 32 * 16 + 32 + 3 * 32 + 3 + 3));
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "TMPC");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5] | b[6] | b[7], 0);
  const std::size_t w1 = 8 + 8 * 32 + 8;  // second entry of W1
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  for (int i = 0; i < 8; ++i) EXPECT_EQ(b[w1 + i], one[i]);
}

TEST_F(CheckpointTest, FormatErrors) {
  save_checkpoint(path_, random_params(17));
  const std::vector<unsigned char> good = bytes();

  std::vector<unsigned char> b = good;
  b[0] = 'X';
  write(b);
  EXPECT_THROW(load_checkpoint(path_), FormatError);

  b = good;
  b[4] = 2;
  write(b);
  EXPECT_THROW(load_checkpoint(path_), FormatError);

  b.assign(good.begin(), good.end() - 3);
  write(b);
  EXPECT_THROW(load_checkpoint(path_), FormatError);

  b = good;
  b.push_back(0);
  write(b);
  EXPECT_THROW(load_checkpoint(path_), FormatError);

  MlpParams bad = random_params(18);
  bad.output_scale[1] = -1.0;
  save_checkpoint(path_, bad);
  EXPECT_THROW(load_checkpoint(path_), InvalidArgument);

  EXPECT_THROW(load_checkpoint(path_.string() + ".missing"), Error);
}

}  // namespace
}  // namespace tmpc
