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

#include "tmpc/residual_net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tmpc/errors.hpp"

namespace tmpc {

NetworkInput NetworkInput::from(const State& x, const ControlInput& u) {
  NetworkInput xi;
  xi.z = x.p.z();
  xi.v = x.v;
  xi.q = x.q;
  xi.alpha_s = x.alpha_s;
  xi.f = u.f;
  return xi;
}

NetVector NetworkInput::flatten() const {
  NetVector out;
  out[kZ] = z;
  out.segment<3>(kV) = v;
  out.segment<4>(kQ) << q.w(), q.x(), q.y(), q.z();
  out.segment<4>(kAlpha) = alpha_s;
  out.segment<4>(kF) = f;
  return out;
}

NetworkInput NetworkInput::unflatten(const NetVector& flat) {
  NetworkInput xi;
  xi.z = flat[kZ];
  xi.v = flat.segment<3>(kV);
  xi.q = Eigen::Quaterniond(flat[kQ], flat[kQ + 1], flat[kQ + 2], flat[kQ + 3]);
  xi.alpha_s = flat.segment<4>(kAlpha);
  xi.f = flat.segment<4>(kF);
  return xi;
}

MlpParams MlpParams::zeros() { return MlpParams{}; }

MlpParams MlpParams::xavier(std::uint64_t seed) {
  MlpParams p;
  std::mt19937_64 rng(seed);
  const double a1 = std::sqrt(6.0 / (kNetInputDim + kNetHiddenDim));
  const double a2 = std::sqrt(6.0 / (kNetHiddenDim + kNetOutputDim));
  std::uniform_real_distribution<double> u1(-a1, a1);
  std::uniform_real_distribution<double> u2(-a2, a2);
  for (int i = 0; i < p.W1.rows(); ++i)
    for (int j = 0; j < p.W1.cols(); ++j) p.W1(i, j) = u1(rng);
  for (int i = 0; i < p.W2.rows(); ++i)
    for (int j = 0; j < p.W2.cols(); ++j) p.W2(i, j) = u2(rng);
  return p;
}

bool MlpParams::all_finite() const {
  return input_shift.allFinite() && input_scale.allFinite() &&
         W1.allFinite() && b1.allFinite() && W2.allFinite() &&
         b2.allFinite() && output_scale.allFinite();
}

void MlpParams::validate() const {
  if (!all_finite()) throw InvalidArgument("MlpParams: non-finite entries");
  if ((input_scale.array() <= 0.0).any() || (output_scale.array() <= 0.0).any()) {
    throw InvalidArgument("MlpParams: scales must be > 0");
  }
}

MlpGradients zero_gradients() {
  MlpGradients g;
  g.input_scale.setZero();
  g.output_scale.setZero();
  return g;
}

double gelu(double x) {
  return 0.5 * x * std::erfc(-x / std::numbers::sqrt2);
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double pdf =
      std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

namespace {

struct ForwardCache {
  NetVector x_norm;
  HiddenVector pre;
  HiddenVector hidden;
  Vec3 y;
};

ForwardCache run_forward(const MlpParams& params, const NetVector& x,
                         Activation act) {
  ForwardCache c;
  c.x_norm = (x - params.input_shift).cwiseQuotient(params.input_scale);
  c.pre = params.W1 * c.x_norm + params.b1;
  if (act == Activation::kGelu) {
    c.hidden = c.pre.unaryExpr([](double v) { return gelu(v); });
  } else {
    c.hidden = c.pre;
  }
  c.y = params.W2 * c.hidden + params.b2;
  return c;
}

}  // namespace

Vec3 forward_flat(const MlpParams& params, const NetVector& x, Activation act) {
  return params.output_scale.cwiseProduct(run_forward(params, x, act).y);
}

ResidualAcceleration forward(const MlpParams& params, const NetworkInput& xi,
                             Activation act) {
  return {forward_flat(params, xi.flatten(), act)};
}

BackwardResult backward_flat(const MlpParams& params, const NetVector& x,
                             const Vec3& grad_out, Activation act) {
  const ForwardCache c = run_forward(params, x, act);
  BackwardResult r{zero_gradients(), NetVector::Zero()};

  const Vec3 g_y = params.output_scale.cwiseProduct(grad_out);
  r.grad_params.W2 = g_y * c.hidden.transpose();
  r.grad_params.b2 = g_y;
  HiddenVector g_pre = params.W2.transpose() * g_y;
  if (act == Activation::kGelu) {
    for (int i = 0; i < kNetHiddenDim; ++i) g_pre[i] *= gelu_derivative(c.pre[i]);
  }
  r.grad_params.W1 = g_pre * c.x_norm.transpose();
  r.grad_params.b1 = g_pre;
  r.grad_input =
      (params.W1.transpose() * g_pre).cwiseQuotient(params.input_scale);
  return r;
}

BackwardResult backward(const MlpParams& params, const NetworkInput& xi,
                        const Vec3& grad_out, Activation act) {
  return backward_flat(params, xi.flatten(), grad_out, act);
}

void accumulate(MlpGradients& dst, const MlpGradients& src, double scale) {
  dst.W1 += scale * src.W1;
  dst.b1 += scale * src.b1;
  dst.W2 += scale * src.W2;
  dst.b2 += scale * src.b2;
}

namespace {

template <typename Derived>
void adam_update(Eigen::MatrixBase<Derived>& param,
                 Eigen::MatrixBase<Derived>& m1, Eigen::MatrixBase<Derived>& m2,
                 const Eigen::MatrixBase<Derived>& grad, const AdamWState& opt,
                 double lr, bool decay) {
  if (decay) param *= (1.0 - lr * opt.weight_decay);
  m1 = opt.beta1 * m1 + (1.0 - opt.beta1) * grad;
  m2 = opt.beta2 * m2 + (1.0 - opt.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
  param -= (lr * (m1.array() / c1) /
            ((m2.array() / c2).sqrt() + opt.eps))
               .matrix();
}

}  // namespace

std::pair<AdamWState, MlpParams> adamw_step(AdamWState opt, MlpParams params,
                                            const MlpGradients& grads,
                                            double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("adamw_step: lr must be > 0");
  ++opt.step_count;
  adam_update(params.W1, opt.m1.W1, opt.m2.W1, grads.W1, opt, lr, true);
  adam_update(params.b1, opt.m1.b1, opt.m2.b1, grads.b1, opt, lr, false);
  adam_update(params.W2, opt.m1.W2, opt.m2.W2, grads.W2, opt, lr, true);
  adam_update(params.b2, opt.m1.b2, opt.m2.b2, grads.b2, opt, lr, false);
  return {std::move(opt), std::move(params)};
}

double lr_schedule(int epoch) {
  if (epoch < 0) throw InvalidArgument("lr_schedule: epoch must be >= 0");
  return std::max(1e-3 * std::pow(0.99, epoch), 1e-5);
}

}  // namespace tmpc
