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

#include "tmpc/nmpc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tmpc/box_qp.hpp"
#include "tmpc/errors.hpp"
#include "tmpc/integrator.hpp"
#include "tmpc/so3.hpp"

namespace tmpc {

ErrVector OcpConfig::default_Q() {
  ErrVector q;
  q << 300.0, 300.0, 300.0,  // position
       10.0, 10.0, 10.0,     // velocity
       100.0, 100.0, 100.0,  // attitude
       1.0, 1.0, 1.0,        // angular rate
       1.0, 1.0, 1.0, 1.0,   // servo angles
       0.0;                  // spare
  return q;
}

void OcpConfig::validate() const {
  if (horizon_N < 2) throw InvalidArgument("OcpConfig: horizon_N must be >= 2");
  if (!(t_step > 0.0) || !(t_samp > 0.0)) {
    throw InvalidArgument("OcpConfig: t_step and t_samp must be > 0");
  }
  if (t_samp > t_step) throw InvalidArgument("OcpConfig: t_samp must be <= t_step");
  if ((Q.array() < 0.0).any() || (R.array() < 0.0).any() ||
      (Q_N.array() < 0.0).any()) {
    throw InvalidArgument("OcpConfig: weights must be >= 0");
  }
  if (max_sqp_iters < 1) throw InvalidArgument("OcpConfig: max_sqp_iters must be >= 1");
  if (!(kkt_tol > 0.0)) throw InvalidArgument("OcpConfig: kkt_tol must be > 0");
}

DynamicsModel DynamicsModel::analytical(const PhysicalParams& params) {
  DynamicsModel m;
  m.mode = Mode::kAnalytical;
  m.params = params;
  return m;
}

DynamicsModel DynamicsModel::neural(const PhysicalParams& params,
                                    MlpParams network) {
  DynamicsModel m;
  m.mode = Mode::kNeuralEnhanced;
  m.params = params;
  m.network = std::move(network);
  return m;
}

void DynamicsModel::validate() const {
  params.validate();
  if (mode == Mode::kNeuralEnhanced && !network) {
    throw InvalidArgument("DynamicsModel: neural-enhanced mode needs a network");
  }
}

Vec3 DynamicsModel::residual(const State& x, const ControlInput& u) const {
  if (mode == Mode::kAnalytical) return Vec3::Zero();
  return forward(*network, NetworkInput::from(x, u)).a_tilde;
}

Vec3 DynamicsModel::predicted_acceleration(const State& x,
                                           const ControlInput& u) const {
  return linear_acceleration(x, u.f, params) + residual(x, u);
}

CtrlVector to_vector(const ControlInput& u) {
  CtrlVector v;
  v << u.f, u.alpha_c;
  return v;
}

ControlInput from_vector(const CtrlVector& v) {
  ControlInput u;
  u.f = v.head<4>();
  u.alpha_c = v.tail<4>();
  return u;
}

CtrlVector input_lower_bound(const PhysicalParams& params) {
  CtrlVector v;
  v << Vec4::Constant(params.f_min), Vec4::Constant(-params.servo_limit_rad);
  return v;
}

CtrlVector input_upper_bound(const PhysicalParams& params) {
  CtrlVector v;
  v << Vec4::Constant(params.f_max), Vec4::Constant(params.servo_limit_rad);
  return v;
}

ErrVector boxminus(const State& a, const State& b) {
  ErrVector d;
  d.segment<3>(err::kP) = a.p - b.p;
  d.segment<3>(err::kV) = a.v - b.v;
  d.segment<3>(err::kAtt) = so3::log(a.q * b.q.conjugate());
  d.segment<3>(err::kOmega) = a.omega_b - b.omega_b;
  d.segment<4>(err::kAlpha) = a.alpha_s - b.alpha_s;
  d[err::kSpare] = 0.0;
  return d;
}

State boxplus(const State& x, const ErrVector& delta) {
  State out;
  out.p = x.p + delta.segment<3>(err::kP);
  out.v = x.v + delta.segment<3>(err::kV);
  out.q = (so3::exp(delta.segment<3>(err::kAtt)) * x.q).normalized();
  out.omega_b = x.omega_b + delta.segment<3>(err::kOmega);
  out.alpha_s = x.alpha_s + delta.segment<4>(err::kAlpha);
  return out;
}

State discrete_dynamics(const DynamicsModel& model, const State& x,
                        const ControlInput& u, double dt) {
  if (model.mode == DynamicsModel::Mode::kAnalytical) {
    return rk4_step(x, u, dt, model.params);
  }
  const Vec3 residual = model.residual(x, u);
  const PhysicalParams& params = model.params;
  return rk4_step(
      [&params, &residual](const State& s, const ControlInput& in) {
        StateDerivative d = state_derivative(s, in, params);
        d.dv += residual;
        return d;
      },
      x, u, dt);
}

Linearization linearize(const DynamicsModel& model, const State& x,
                        const ControlInput& u, double dt, double step) {
  Linearization lin;
  lin.A.setZero();
  lin.B.setZero();
  const double inv = 1.0 / (2.0 * step);
  // The spare column stays zero: boxplus ignores that coordinate.
  for (int i = 0; i < kErrDim - 1; ++i) {
    ErrVector d = ErrVector::Zero();
    d[i] = step;
    const State plus = discrete_dynamics(model, boxplus(x, d), u, dt);
    const State minus = discrete_dynamics(model, boxplus(x, -d), u, dt);
    lin.A.col(i) = boxminus(plus, minus) * inv;
  }
  const CtrlVector u0 = to_vector(u);
  for (int j = 0; j < kCtrlDim; ++j) {
    CtrlVector up = u0;
    CtrlVector um = u0;
    up[j] += step;
    um[j] -= step;
    const State plus = discrete_dynamics(model, x, from_vector(up), dt);
    const State minus = discrete_dynamics(model, x, from_vector(um), dt);
    lin.B.col(j) = boxminus(plus, minus) * inv;
  }
  if (!lin.A.allFinite() || !lin.B.allFinite()) {
    throw NonFiniteError("linearize: non-finite Jacobian");
  }
  return lin;
}

ErrVector tracking_error(const State& x, const ReferencePoint& ref) {
  return boxminus(ref.x_ref, x);
}

ErrMatrix tracking_error_jacobian(const State& x, const ReferencePoint& ref) {
  ErrMatrix J = -ErrMatrix::Identity();
  J(err::kSpare, err::kSpare) = 0.0;
  const Vec3 phi = so3::log(ref.x_ref.q * x.q.conjugate());
  J.block<3, 3>(err::kAtt, err::kAtt) = -so3::right_jacobian_inverse(phi);
  return J;
}

SolverMemory SolverMemory::cold_start(const State& x_hat, const ControlInput& u,
                                      int horizon_N) {
  if (horizon_N < 2) throw InvalidArgument("cold_start: horizon_N must be >= 2");
  SolverMemory mem;
  mem.state_trajectory.assign(horizon_N + 1, x_hat);
  mem.input_trajectory.assign(horizon_N, u);
  return mem;
}

namespace {

void check_shapes(const SolverMemory& mem,
                  const std::vector<ReferencePoint>& refs, const OcpConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.horizon_N);
  if (mem.input_trajectory.size() != n || mem.state_trajectory.size() != n + 1) {
    throw InvalidArgument("solver memory does not match horizon_N");
  }
  if (refs.size() != n + 1) {
    throw InvalidArgument("need horizon_N + 1 reference points, got " +
                          std::to_string(refs.size()));
  }
}

}  // namespace

OcpQp build_qp(const SolverMemory& mem, const State& x_hat,
               const std::vector<ReferencePoint>& refs, const OcpConfig& cfg,
               const DynamicsModel& model) {
  check_shapes(mem, refs, cfg);
  const int N = cfg.horizon_N;
  const CtrlVector lower = input_lower_bound(model.params);
  const CtrlVector upper = input_upper_bound(model.params);

  OcpQp qp;
  qp.A.resize(N);
  qp.B.resize(N);
  qp.c.resize(N);
  qp.e.resize(N + 1);
  qp.J.resize(N + 1);
  qp.ubar.resize(N);
  qp.du_lower.resize(N);
  qp.du_upper.resize(N);
  qp.Q = cfg.Q;
  qp.R = cfg.R;
  qp.Q_N = cfg.Q_N;
  qp.dx0 = boxminus(x_hat, mem.state_trajectory[0]);

  for (int k = 0; k < N; ++k) {
    const State& xk = mem.state_trajectory[k];
    const ControlInput& uk = mem.input_trajectory[k];
    const State next = discrete_dynamics(model, xk, uk, cfg.t_step);
    const Linearization lin = linearize(model, xk, uk, cfg.t_step);
    qp.A[k] = lin.A;
    qp.B[k] = lin.B;
    qp.c[k] = boxminus(next, mem.state_trajectory[k + 1]);
    const CtrlVector u_vec = to_vector(uk);
    qp.ubar[k] = to_vector(refs[k].u_ref) - u_vec;
    qp.du_lower[k] = lower - u_vec;
    qp.du_upper[k] = upper - u_vec;
  }
  for (int k = 0; k <= N; ++k) {
    qp.e[k] = tracking_error(mem.state_trajectory[k], refs[k]);
    qp.J[k] = tracking_error_jacobian(mem.state_trajectory[k], refs[k]);
  }
  return qp;
}

QpSolution solve_condensed(const OcpQp& qp, double tol) {
  const int N = qp.horizon();
  const Eigen::Index nu = static_cast<Eigen::Index>(N) * kCtrlDim;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nu, nu);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(nu);

  // dx_k = a_k + G_k dU, where only the first 8k columns of G_k are nonzero.
  ErrVector a = qp.dx0;
  Eigen::Matrix<double, kErrDim, Eigen::Dynamic> G =
      Eigen::Matrix<double, kErrDim, Eigen::Dynamic>::Zero(kErrDim, nu);

  for (int k = 0; k <= N; ++k) {
    const Eigen::Index cols = static_cast<Eigen::Index>(k) * kCtrlDim;
    const ErrVector& w = (k < N) ? qp.Q : qp.Q_N;
    const ErrVector r = qp.e[k] + qp.J[k] * a;
    if (cols > 0) {
      const Eigen::Matrix<double, kErrDim, Eigen::Dynamic> M =
          qp.J[k] * G.leftCols(cols);
      const Eigen::Matrix<double, kErrDim, Eigen::Dynamic> WM =
          w.asDiagonal() * M;
      H.topLeftCorner(cols, cols).noalias() += 2.0 * M.transpose() * WM;
      grad.head(cols).noalias() += 2.0 * WM.transpose() * r;
    }
    if (k < N) {
      const Eigen::Index off = cols;
      for (int j = 0; j < kCtrlDim; ++j) {
        H(off + j, off + j) += 2.0 * qp.R[j];
        grad[off + j] -= 2.0 * qp.R[j] * qp.ubar[k][j];
      }
      // Propagate to k + 1.
      if (cols > 0) G.leftCols(cols) = (qp.A[k] * G.leftCols(cols)).eval();
      G.middleCols(off, kCtrlDim) = qp.B[k];
      a = qp.A[k] * a + qp.c[k];
    }
  }

  Eigen::VectorXd lower(nu), upper(nu);
  for (int k = 0; k < N; ++k) {
    lower.segment<kCtrlDim>(k * kCtrlDim) = qp.du_lower[k];
    upper.segment<kCtrlDim>(k * kCtrlDim) = qp.du_upper[k];
  }
  const BoxQpResult res = solve_box_qp(H, grad, lower, upper,
                                       Eigen::VectorXd::Zero(nu), tol, 200);

  QpSolution sol;
  sol.converged = res.converged;
  sol.factorization_failed = res.factorization_failed;
  sol.iterations = res.iterations;
  sol.du.resize(N);
  sol.dx.resize(N + 1);
  sol.dx[0] = qp.dx0;
  for (int k = 0; k < N; ++k) {
    sol.du[k] = res.x.segment<kCtrlDim>(k * kCtrlDim);
    sol.dx[k + 1] = qp.A[k] * sol.dx[k] + qp.B[k] * sol.du[k] + qp.c[k];
  }
  return sol;
}

double trajectory_cost(const SolverMemory& mem,
                       const std::vector<ReferencePoint>& refs,
                       const OcpConfig& cfg) {
  check_shapes(mem, refs, cfg);
  const int N = cfg.horizon_N;
  double cost = 0.0;
  for (int k = 0; k < N; ++k) {
    const ErrVector e = tracking_error(mem.state_trajectory[k], refs[k]);
    const CtrlVector ubar =
        to_vector(refs[k].u_ref) - to_vector(mem.input_trajectory[k]);
    cost += e.dot(cfg.Q.cwiseProduct(e)) + ubar.dot(cfg.R.cwiseProduct(ubar));
  }
  const ErrVector eN = tracking_error(mem.state_trajectory[N], refs[N]);
  cost += eN.dot(cfg.Q_N.cwiseProduct(eN));
  return cost;
}

namespace {

State interpolate(const State& a, const State& b, double s) {
  State out;
  out.p = a.p + s * (b.p - a.p);
  out.v = a.v + s * (b.v - a.v);
  out.q = a.q.slerp(s, b.q).normalized();
  out.omega_b = a.omega_b + s * (b.omega_b - a.omega_b);
  out.alpha_s = a.alpha_s + s * (b.alpha_s - a.alpha_s);
  return out;
}

// Moves every node forward in time by s * t_step.
void shift(SolverMemory& mem, const DynamicsModel& model, double s, double dt) {
  auto& xs = mem.state_trajectory;
  auto& us = mem.input_trajectory;
  const int N = static_cast<int>(us.size());
  const State tail = discrete_dynamics(model, xs[N], us[N - 1], dt);
  for (int k = 0; k < N; ++k) xs[k] = interpolate(xs[k], xs[k + 1], s);
  xs[N] = interpolate(xs[N], tail, s);
  for (int k = 0; k + 1 < N; ++k) {
    us[k] = from_vector(to_vector(us[k]) + s * (to_vector(us[k + 1]) - to_vector(us[k])));
  }
}

}  // namespace

RtiResult solve_rti(SolverMemory& mem, const State& x_hat,
                    const std::vector<ReferencePoint>& refs,
                    const OcpConfig& cfg, const DynamicsModel& model) {
  check_shapes(mem, refs, cfg);
  if (!is_finite(x_hat)) throw NonFiniteError("solve_rti: x_hat not finite");
  const CtrlVector lower = input_lower_bound(model.params);
  const CtrlVector upper = input_upper_bound(model.params);
  const int N = cfg.horizon_N;

  RtiResult result;
  for (int iter = 0; iter < cfg.max_sqp_iters; ++iter) {
    const OcpQp qp = build_qp(mem, x_hat, refs, cfg, model);
    const QpSolution sol = solve_condensed(qp, cfg.kkt_tol);
    result.sqp_iterations = iter + 1;
    if (sol.factorization_failed) {
      result.status = SolveStatus::kQpFailed;
      break;
    }
    if (!sol.converged) result.status = SolveStatus::kQpNotConverged;

    double kkt = 0.0;
    for (int k = 0; k < N; ++k) {
      if (!sol.du[k].allFinite()) throw NonFiniteError("solve_rti: QP step not finite");
      kkt = std::max(kkt, sol.du[k].cwiseAbs().maxCoeff());
      kkt = std::max(kkt, qp.c[k].cwiseAbs().maxCoeff());
      const CtrlVector u_new =
          (to_vector(mem.input_trajectory[k]) + sol.du[k]).cwiseMax(lower).cwiseMin(upper);
      mem.input_trajectory[k] = from_vector(u_new);
    }
    for (int k = 1; k <= N; ++k) {
      mem.state_trajectory[k] = boxplus(mem.state_trajectory[k], sol.dx[k]);
    }
    mem.state_trajectory[0] = x_hat;
    result.kkt = kkt;
    if (kkt < cfg.kkt_tol) break;
  }

  result.u_star_0 = mem.input_trajectory[0];
  result.cost = trajectory_cost(mem, refs, cfg);
  mem.last_kkt = result.kkt;
  mem.last_cost = result.cost;

  shift(mem, model, cfg.t_samp / cfg.t_step, cfg.t_step);
  return result;
}

}  // namespace tmpc
