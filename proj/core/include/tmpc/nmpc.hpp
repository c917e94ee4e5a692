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

// Multiple-shooting NMPC solved by Gauss-Newton SQP in real-time-iteration
// mode. The QP is condensed onto the inputs and solved with box constraints
// on thrust and servo commands.
//
// States are compared on a 17-dim tangent space:
//   [dp(3), dv(3), dtheta(3), domega(3), dalpha(4), spare(1)]
// where dtheta = Log(q_a * q_b^-1) is a world-frame rotation vector. The
// spare slot keeps Q aligned with the raw 18-entry state layout and is
// always zero.

#ifndef TMPC_NMPC_HPP_
#define TMPC_NMPC_HPP_

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tmpc/dynamics.hpp"
#include "tmpc/residual_net.hpp"

namespace tmpc {

inline constexpr int kErrDim = 17;
inline constexpr int kCtrlDim = 8;

using ErrVector = Eigen::Matrix<double, kErrDim, 1>;
using ErrMatrix = Eigen::Matrix<double, kErrDim, kErrDim>;
using CtrlVector = Eigen::Matrix<double, kCtrlDim, 1>;
using InputMatrix = Eigen::Matrix<double, kErrDim, kCtrlDim>;

namespace err {
inline constexpr int kP = 0;
inline constexpr int kV = 3;
inline constexpr int kAtt = 6;
inline constexpr int kOmega = 9;
inline constexpr int kAlpha = 12;
inline constexpr int kSpare = 16;
}  // namespace err

struct OcpConfig {
  int horizon_N = 20;
  double t_step = 0.1;
  double t_samp = 0.025;
  ErrVector Q = default_Q();
  CtrlVector R = CtrlVector::Ones();
  ErrVector Q_N = 5.0 * default_Q();
  int max_sqp_iters = 1;
  double kkt_tol = 1e-8;

  static ErrVector default_Q();
  void validate() const;
};

struct ReferencePoint {
  State x_ref;
  ControlInput u_ref;
};

struct DynamicsModel {
  enum class Mode { kAnalytical, kNeuralEnhanced };

  Mode mode = Mode::kAnalytical;
  PhysicalParams params;
  std::optional<MlpParams> network;

  static DynamicsModel analytical(const PhysicalParams& params);
  static DynamicsModel neural(const PhysicalParams& params, MlpParams network);

  // Residual acceleration added to dv/dt; zero in analytical mode.
  Vec3 residual(const State& x, const ControlInput& u) const;
  // World-frame acceleration the model predicts at (x, u).
  Vec3 predicted_acceleration(const State& x, const ControlInput& u) const;
  void validate() const;
};

CtrlVector to_vector(const ControlInput& u);
ControlInput from_vector(const CtrlVector& v);

// a [-] b on the tangent space, and its retraction.
ErrVector boxminus(const State& a, const State& b);
State boxplus(const State& x, const ErrVector& delta);

// One model step. In neural-enhanced mode the network is evaluated once at
// (x, u) and its output is held constant across the RK4 stages.
State discrete_dynamics(const DynamicsModel& model, const State& x,
                        const ControlInput& u, double dt);

struct Linearization {
  ErrMatrix A;
  InputMatrix B;
};

inline constexpr double kLinearizationStep = 1e-6;

// Central finite differences of discrete_dynamics on the tangent space.
Linearization linearize(const DynamicsModel& model, const State& x,
                        const ControlInput& u, double dt,
                        double step = kLinearizationStep);

// x_ref [-] x: componentwise for p, v, omega, alpha and Log(q_ref q^-1) for
// the attitude.
ErrVector tracking_error(const State& x, const ReferencePoint& ref);

// d tracking_error(x [+] delta) / d delta at delta = 0.
ErrMatrix tracking_error_jacobian(const State& x, const ReferencePoint& ref);

struct SolverMemory {
  std::vector<State> state_trajectory;          // N + 1 shooting nodes
  std::vector<ControlInput> input_trajectory;   // N
  double last_kkt = 0.0;
  double last_cost = 0.0;

  static SolverMemory cold_start(const State& x_hat, const ControlInput& u,
                                 int horizon_N);
  int horizon() const { return static_cast<int>(input_trajectory.size()); }
};

// Linearized multiple-shooting QP in tangent coordinates:
//   min sum_k |e_k + J_k dx_k|_Q^2 + |ubar_k - du_k|_R^2 + |e_N + J_N dx_N|_QN^2
//   s.t. dx_0 = dx0, dx_{k+1} = A_k dx_k + B_k du_k + c_k,
//        du_lower_k <= du_k <= du_upper_k
struct OcpQp {
  std::vector<ErrMatrix> A;
  std::vector<InputMatrix> B;
  std::vector<ErrVector> c;
  std::vector<ErrVector> e;   // N + 1
  std::vector<ErrMatrix> J;   // N + 1
  std::vector<CtrlVector> ubar;
  std::vector<CtrlVector> du_lower;
  std::vector<CtrlVector> du_upper;
  ErrVector dx0 = ErrVector::Zero();
  ErrVector Q = ErrVector::Zero();
  CtrlVector R = CtrlVector::Zero();
  ErrVector Q_N = ErrVector::Zero();

  int horizon() const { return static_cast<int>(B.size()); }
};

struct QpSolution {
  std::vector<CtrlVector> du;
  std::vector<ErrVector> dx;
  bool converged = false;
  bool factorization_failed = false;
  int iterations = 0;
};

OcpQp build_qp(const SolverMemory& mem, const State& x_hat,
               const std::vector<ReferencePoint>& refs, const OcpConfig& cfg,
               const DynamicsModel& model);

// Condenses the QP onto the inputs and solves it with solve_box_qp.
QpSolution solve_condensed(const OcpQp& qp, double tol);

// Nonlinear tracking cost of the trajectory stored in mem.
double trajectory_cost(const SolverMemory& mem,
                       const std::vector<ReferencePoint>& refs,
                       const OcpConfig& cfg);

enum class SolveStatus { kOk, kQpNotConverged, kQpFailed };

struct RtiResult {
  ControlInput u_star_0;
  SolveStatus status = SolveStatus::kOk;
  double kkt = 0.0;
  double cost = 0.0;
  int sqp_iterations = 0;
};

// Runs up to cfg.max_sqp_iters Gauss-Newton iterations from the warm start in
// mem, returns the first input and advances the warm start by t_samp (nodes
// and inputs are interpolated a fraction t_samp / t_step towards their
// successors). refs holds N + 1
// reference points at t + k * t_step. Emitted inputs always satisfy the
// thrust and servo bounds. On QP failure the previous first input is
// returned and the status is flagged.
RtiResult solve_rti(SolverMemory& mem, const State& x_hat,
                    const std::vector<ReferencePoint>& refs,
                    const OcpConfig& cfg, const DynamicsModel& model);

CtrlVector input_lower_bound(const PhysicalParams& params);
CtrlVector input_upper_bound(const PhysicalParams& params);

}  // namespace tmpc

#endif  // TMPC_NMPC_HPP_
