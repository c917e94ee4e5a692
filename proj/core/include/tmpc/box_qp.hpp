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

#ifndef TMPC_BOX_QP_HPP_
#define TMPC_BOX_QP_HPP_

#include <Eigen/Core>

namespace tmpc {

struct BoxQpResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  bool factorization_failed = false;
  double projected_gradient_norm = 0.0;  // infinity norm
};

// Primal active-set solver for
//   min 0.5 x'Hx + g'x   s.t.  lower <= x <= upper
// with H symmetric positive definite. The working set starts from the bounds
// violated by the unconstrained minimizer. Converged means every held bound
// has a multiplier >= -tol * max(1, |g|_inf) at the subspace optimum. The
// result always satisfies the bounds exactly.
BoxQpResult solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         const Eigen::VectorXd& x0, double tol,
                         int max_iterations = 100);

}  // namespace tmpc

#endif  // TMPC_BOX_QP_HPP_
