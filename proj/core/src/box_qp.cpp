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

#include "tmpc/box_qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "tmpc/errors.hpp"

namespace tmpc {
namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace

BoxQpResult solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         const Eigen::VectorXd& x0, double tol,
                         int max_iterations) {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n || lower.size() != n ||
      upper.size() != n || x0.size() != n) {
    throw InvalidArgument("solve_box_qp: dimension mismatch");
  }
  if ((lower.array() > upper.array()).any()) {
    throw InvalidArgument("solve_box_qp: lower bound above upper bound");
  }

  const double threshold = tol * std::max(1.0, g.lpNorm<Eigen::Infinity>());
  BoxQpResult result;
  result.x = clamp(x0, lower, upper);
  Eigen::VectorXd& x = result.x;

  // Working set: 0 free, -1 held at lower, +1 held at upper.
  std::vector<int> bound(static_cast<std::size_t>(n), 0);
  auto set_bound = [&](Eigen::Index i, int side) {
    bound[static_cast<std::size_t>(i)] = side;
    if (side < 0) x[i] = lower[i];
    if (side > 0) x[i] = upper[i];
  };

  // Initial guess for the working set from the clamped unconstrained minimizer.
  {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
      result.factorization_failed = true;
      return result;
    }
    const Eigen::VectorXd xu = -llt.solve(g);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (xu[i] <= lower[i]) {
        set_bound(i, -1);
      } else if (xu[i] >= upper[i]) {
        set_bound(i, +1);
      }
    }
  }

  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));
  Eigen::MatrixXd H_ff;
  Eigen::VectorXd grad_f;
  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd grad = g + H * x;
    free_idx.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bound[static_cast<std::size_t>(i)] == 0) free_idx.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(free_idx.size());

    Eigen::VectorXd step_f;
    if (m > 0) {
      H_ff.resize(m, m);
      grad_f.resize(m);
      for (Eigen::Index b = 0; b < m; ++b) {
        grad_f[b] = grad[free_idx[b]];
        for (Eigen::Index a = 0; a < m; ++a) H_ff(a, b) = H(free_idx[a], free_idx[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(H_ff);
      if (llt.info() != Eigen::Success) {
        result.factorization_failed = true;
        break;
      }
      step_f = -llt.solve(grad_f);
    }

    // Largest feasible fraction of the subspace step.
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    int blocking_side = 0;
    for (Eigen::Index a = 0; a < m; ++a) {
      const Eigen::Index i = free_idx[a];
      const double p = step_f[a];
      if (p < 0.0 && x[i] + p < lower[i]) {
        const double t = (lower[i] - x[i]) / p;
        if (t < alpha) {
          alpha = t;
          blocking = i;
          blocking_side = -1;
        }
      } else if (p > 0.0 && x[i] + p > upper[i]) {
        const double t = (upper[i] - x[i]) / p;
        if (t < alpha) {
          alpha = t;
          blocking = i;
          blocking_side = +1;
        }
      }
    }
    alpha = std::max(alpha, 0.0);
    for (Eigen::Index a = 0; a < m; ++a) x[free_idx[a]] += alpha * step_f[a];
    if (blocking >= 0) {
      set_bound(blocking, blocking_side);
      continue;
    }

    // Subspace optimum reached: release the most violated bound, if any.
    const Eigen::VectorXd grad_new = g + H * x;
    double worst = -threshold;
    Eigen::Index release = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int side = bound[static_cast<std::size_t>(i)];
      if (side == 0) continue;
      const double multiplier = side < 0 ? grad_new[i] : -grad_new[i];
      if (multiplier < worst) {
        worst = multiplier;
        release = i;
      }
    }
    if (release < 0) {
      result.converged = true;
      break;
    }
    bound[static_cast<std::size_t>(release)] = 0;
  }

  x = clamp(x, lower, upper);
  const Eigen::VectorXd grad = g + H * x;
  result.projected_gradient_norm =
      (x - clamp(x - grad, lower, upper)).lpNorm<Eigen::Infinity>();
  return result;
}

}  // namespace tmpc
