// Copyright 2026 The dpqr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpqr/lp.h"

#include <cmath>
#include <limits>
#include <vector>

#include "dpqr/errors.h"

namespace dpqr::lp {

Solution SolveDual(const Problem& problem, const Options& options) {
  const Eigen::Index rows = problem.a.rows();
  const Eigen::Index vars = problem.a.cols();
  if (problem.b.size() != rows || problem.c.size() != vars) {
    throw InvalidArgument("lp: dimension mismatch");
  }
  if ((problem.c.array() < 0.0).any()) {
    throw InvalidArgument("lp: dual simplex start needs a nonnegative cost vector");
  }
  if (!problem.a.allFinite() || !problem.b.allFinite() || !problem.c.allFinite()) {
    throw InvalidArgument("lp: non-finite problem data");
  }

  // Tableau columns: structural variables then slacks; last column is the rhs.
  const Eigen::Index cols = vars + rows;
  Eigen::MatrixXd tab(rows, cols + 1);
  tab.leftCols(vars) = problem.a;
  tab.middleCols(vars, rows).setIdentity();
  tab.col(cols) = problem.b;
  Eigen::VectorXd reduced(cols);
  reduced.head(vars) = problem.c;
  reduced.tail(rows).setZero();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = vars + r;

  const double tol = options.tolerance;
  Solution out;
  bool bland = false;
  std::size_t stalled = 0;
  double last_objective = -std::numeric_limits<double>::infinity();

  while (true) {
    // Leaving row.
    Eigen::Index leave = -1;
    double most_negative = -tol;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double rhs = tab(r, cols);
      if (rhs >= -tol) continue;
      if (bland) {
        if (leave < 0 || basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)]) {
          leave = r;
        }
      } else if (rhs < most_negative) {
        most_negative = rhs;
        leave = r;
      }
    }
    if (leave < 0) {
      out.status = Status::kOptimal;
      break;
    }
    if (out.pivots >= options.max_pivots) {
      out.status = Status::kIterationLimit;
      break;
    }

    // Entering column: dual ratio test, lowest index on ties.
    Eigen::Index enter = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double coef = tab(leave, j);
      if (coef >= -tol) continue;
      const double ratio = std::max(reduced[j], 0.0) / -coef;
      if (ratio < best_ratio - 1e-15) {
        best_ratio = ratio;
        enter = j;
      }
    }
    if (enter < 0) {
      out.status = Status::kInfeasible;
      break;
    }

    const double pivot = tab(leave, enter);
    tab.row(leave) /= pivot;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double factor = tab(r, enter);
      if (factor != 0.0) tab.row(r) -= factor * tab.row(leave);
    }
    const double rfactor = reduced[enter];
    if (rfactor != 0.0) reduced -= rfactor * tab.row(leave).head(cols).transpose();
    basis[static_cast<std::size_t>(leave)] = enter;
    ++out.pivots;

    double objective = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index v = basis[static_cast<std::size_t>(r)];
      if (v < vars) objective += problem.c[v] * tab(r, cols);
    }
    if (objective > last_objective + tol) {
      last_objective = objective;
      stalled = 0;
    } else if (++stalled >= options.stall_limit) {
      bland = true;
    }
  }

  if (out.status != Status::kOptimal) return out;

  // Re-solve the final basis against the original data to shed accumulated
  // tableau round-off.
  Eigen::MatrixXd basis_matrix(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index v = basis[static_cast<std::size_t>(r)];
    if (v < vars) {
      basis_matrix.col(r) = problem.a.col(v);
    } else {
      basis_matrix.col(r) = Eigen::VectorXd::Unit(rows, v - vars);
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
  Eigen::VectorXd xb = lu.solve(problem.b);
  if (!xb.allFinite()) xb = tab.col(cols);
  out.x = Eigen::VectorXd::Zero(vars);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index v = basis[static_cast<std::size_t>(r)];
    if (v < vars) out.x[v] = std::max(xb[r], 0.0);
  }
  out.objective = problem.c.dot(out.x);
  return out;
}

}  // namespace dpqr::lp
