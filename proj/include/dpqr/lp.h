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

#ifndef DPQR_LP_H_
#define DPQR_LP_H_

#include <cstddef>

#include <Eigen/Dense>

namespace dpqr::lp {

// minimize c'x  subject to  A x <= b,  x >= 0, with c >= 0 entrywise.
struct Problem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class Status { kOptimal, kInfeasible, kIterationLimit };

struct Solution {
  Status status = Status::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

struct Options {
  double tolerance = 1e-10;
  std::size_t max_pivots = 200000;
  // Switch from the most-negative rule to Bland's rule after this many
  // pivots without objective progress.
  std::size_t stall_limit = 50;
};

// Dense dual simplex started from the all-slack basis.
Solution SolveDual(const Problem& problem, const Options& options = {});

}  // namespace dpqr::lp

#endif  // DPQR_LP_H_
