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

#include "dpqr/precision.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "dpqr/errors.h"

namespace dpqr::precision {

double CovarianceNoiseSigma(std::size_t n, std::size_t p, double kappa_u,
                            const dp::PrivacyBudget& budget, double b1) {
  if (n == 0 || p == 0) throw InvalidArgument("covariance noise: n and p must be positive");
  if (!(b1 >= 0.0)) throw InvalidArgument("covariance noise: B1 must be >= 0");
  if (budget.IsNonPrivate()) return 0.0;
  budget.Validate();
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  const double lg = std::log(2.0 * nn * pp * pp);
  const double variance = b1 * lg * lg * kappa_u * kappa_u * std::log(1.25 / budget.delta) /
                          (nn * nn * budget.epsilon * budget.epsilon);
  return std::sqrt(variance);
}

NoisyCovariance NoisyPseudoCovariance(const dist::Worker& central,
                                      const Eigen::VectorXd& beta_prev,
                                      const qr::KernelSpec& kernel,
                                      const dp::PrivacyBudget& budget, double b1, bool privatize,
                                      Rng& rng, dp::BudgetLedger* ledger,
                                      const std::string& label) {
  if (static_cast<std::size_t>(beta_prev.size()) != central.dim()) {
    throw InvalidArgument("noisy_pseudo_covariance: beta has wrong dimension");
  }
  const qr::Kernel k(kernel);
  NoisyCovariance out;
  out.bandwidth = kernel.bandwidth;
  out.matrix = central.KernelGram(beta_prev, k);
  if (!privatize || budget.IsNonPrivate()) return out;

  out.noise_sigma = CovarianceNoiseSigma(central.rows(), central.dim() - 1, k.kappa_u(), budget, b1);
  const Eigen::Index d = out.matrix.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double g = out.noise_sigma * rng.Normal();
      out.matrix(i, j) += g;
      if (i != j) out.matrix(j, i) += g;
    }
  }
  if (ledger != nullptr) ledger->Record(label, budget);
  return out;
}

ColumnResult SolveColumn(const Eigen::MatrixXd& d, std::size_t j, double gamma,
                         const ClimeOptions& options) {
  const Eigen::Index dim = d.rows();
  if (d.cols() != dim) throw InvalidArgument("clime: matrix must be square");
  if (j >= static_cast<std::size_t>(dim)) throw InvalidArgument("clime: column out of range");
  if (!(gamma > 0.0)) throw InvalidArgument("clime: gamma must be positive");

  const bool linf = options.objective == ClimeObjective::kLinf;
  const Eigen::Index vars = 2 * dim + (linf ? 1 : 0);
  const Eigen::Index rows = 2 * dim + (linf ? dim : 0);
  lp::Problem prob;
  prob.a = Eigen::MatrixXd::Zero(rows, vars);
  prob.b.resize(rows);
  prob.c = Eigen::VectorXd::Zero(vars);
  const Eigen::VectorXd e = Eigen::VectorXd::Unit(dim, static_cast<Eigen::Index>(j));
  // w = u - v;  D w <= gamma + e  and  -D w <= gamma - e.
  prob.a.block(0, 0, dim, dim) = d;
  prob.a.block(0, dim, dim, dim) = -d;
  prob.a.block(dim, 0, dim, dim) = -d;
  prob.a.block(dim, dim, dim, dim) = d;
  prob.b.head(dim) = Eigen::VectorXd::Constant(dim, gamma) + e;
  prob.b.segment(dim, dim) = Eigen::VectorXd::Constant(dim, gamma) - e;
  if (linf) {
    // u_i + v_i <= t.
    for (Eigen::Index i = 0; i < dim; ++i) {
      prob.a(2 * dim + i, i) = 1.0;
      prob.a(2 * dim + i, dim + i) = 1.0;
      prob.a(2 * dim + i, 2 * dim) = -1.0;
    }
    prob.b.tail(dim).setZero();
    prob.c[2 * dim] = 1.0;
  } else {
    prob.c.head(2 * dim).setOnes();
  }

  const lp::Solution sol = lp::SolveDual(prob, options.lp);
  ColumnResult out;
  out.pivots = sol.pivots;
  if (sol.status != lp::Status::kOptimal) return out;
  out.w = sol.x.head(dim) - sol.x.segment(dim, dim);
  out.violation = (d * out.w - e).cwiseAbs().maxCoeff();
  out.feasible = out.violation <= gamma + 1e-9;
  return out;
}

std::string PrecisionEstimate::InfeasibilityReport() const {
  if (feasible()) return "";
  std::ostringstream msg;
  msg << "clime: infeasible at gamma = " << gamma << " for column(s)";
  for (std::size_t j : infeasible_columns) msg << ' ' << j;
  return msg.str();
}

PrecisionEstimate ClimeSolve(const Eigen::MatrixXd& d, double gamma, const ClimeOptions& options) {
  const Eigen::Index dim = d.rows();
  if (d.cols() != dim || dim == 0) throw InvalidArgument("clime: matrix must be square");
  if (!d.allFinite()) throw InvalidArgument("clime: non-finite matrix");
  if (!(gamma > 0.0)) throw InvalidArgument("clime: gamma must be positive");

  std::vector<ColumnResult> results(static_cast<std::size_t>(dim));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) results[j] = SolveColumn(d, j, gamma, options);
  };
  const std::size_t total = static_cast<std::size_t>(dim);
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, total);
  if (threads == 1) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (std::size_t begin = 0; begin < total; begin += chunk) {
      pool.emplace_back(work, begin, std::min(total, begin + chunk));
    }
  }

  PrecisionEstimate out;
  out.gamma = gamma;
  out.raw = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t j = 0; j < total; ++j) {
    if (!results[j].feasible) {
      out.infeasible_columns.push_back(j);
      continue;
    }
    out.raw.col(static_cast<Eigen::Index>(j)) = results[j].w;
    out.raw_violation = std::max(out.raw_violation, results[j].violation);
  }
  out.w = 0.5 * (out.raw + out.raw.transpose());
  out.symmetric_violation =
      (d * out.w - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  return out;
}

PrecisionEstimate ClimeSolveEnlarging(const Eigen::MatrixXd& d, double gamma,
                                      const ClimeOptions& options, int max_doublings) {
  PrecisionEstimate est = ClimeSolve(d, gamma, options);
  for (int i = 0; i < max_doublings && !est.feasible(); ++i) {
    gamma *= 2.0;
    est = ClimeSolve(d, gamma, options);
  }
  if (!est.feasible()) throw NumericalError(est.InfeasibilityReport());
  return est;
}

double ChooseGamma(const GammaInputs& in) {
  if (in.n == 0 || in.N == 0 || in.p < 2) {
    throw InvalidArgument("choose_gamma: need n, N >= 1 and p >= 2");
  }
  if (!(in.b > 0.0)) throw InvalidArgument("choose_gamma: bandwidth must be positive");
  if (!(in.c_gamma > 0.0)) throw InvalidArgument("choose_gamma: c_gamma must be positive");
  const double logp = std::log(static_cast<double>(in.p));
  const double nb = static_cast<double>(in.n) * in.b;
  double value = std::sqrt(logp / nb) + logp / nb + in.b * in.b;
  if (in.privatize && !in.budget.IsNonPrivate()) {
    in.budget.Validate();
    const double big_n = static_cast<double>(in.N);
    value += std::sqrt(std::pow(logp, 10.0 / 3.0) * std::log(1.0 / in.budget.delta) *
                       std::pow(static_cast<double>(in.n), 2.0 / 3.0) /
                       (big_n * big_n * in.budget.epsilon * in.budget.epsilon));
  }
  return in.c_gamma * value;
}

void WriteDenseCsv(std::ostream& out, const Eigen::MatrixXd& m) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

namespace {

std::vector<double> SplitNumbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) {
        throw InvalidArgument("csv: bad number '" + cell + "'");
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("csv: bad number '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd ReadDenseCsv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(SplitNumbers(line));
    if (rows.back().size() != rows.front().size()) throw InvalidArgument("csv: ragged rows");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void WriteTriplets(std::ostream& out, const Eigen::MatrixXd& m, double threshold) {
  out << std::setprecision(17) << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > threshold) out << i << ',' << j << ',' << m(i, j) << '\n';
    }
  }
}

Eigen::MatrixXd ReadTriplets(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("triplets: missing header");
  const auto shape = SplitNumbers(line);
  if (shape.size() != 2) throw InvalidArgument("triplets: header must be rows,cols");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(shape[0]),
                                            static_cast<Eigen::Index>(shape[1]));
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto t = SplitNumbers(line);
    if (t.size() != 3) throw InvalidArgument("triplets: expected i,j,value");
    const auto i = static_cast<Eigen::Index>(t[0]);
    const auto j = static_cast<Eigen::Index>(t[1]);
    if (i < 0 || j < 0 || i >= m.rows() || j >= m.cols()) {
      throw InvalidArgument("triplets: index out of range");
    }
    m(i, j) = t[2];
  }
  return m;
}

}  // namespace dpqr::precision
