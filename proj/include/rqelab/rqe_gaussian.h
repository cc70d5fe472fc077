// Copyright 2026 The RQE Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RQELAB_RQE_GAUSSIAN_H_
#define RQELAB_RQE_GAUSSIAN_H_

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rqelab/games.h"

// Gaussian RQE of quadratic aggregative games. Best responses to Gaussian
// opponents are Gaussian in closed form, so the equilibrium reduces to a
// quadratic "game of the means" whose first-order conditions are linear.

namespace rqelab {

struct GaussianStrategy {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetric positive definite
};

struct GaussianRqeReport {
  std::vector<GaussianStrategy> strategies;  // empty when !valid
  bool valid = false;
  double shared_reward = 0.0;          // expected R at the equilibrium
  std::vector<double> private_costs;   // E[c_i] per player
};

// Raised when the risk tilt diverges (some P block not positive definite).
class InfiniteRiskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closed-form best response of player i against the others' Gaussian
// strategies. tau_i = 0 gives the risk-neutral quantal best response.
// Throws InfiniteRiskError when (1/tau_i) Sigma_j^{-1} + Q is not positive
// definite for some opponent j.
GaussianStrategy GaussianBestResponse(const QuadraticAggregativeGame& game,
                                      int player,
                                      const std::vector<GaussianStrategy>& others,
                                      double tau_i, double eps_i);

// True iff every pair block (1/(tau_i eps_j))(rho_j I + Qbar) - Qbar is
// positive definite (min eigenvalue > 1e-10).
bool ValidityCondition(const QuadraticAggregativeGame& game,
                       const RiskProfile& profile);

// Direct dense solve of the stacked first-order conditions of the surrogate
// game; covariances from the closed form eps_i (rho_i I + Qbar)^{-1}.
GaussianRqeReport SolveGaussianRqe(const QuadraticAggregativeGame& game,
                                   const RiskProfile& profile);

// E[R(a_1..a_N)] for independent Gaussian strategies:
// 1/2 (m_tot^T Q m_tot + tr(Q S_tot)) + <l, m_tot>, plus the constant the
// target form dropped.
double ExpectedSharedReward(const QuadraticAggregativeGame& game,
                            const std::vector<GaussianStrategy>& strategies);

double ExpectedPrivateCost(const QuadraticAggregativeGame& game, int player,
                           const GaussianStrategy& strategy);

struct MonotonicityRow {
  double tau = 0.0;
  bool valid = false;
  double shared_reward = 0.0;
  std::vector<double> costs;
  std::vector<double> utilities;  // shared_reward - cost_i
  std::vector<double> means;      // stacked player means
};

// One row per tau; invalid rows keep the flag and leave values at zero.
std::vector<MonotonicityRow> MonotonicityScan(
    const QuadraticAggregativeGame& game, double eps,
    const std::vector<double>& tau_grid);

void WriteMonotonicityCsv(std::ostream& os,
                          const QuadraticAggregativeGame& game,
                          const std::vector<MonotonicityRow>& rows,
                          std::uint64_t config_hash);

}  // namespace rqelab

#endif  // RQELAB_RQE_GAUSSIAN_H_
