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

#ifndef RQELAB_GAMES_H_
#define RQELAB_GAMES_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rqelab {

// A point on the probability simplex; entries nonnegative, summing to 1.
using MixedStrategy = std::vector<double>;

bool IsDistribution(std::span<const double> x, double tol = 1e-12);
MixedStrategy UniformStrategy(int n);
MixedStrategy PointMass(int n, int action);

// Two-player finite collaborative game: a shared reward R(a1, a2) plus a
// private cost c(a) paid by each player for their own action. Both players
// share the same cost vector (the symmetric setting the free-riding theory
// is stated for).
struct FiniteCollabGame {
  int num_actions = 0;
  std::vector<double> shared_reward;  // row-major, num_actions x num_actions
  std::vector<double> private_cost;   // length num_actions
  bool symmetric = false;

  double Reward(int a1, int a2) const {
    return shared_reward[a1 * num_actions + a2];
  }

  // Throws std::invalid_argument on shape/finiteness/symmetry violations.
  void Validate() const;

  std::string ToJsonString() const;
  static FiniteCollabGame FromJsonString(const std::string& text);
};

// Continuous aggregative game with shared reward
//   R(a_1..a_N) = 1/2 <sum a_i, Q sum a_i> + <l, sum a_i>
// (Q symmetric negative definite) and private cost rho_i/2 ||a_i||^2.
// Games built from the target form -1/2 ||sum a_i - a_bar||^2_{-Q} keep the
// target vector so the dropped constant can be restored when reporting
// expected rewards.
struct QuadraticAggregativeGame {
  int dim = 0;
  int num_players = 0;
  std::vector<double> reward_quad;  // Q, row-major dim x dim
  std::vector<double> reward_lin;   // l, length dim
  std::vector<double> rho;          // length num_players, all > 0
  std::optional<std::vector<double>> target;  // a_bar when built from target form

  void Validate() const;

  // Builds from the target form: Q = -Qbar, l = Qbar * a_bar.
  static QuadraticAggregativeGame FromTargetForm(
      const std::vector<double>& quad_bar, const std::vector<double>& a_bar,
      const std::vector<double>& rho);

  // Constant dropped when converting the target form to (Q, l):
  // -1/2 <a_bar, Qbar a_bar> if a target is stored, else 0.
  double RewardConstant() const;

  std::string ToJsonString() const;
  static QuadraticAggregativeGame FromJsonString(const std::string& text);
};

// Per-player degrees of risk aversion (tau) and bounded rationality (eps).
// tau = 0 is the explicit risk-neutral sentinel; eps must be positive.
struct RiskProfile {
  std::vector<double> tau;
  std::vector<double> eps;

  static RiskProfile Shared(int num_players, double tau, double eps);
  void Validate() const;
};

// u_i(a_1, a_2) = R(a_1, a_2) - c(a_i).
double Utility(const FiniteCollabGame& game, int player, int a1, int a2);

// x1^T R x2 - <c, x_i>.
double ExpectedUtility(const FiniteCollabGame& game, int player,
                       const MixedStrategy& x1, const MixedStrategy& x2);

// |E_{x1}[c] - E_{x2}[c]|: the degree of free-riding of a strategy pair.
double FreeRidingDegree(const FiniteCollabGame& game, const MixedStrategy& x1,
                        const MixedStrategy& x2);

// The 2x2 coordination game: R = 1 unless both defect, collaboration costs
// 0.4. Action 0 = collaborate, action 1 = defect.
FiniteCollabGame MakeExampleCoordinationGame();

// Two robots pushing an object to a_bar: shared reward -1/2 (a1+a2-abar)^2,
// cost 1/2 a_i^2. Stored in target form with Qbar = 1, rho = (1, 1).
QuadraticAggregativeGame MakeExampleForceGame(double a_bar);

}  // namespace rqelab

#endif  // RQELAB_GAMES_H_
