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

#ifndef RQELAB_MARKOV_GAME_H_
#define RQELAB_MARKOV_GAME_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rqelab/games.h"

// Exact tabular lab for the risk-adjusted Markov-game quantities: value/Q
// evaluation by linear solves, discounted visitation, score-function policy
// gradients, and performance-difference identities. Everything here is
// closed-form dynamic programming; the trainer does the sample-based work.

namespace rqelab {

// Two-player finite Markov game. The per-player value includes the per-state
// regularizers (1/tau_i) KL(p_i, pi_{-i}) - eps_i H(pi_i): the player
// maximizes it, the adversary p_i minimizes it.
struct TabularMarkovGame {
  int num_states = 0;
  std::array<int, 2> num_actions = {0, 0};
  // P(s' | s, a1, a2), indexed ((s * A1 + a1) * A2 + a2) * S + s'.
  std::vector<double> transition;
  // r_i(s, a1, a2) in [0, 1], indexed (s * A1 + a1) * A2 + a2.
  std::array<std::vector<double>, 2> rewards;
  double gamma = 0.9;
  std::vector<double> rho0;

  int JointIndex(int s, int a1, int a2) const {
    return (s * num_actions[0] + a1) * num_actions[1] + a2;
  }
  void Validate() const;
};

// pi[i]: player i's own per-state policy (rows of length A_i).
// adv[i]: player i's adversary over the opponent's actions (rows A_{1-i}).
struct TabularPolicyPair {
  std::array<std::vector<double>, 2> pi;
  std::array<std::vector<double>, 2> adv;

  std::span<const double> PiRow(const TabularMarkovGame& mg, int player,
                                int s) const {
    return std::span<const double>(pi[player]).subspan(s * mg.num_actions[player],
                                                       mg.num_actions[player]);
  }
  std::span<const double> AdvRow(const TabularMarkovGame& mg, int player,
                                 int s) const {
    int opp = 1 - player;
    return std::span<const double>(adv[player]).subspan(s * mg.num_actions[opp],
                                                        mg.num_actions[opp]);
  }
  void Validate(const TabularMarkovGame& mg) const;
};

struct ValueResult {
  std::vector<double> value;  // per state; +inf sentinel rows when !ok
  bool ok = true;             // false on adversary support violation
};

struct QResult {
  std::vector<double> q;  // (s, a1, a2) tensor, same indexing as rewards
  bool ok = true;
};

// Exact solve of (I - gamma P^{pi_i, p_i}) V = rbar where rbar folds in the
// expected reward and both per-state regularizers.
ValueResult RiskAdjustedValue(const TabularMarkovGame& mg,
                              const TabularPolicyPair& pols, int player,
                              const RiskProfile& profile);

// Q(s, a) = r_i(s, a) + gamma E_{s'} V(s').
QResult QFunction(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                  int player, const RiskProfile& profile);

// d(x) = (1 - gamma) sum_t gamma^t Pr(s_t = x) under player i's pair
// (pi_i, p_i), started from `start` (a distribution over states).
std::vector<double> DiscountedVisitation(const TabularMarkovGame& mg,
                                         const TabularPolicyPair& pols,
                                         int player,
                                         std::span<const double> start);
std::vector<double> DiscountedVisitation(const TabularMarkovGame& mg,
                                         const TabularPolicyPair& pols,
                                         int player, int s0);

// Exact gradient of E_{s0 ~ start}[V_i(s0)] with respect to per-state
// softmax logits of pi_i (score-function form, evaluated in closed form).
std::vector<double> PolicyGradientPi(const TabularMarkovGame& mg,
                                     const TabularPolicyPair& pols, int player,
                                     const RiskProfile& profile,
                                     std::span<const double> start);

// Same for the adversary logits of p_i; the KL partial enters with +1/tau.
std::vector<double> PolicyGradientP(const TabularMarkovGame& mg,
                                    const TabularPolicyPair& pols, int player,
                                    const RiskProfile& profile,
                                    std::span<const double> start);

// Performance-difference identity residuals: both sides evaluated exactly,
// max |LHS - RHS| over start states. pi_alt / p_alt play the primed policy.
double PdlCheckPi(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                  int player, const RiskProfile& profile,
                  const std::vector<double>& pi_alt);
double PdlCheckP(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                 int player, const RiskProfile& profile,
                 const std::vector<double>& p_alt);

// Random instances for verification sweeps.
TabularMarkovGame RandomMarkovGame(std::uint64_t seed, int max_states = 4,
                                   int max_actions = 3, double max_gamma = 0.9);
TabularPolicyPair RandomPolicyPair(const TabularMarkovGame& mg,
                                   std::uint64_t seed);

// Central-finite-difference comparison of both analytic gradients against
// the exact value, plus both PDL residuals, per random instance.
struct GradientCheck {
  std::uint64_t instance_seed = 0;
  double rel_err_pi = 0.0;
  double rel_err_p = 0.0;
  double pdl_residual_pi = 0.0;
  double pdl_residual_p = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<GradientCheck> checks;
  double max_rel_err_pi = 0.0;
  double max_rel_err_p = 0.0;
  double max_pdl_residual_pi = 0.0;
  double max_pdl_residual_p = 0.0;
  bool pass = false;
};

// Runs `n_instances` random instances. `inject_sign_flip` is a negative
// control that corrupts one analytic gradient entry before comparing.
VerifyReport RunGradientVerification(int n_instances, std::uint64_t seed,
                                     double rel_tol = 1e-4,
                                     double pdl_tol = 1e-8,
                                     bool inject_sign_flip = false);

std::string VerifyReportToJson(const VerifyReport& report);

}  // namespace rqelab

#endif  // RQELAB_MARKOV_GAME_H_
