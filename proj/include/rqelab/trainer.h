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

#ifndef RQELAB_TRAINER_H_
#define RQELAB_TRAINER_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rqelab/gridworld.h"
#include "rqelab/io_util.h"
#include "rqelab/rng.h"

// IPPO baseline and SRPO trainers over tabular-softmax policies with
// analytic gradients. No autodiff: the observation space is small enough
// for exact tables, which keeps every gradient checkable against finite
// differences.

namespace rqelab {

// Per-observation softmax policy over a discrete action set.
struct PolicyTable {
  int num_obs = 0;
  int num_actions = 0;
  std::vector<double> logits;  // row-major

  static PolicyTable Zeros(int num_obs, int num_actions) {
    PolicyTable t;
    t.num_obs = num_obs;
    t.num_actions = num_actions;
    t.logits.assign(static_cast<size_t>(num_obs) * num_actions, 0.0);
    return t;
  }
  std::span<const double> Row(int obs) const {
    return std::span<const double>(logits).subspan(
        static_cast<size_t>(obs) * num_actions, num_actions);
  }
  // Softmax of one row into out[num_actions].
  void ProbsInto(int obs, double* out) const;
  int Sample(int obs, Rng& rng, double* logp) const;
  double LogProb(int obs, int action) const;
  double Entropy(int obs) const;
  double KlTo(const PolicyTable& other, int obs) const;
};

// Per-observation state-value estimates.
struct ValueTable {
  std::vector<double> values;
  static ValueTable Zeros(int num_obs) {
    ValueTable t;
    t.values.assign(num_obs, 0.0);
    return t;
  }
};

// Dense gradient accumulator that remembers which rows were touched.
struct GradTable {
  int num_obs = 0;
  int num_actions = 0;
  std::vector<double> g;
  std::vector<int> touched;
  std::vector<char> touched_flag;

  static GradTable Zeros(int num_obs, int num_actions);
  void Accumulate(int obs, int action, double value);
  void Reset();
};

struct TrainerConfig {
  double gamma = 0.95;
  double gae_lambda = 0.95;
  double clip_range = 0.2;  // PPO clipping width
  double lr_policy = 0.05;
  double lr_adversary = 0.05;
  double lr_critic = 0.1;
  int epochs_per_update = 4;
  int minibatches = 4;
  int rollout_len = 1024;
  long total_steps = 200000;  // environment interactions, exact
  double entropy_coef = 0.1;  // bounded-rationality eps
  double tau = 0.0;           // 0 disables the adversary (= IPPO)
  std::uint64_t seed = 0;

  void Validate() const;
  std::string ToJsonString() const;
  static TrainerConfig FromJsonString(const std::string& text);
  std::uint64_t Hash() const { return HashConfigText(ToJsonString()); }
};

// Joint rollout storage; column [slot] holds the acting policy's view of
// env slot 0/1.
struct RolloutBatch {
  std::vector<std::array<int, 2>> obs;
  std::vector<std::array<int, 2>> act;
  std::vector<std::array<double, 2>> logp_old;
  std::vector<std::array<double, 2>> reward;
  std::vector<double> shared;
  std::vector<std::array<double, 2>> priv;
  std::vector<std::uint8_t> done;
  std::array<int, 2> final_obs = {0, 0};

  std::vector<std::array<double, 2>> value;
  std::vector<std::array<double, 2>> advantage;
  std::vector<std::array<double, 2>> ret;

  int size() const { return static_cast<int>(obs.size()); }
};

class TrainDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `steps` environment steps with the two slot policies (each acting on
// its egocentric observation), resetting at episode boundaries. Action draws
// come from `rng`; environment stochasticity from the env's own stream.
RolloutBatch CollectRollout(GridworldEnv& env, const PolicyTable& policy_slot0,
                            const PolicyTable& policy_slot1, int steps,
                            Rng& rng);

// Fills value/advantage/return columns for `slot` from the critic.
// Advantages are normalized to zero mean, unit variance (sigma floor 1e-8)
// unless `normalize` is false; returns are computed before normalization.
void GaeAdvantages(RolloutBatch& batch, int slot, const ValueTable& critic,
                   double gamma, double lambda, bool normalize = true);

struct LossResult {
  double loss = 0.0;
  GradTable grad;
};

// E_t[min(r_t A_t, clip(r_t, 1-d, 1+d) A_t)] with the importance ratio of
// `policy` against the stored old log-probs of `slot`; gradient over the
// policy logits is zero where the clipped branch is active and binding.
// `subset` selects minibatch indices (nullptr = whole batch).
LossResult ClippedSurrogateLoss(const RolloutBatch& batch, int slot,
                                const PolicyTable& policy, double clip_range,
                                const std::vector<int>* subset = nullptr);

// Clipped surrogate plus the entropy bonus -eps * mean H(policy(o_t)).
LossResult SrpoAgentLoss(const RolloutBatch& batch, int slot,
                         const PolicyTable& policy, double entropy_coef,
                         double clip_range,
                         const std::vector<int>* subset = nullptr);

// Adversary objective (to be ascended): the clipped surrogate of the
// *negated* agent advantages under the adversary's own ratio, minus
// (1/tau) mean KL(adversary row, partner row) over visited observations.
// Per-term log-ratios are clamped at kKlLogClamp to keep the pull finite.
LossResult SrpoAdversaryLoss(const RolloutBatch& batch, int adv_slot,
                             int agent_slot, const PolicyTable& adv_policy,
                             const PolicyTable& partner_policy, double tau,
                             double clip_range,
                             const std::vector<int>* subset = nullptr);

inline constexpr double kKlLogClamp = 1e3;

// Scalar joint objective L_CLIP + (1/tau) KL - eps H(theta). The clip uses
// the product ratio r_theta * r_phi, so at the collection snapshot it
// reduces exactly to the agent loss plus the KL penalty.
double JointLoss(const RolloutBatch& batch, int agent_slot,
                 const PolicyTable& theta, const PolicyTable& phi,
                 const PolicyTable& theta_partner, double tau,
                 double entropy_coef, double clip_range);

// Mean squared error of the critic against the return column of `slot`.
struct CriticLossResult {
  double loss = 0.0;
  std::vector<int> touched;
  std::vector<double> grad;  // dense over observations
};
CriticLossResult CriticLoss(const RolloutBatch& batch, int slot,
                            const ValueTable& critic,
                            const std::vector<int>* subset = nullptr);

struct CurvePoint {
  long step = 0;
  double mean_return = 0.0;    // per-agent episodic return
  double shared_return = 0.0;  // episodic shared-event total
  std::array<double, 2> private_cost = {0.0, 0.0};  // episodic, >= 0
  double kl_adv = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  std::array<PolicyTable, 2> policies;
  std::array<PolicyTable, 2> adversaries;  // SRPO only
  std::array<ValueTable, 2> critics;
  std::vector<CurvePoint> curve;
  long env_steps = 0;
};

// Independent PPO: both agents learn from the same shared-env rollouts.
TrainResult TrainIppo(const TrainerConfig& config, const GridConfig& env_config);

// SRPO: each agent collects rollouts against its own KL-anchored adversary
// (warm-started from the partner each iteration) and never sees the real
// partner during training. Requires tau > 0.
TrainResult TrainSrpo(const TrainerConfig& config, const GridConfig& env_config);

void WriteCurveCsv(std::ostream& os, const std::vector<CurvePoint>& curve,
                   std::uint64_t config_hash);

// Checkpoint round-trip for one trained team.
Checkpoint TeamToCheckpoint(const TrainResult& result,
                            std::uint64_t config_hash, bool with_adversaries);
void TeamFromCheckpoint(const Checkpoint& ckpt, TrainResult* result);

}  // namespace rqelab

#endif  // RQELAB_TRAINER_H_
