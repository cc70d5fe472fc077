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

#include "rqelab/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "rqelab/risk.h"

namespace rqelab {

namespace {

constexpr double kAdvSigmaFloor = 1e-8;

double LogSumExpRow(std::span<const double> row) {
  double top = row[0];
  for (double v : row) top = std::max(top, v);
  double mass = 0.0;
  for (double v : row) mass += std::exp(v - top);
  return top + std::log(mass);
}

void CheckFiniteLoss(double loss) {
  if (!std::isfinite(loss)) {
    throw TrainDivergenceError("loss diverged (non-finite)");
  }
}

}  // namespace

void PolicyTable::ProbsInto(int obs, double* out) const {
  auto row = Row(obs);
  double lse = LogSumExpRow(row);
  for (int a = 0; a < num_actions; ++a) out[a] = std::exp(row[a] - lse);
}

int PolicyTable::Sample(int obs, Rng& rng, double* logp) const {
  auto row = Row(obs);
  double lse = LogSumExpRow(row);
  double u = UniformDouble(rng);
  double acc = 0.0;
  int action = num_actions - 1;
  for (int a = 0; a < num_actions; ++a) {
    acc += std::exp(row[a] - lse);
    if (u < acc) {
      action = a;
      break;
    }
  }
  if (logp != nullptr) *logp = row[action] - lse;
  return action;
}

double PolicyTable::LogProb(int obs, int action) const {
  auto row = Row(obs);
  return row[action] - LogSumExpRow(row);
}

double PolicyTable::Entropy(int obs) const {
  auto row = Row(obs);
  double lse = LogSumExpRow(row);
  double ent = 0.0;
  for (int a = 0; a < num_actions; ++a) {
    double logp = row[a] - lse;
    ent -= std::exp(logp) * logp;
  }
  return ent;
}

double PolicyTable::KlTo(const PolicyTable& other, int obs) const {
  auto row = Row(obs);
  auto orow = other.Row(obs);
  double lse = LogSumExpRow(row);
  double olse = LogSumExpRow(orow);
  double kl = 0.0;
  for (int a = 0; a < num_actions; ++a) {
    double logp = row[a] - lse;
    double logq = orow[a] - olse;
    kl += std::exp(logp) * std::min(logp - logq, kKlLogClamp);
  }
  return std::max(kl, 0.0);
}

GradTable GradTable::Zeros(int num_obs, int num_actions) {
  GradTable t;
  t.num_obs = num_obs;
  t.num_actions = num_actions;
  t.g.assign(static_cast<size_t>(num_obs) * num_actions, 0.0);
  t.touched_flag.assign(num_obs, 0);
  return t;
}

void GradTable::Accumulate(int obs, int action, double value) {
  g[static_cast<size_t>(obs) * num_actions + action] += value;
  if (!touched_flag[obs]) {
    touched_flag[obs] = 1;
    touched.push_back(obs);
  }
}

void GradTable::Reset() {
  for (int obs : touched) {
    touched_flag[obs] = 0;
    std::fill_n(g.begin() + static_cast<size_t>(obs) * num_actions,
                num_actions, 0.0);
  }
  touched.clear();
}

void TrainerConfig::Validate() const {
  if (!(clip_range > 0.0)) throw std::invalid_argument("clip_range must be > 0");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae_lambda must be in [0, 1]");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must be in [0, 1)");
  }
  if (rollout_len <= 0 || total_steps <= 0 || epochs_per_update <= 0 ||
      minibatches <= 0) {
    throw std::invalid_argument("counts must be positive");
  }
  if (!(entropy_coef >= 0.0) || !(tau >= 0.0)) {
    throw std::invalid_argument("entropy_coef and tau must be >= 0");
  }
}

std::string TrainerConfig::ToJsonString() const {
  nlohmann::json j;
  j["gamma"] = gamma;
  j["gae_lambda"] = gae_lambda;
  j["clip_range"] = clip_range;
  j["lr_policy"] = lr_policy;
  j["lr_adversary"] = lr_adversary;
  j["lr_critic"] = lr_critic;
  j["epochs_per_update"] = epochs_per_update;
  j["minibatches"] = minibatches;
  j["rollout_len"] = rollout_len;
  j["total_steps"] = total_steps;
  j["entropy_coef"] = entropy_coef;
  j["tau"] = tau;
  j["seed"] = seed;
  return j.dump(2);
}

TrainerConfig TrainerConfig::FromJsonString(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TrainerConfig c;
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.clip_range = j.value("clip_range", c.clip_range);
  c.lr_policy = j.value("lr_policy", c.lr_policy);
  c.lr_adversary = j.value("lr_adversary", c.lr_adversary);
  c.lr_critic = j.value("lr_critic", c.lr_critic);
  c.epochs_per_update = j.value("epochs_per_update", c.epochs_per_update);
  c.minibatches = j.value("minibatches", c.minibatches);
  c.rollout_len = j.value("rollout_len", c.rollout_len);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.tau = j.value("tau", c.tau);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

RolloutBatch CollectRollout(GridworldEnv& env, const PolicyTable& policy_slot0,
                            const PolicyTable& policy_slot1, int steps,
                            Rng& rng) {
  RolloutBatch batch;
  batch.obs.reserve(steps);
  const GridConfig& config = env.config();
  for (int t = 0; t < steps; ++t) {
    if (env.Done()) env.Reset();
    const GridState& s = env.state();
    int obs0 = EncodeObservationFor(config, s, 0);
    int obs1 = EncodeObservationFor(config, s, 1);
    double lp0 = 0.0, lp1 = 0.0;
    int a0 = policy_slot0.Sample(obs0, rng, &lp0);
    int a1 = policy_slot1.Sample(obs1, rng, &lp1);
    StepOutcome out = env.Step(static_cast<Move>(a0), static_cast<Move>(a1));
    batch.obs.push_back({obs0, obs1});
    batch.act.push_back({a0, a1});
    batch.logp_old.push_back({lp0, lp1});
    batch.reward.push_back({out.reward[0], out.reward[1]});
    batch.shared.push_back(out.shared);
    batch.priv.push_back({out.private_part[0], out.private_part[1]});
    batch.done.push_back(env.Done() ? 1 : 0);
  }
  batch.final_obs = {EncodeObservationFor(config, env.state(), 0),
                     EncodeObservationFor(config, env.state(), 1)};
  batch.value.assign(batch.size(), {0.0, 0.0});
  batch.advantage.assign(batch.size(), {0.0, 0.0});
  batch.ret.assign(batch.size(), {0.0, 0.0});
  return batch;
}

void GaeAdvantages(RolloutBatch& batch, int slot, const ValueTable& critic,
                   double gamma, double lambda, bool normalize) {
  int n = batch.size();
  for (int t = 0; t < n; ++t) {
    batch.value[t][slot] = critic.values[batch.obs[t][slot]];
  }
  double bootstrap = critic.values[batch.final_obs[slot]];
  double acc = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double nonterm = batch.done[t] ? 0.0 : 1.0;
    double next_v = t == n - 1 ? bootstrap : batch.value[t + 1][slot];
    double delta =
        batch.reward[t][slot] + gamma * next_v * nonterm - batch.value[t][slot];
    acc = delta + gamma * lambda * nonterm * acc;
    batch.advantage[t][slot] = acc;
    batch.ret[t][slot] = acc + batch.value[t][slot];
  }
  if (!normalize) return;
  double mean = 0.0;
  for (int t = 0; t < n; ++t) mean += batch.advantage[t][slot];
  mean /= n;
  double var = 0.0;
  for (int t = 0; t < n; ++t) {
    double d = batch.advantage[t][slot] - mean;
    var += d * d;
  }
  double sigma = std::max(std::sqrt(var / n), kAdvSigmaFloor);
  for (int t = 0; t < n; ++t) {
    batch.advantage[t][slot] = (batch.advantage[t][slot] - mean) / sigma;
  }
}

namespace {

// Shared clipped-surrogate core: advantage column `adv_slot` scaled by
// `adv_sign`, actor columns `slot`.
LossResult ClippedCore(const RolloutBatch& batch, int slot, int adv_slot,
                       double adv_sign, const PolicyTable& policy,
                       double clip_range, const std::vector<int>* subset) {
  LossResult result;
  result.grad = GradTable::Zeros(policy.num_obs, policy.num_actions);
  std::vector<int> all;
  if (subset == nullptr) {
    all.resize(batch.size());
    std::iota(all.begin(), all.end(), 0);
    subset = &all;
  }
  int n = static_cast<int>(subset->size());
  if (n == 0) return result;
  std::vector<double> probs(policy.num_actions);
  for (int t : *subset) {
    int obs = batch.obs[t][slot];
    int act = batch.act[t][slot];
    double adv = adv_sign * batch.advantage[t][adv_slot];
    policy.ProbsInto(obs, probs.data());
    double logp = std::log(std::max(probs[act], kProbFloor));
    double ratio = std::exp(logp - batch.logp_old[t][slot]);
    double clipped = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range);
    double surr1 = ratio * adv;
    double surr2 = clipped * adv;
    result.loss += std::min(surr1, surr2);
    if (surr1 <= surr2) {
      // d(ratio * adv)/d logits = adv * ratio * (e_act - probs).
      double scale = adv * ratio / n;
      for (int b = 0; b < policy.num_actions; ++b) {
        double indicator = b == act ? 1.0 : 0.0;
        result.grad.Accumulate(obs, b, scale * (indicator - probs[b]));
      }
    }
  }
  result.loss /= n;
  return result;
}

void AccumulateEntropyBonus(const RolloutBatch& batch, int slot,
                            const PolicyTable& policy, double coef,
                            const std::vector<int>& idx, LossResult* result) {
  if (coef == 0.0) return;
  int n = static_cast<int>(idx.size());
  std::vector<double> probs(policy.num_actions);
  for (int t : idx) {
    int obs = batch.obs[t][slot];
    policy.ProbsInto(obs, probs.data());
    double neg_ent = 0.0;
    for (int b = 0; b < policy.num_actions; ++b) {
      neg_ent += probs[b] * std::log(std::max(probs[b], kProbFloor));
    }
    result->loss -= coef * neg_ent / n;
    // d(-neg_ent)/d logits_b = -p_b (log p_b - neg_ent).
    for (int b = 0; b < policy.num_actions; ++b) {
      double logp = std::log(std::max(probs[b], kProbFloor));
      result->grad.Accumulate(obs, b,
                              -coef * probs[b] * (logp - neg_ent) / n);
    }
  }
}

std::vector<int> AllIndices(const RolloutBatch& batch) {
  std::vector<int> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

LossResult ClippedSurrogateLoss(const RolloutBatch& batch, int slot,
                                const PolicyTable& policy, double clip_range,
                                const std::vector<int>* subset) {
  return ClippedCore(batch, slot, slot, 1.0, policy, clip_range, subset);
}

LossResult SrpoAgentLoss(const RolloutBatch& batch, int slot,
                         const PolicyTable& policy, double entropy_coef,
                         double clip_range, const std::vector<int>* subset) {
  std::vector<int> all;
  if (subset == nullptr) {
    all = AllIndices(batch);
    subset = &all;
  }
  LossResult result =
      ClippedCore(batch, slot, slot, 1.0, policy, clip_range, subset);
  AccumulateEntropyBonus(batch, slot, policy, entropy_coef, *subset, &result);
  return result;
}

LossResult SrpoAdversaryLoss(const RolloutBatch& batch, int adv_slot,
                             int agent_slot, const PolicyTable& adv_policy,
                             const PolicyTable& partner_policy, double tau,
                             double clip_range, const std::vector<int>* subset) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  std::vector<int> all;
  if (subset == nullptr) {
    all = AllIndices(batch);
    subset = &all;
  }
  // The adversary minimizes the agent's surrogate return: standard clipped
  // ascent on the negated advantages.
  LossResult result = ClippedCore(batch, adv_slot, agent_slot, -1.0,
                                  adv_policy, clip_range, subset);
  int n = static_cast<int>(subset->size());
  int na = adv_policy.num_actions;
  std::vector<double> probs(na), anchor(na), lratio(na);
  for (int t : *subset) {
    int obs = batch.obs[t][adv_slot];
    adv_policy.ProbsInto(obs, probs.data());
    partner_policy.ProbsInto(obs, anchor.data());
    double kl = 0.0;
    for (int b = 0; b < na; ++b) {
      lratio[b] = std::min(std::log(std::max(probs[b], kProbFloor)) -
                               std::log(std::max(anchor[b], kProbFloor)),
                           kKlLogClamp);
      kl += probs[b] * lratio[b];
    }
    result.loss -= kl / (tau * n);
    for (int b = 0; b < na; ++b) {
      // d KL / d logits_b = p_b (lratio_b - KL).
      result.grad.Accumulate(obs, b,
                             -probs[b] * (lratio[b] - kl) / (tau * n));
    }
  }
  return result;
}

double JointLoss(const RolloutBatch& batch, int agent_slot,
                 const PolicyTable& theta, const PolicyTable& phi,
                 const PolicyTable& theta_partner, double tau,
                 double entropy_coef, double clip_range) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  int adv_slot = 1 - agent_slot;
  int n = batch.size();
  double loss = 0.0;
  for (int t = 0; t < n; ++t) {
    double ratio = std::exp(theta.LogProb(batch.obs[t][agent_slot],
                                          batch.act[t][agent_slot]) -
                            batch.logp_old[t][agent_slot]) *
                   std::exp(phi.LogProb(batch.obs[t][adv_slot],
                                        batch.act[t][adv_slot]) -
                            batch.logp_old[t][adv_slot]);
    double adv = batch.advantage[t][agent_slot];
    double clipped = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range);
    loss += std::min(ratio * adv, clipped * adv) / n;
    loss += phi.KlTo(theta_partner, batch.obs[t][adv_slot]) / (tau * n);
    loss += entropy_coef * theta.Entropy(batch.obs[t][agent_slot]) / n;
  }
  return loss;
}

CriticLossResult CriticLoss(const RolloutBatch& batch, int slot,
                            const ValueTable& critic,
                            const std::vector<int>* subset) {
  CriticLossResult result;
  result.grad.assign(critic.values.size(), 0.0);
  std::vector<int> all;
  if (subset == nullptr) {
    all = AllIndices(batch);
    subset = &all;
  }
  int n = static_cast<int>(subset->size());
  if (n == 0) return result;
  std::vector<char> seen(critic.values.size(), 0);
  for (int t : *subset) {
    int obs = batch.obs[t][slot];
    double err = critic.values[obs] - batch.ret[t][slot];
    result.loss += err * err / n;
    result.grad[obs] += 2.0 * err / n;
    if (!seen[obs]) {
      seen[obs] = 1;
      result.touched.push_back(obs);
    }
  }
  return result;
}

namespace {

struct EpisodeStats {
  double mean_return = 0.0;
  double shared_return = 0.0;
  std::array<double, 2> private_cost = {0.0, 0.0};
};

// Per-episode sums over the completed episodes of a batch (the whole batch
// counts as one episode if no done flag is present).
EpisodeStats BatchEpisodeStats(const RolloutBatch& batch) {
  EpisodeStats stats;
  int episodes = 0;
  double ret = 0.0, shared = 0.0;
  std::array<double, 2> cost = {0.0, 0.0};
  for (int t = 0; t < batch.size(); ++t) {
    ret += 0.5 * (batch.reward[t][0] + batch.reward[t][1]);
    shared += batch.shared[t];
    cost[0] -= batch.priv[t][0];
    cost[1] -= batch.priv[t][1];
    if (batch.done[t]) {
      stats.mean_return += ret;
      stats.shared_return += shared;
      stats.private_cost[0] += cost[0];
      stats.private_cost[1] += cost[1];
      ++episodes;
      ret = shared = 0.0;
      cost = {0.0, 0.0};
    }
  }
  if (episodes == 0) {
    stats.mean_return = ret;
    stats.shared_return = shared;
    stats.private_cost = cost;
    episodes = 1;
  }
  stats.mean_return /= episodes;
  stats.shared_return /= episodes;
  stats.private_cost[0] /= episodes;
  stats.private_cost[1] /= episodes;
  return stats;
}

double MeanEntropyOverBatch(const RolloutBatch& batch, int slot,
                            const PolicyTable& policy) {
  if (batch.size() == 0) return 0.0;
  double acc = 0.0;
  for (int t = 0; t < batch.size(); ++t) {
    acc += policy.Entropy(batch.obs[t][slot]);
  }
  return acc / batch.size();
}

double MeanKlOverBatch(const RolloutBatch& batch, int slot,
                       const PolicyTable& policy, const PolicyTable& anchor) {
  if (batch.size() == 0) return 0.0;
  double acc = 0.0;
  for (int t = 0; t < batch.size(); ++t) {
    acc += policy.KlTo(anchor, batch.obs[t][slot]);
  }
  return acc / batch.size();
}

std::vector<std::vector<int>> Minibatches(int n, int count, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates with the explicit uniform draw.
  for (int i = n - 1; i > 0; --i) {
    int j = UniformInt(rng, i + 1);
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<int>> out(count);
  for (int i = 0; i < n; ++i) out[i % count].push_back(perm[i]);
  return out;
}

void ApplyPolicyGrad(PolicyTable& policy, const GradTable& grad, double lr) {
  for (int obs : grad.touched) {
    size_t base = static_cast<size_t>(obs) * policy.num_actions;
    for (int a = 0; a < policy.num_actions; ++a) {
      policy.logits[base + a] += lr * grad.g[base + a];
    }
  }
}

void ApplyCriticGrad(ValueTable& critic, const CriticLossResult& grad,
                     double lr) {
  for (int obs : grad.touched) {
    critic.values[obs] -= lr * grad.grad[obs];
  }
}

}  // namespace

TrainResult TrainIppo(const TrainerConfig& config, const GridConfig& env_config) {
  config.Validate();
  env_config.Validate();
  int num_obs = ObservationCount(env_config);
  TrainResult result;
  for (int i = 0; i < 2; ++i) {
    result.policies[i] = PolicyTable::Zeros(num_obs, kNumMoves);
    result.critics[i] = ValueTable::Zeros(num_obs);
  }
  GridworldEnv env(env_config, DeriveSeed(config.seed, 1));
  Rng act_rng(DeriveSeed(config.seed, 2));
  Rng update_rng(DeriveSeed(config.seed, 3));

  long steps_done = 0;
  while (steps_done < config.total_steps) {
    int take = static_cast<int>(
        std::min<long>(config.rollout_len, config.total_steps - steps_done));
    RolloutBatch batch =
        CollectRollout(env, result.policies[0], result.policies[1], take, act_rng);
    steps_done += take;
    for (int slot = 0; slot < 2; ++slot) {
      GaeAdvantages(batch, slot, result.critics[slot], config.gamma,
                    config.gae_lambda);
    }
    for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
      auto chunks = Minibatches(batch.size(), config.minibatches, update_rng);
      for (const auto& idx : chunks) {
        if (idx.empty()) continue;
        for (int slot = 0; slot < 2; ++slot) {
          LossResult agent =
              SrpoAgentLoss(batch, slot, result.policies[slot],
                            config.entropy_coef, config.clip_range, &idx);
          CheckFiniteLoss(agent.loss);
          ApplyPolicyGrad(result.policies[slot], agent.grad, config.lr_policy);
          CriticLossResult critic =
              CriticLoss(batch, slot, result.critics[slot], &idx);
          CheckFiniteLoss(critic.loss);
          ApplyCriticGrad(result.critics[slot], critic, config.lr_critic);
        }
      }
    }
    EpisodeStats stats = BatchEpisodeStats(batch);
    CurvePoint point;
    point.step = steps_done;
    point.mean_return = stats.mean_return;
    point.shared_return = stats.shared_return;
    point.private_cost = stats.private_cost;
    point.kl_adv = 0.0;
    point.entropy = 0.5 * (MeanEntropyOverBatch(batch, 0, result.policies[0]) +
                           MeanEntropyOverBatch(batch, 1, result.policies[1]));
    result.curve.push_back(point);
  }
  result.env_steps = steps_done;
  return result;
}

TrainResult TrainSrpo(const TrainerConfig& config, const GridConfig& env_config) {
  config.Validate();
  env_config.Validate();
  if (!(config.tau > 0.0)) {
    throw std::invalid_argument("SRPO needs tau > 0 (use the IPPO trainer)");
  }
  int num_obs = ObservationCount(env_config);
  TrainResult result;
  for (int i = 0; i < 2; ++i) {
    result.policies[i] = PolicyTable::Zeros(num_obs, kNumMoves);
    result.adversaries[i] = PolicyTable::Zeros(num_obs, kNumMoves);
    result.critics[i] = ValueTable::Zeros(num_obs);
  }
  std::array<GridworldEnv, 2> envs = {
      GridworldEnv(env_config, DeriveSeed(config.seed, 11)),
      GridworldEnv(env_config, DeriveSeed(config.seed, 12))};
  std::array<Rng, 2> act_rngs = {Rng(DeriveSeed(config.seed, 21)),
                                 Rng(DeriveSeed(config.seed, 22))};
  Rng update_rng(DeriveSeed(config.seed, 31));

  long steps_done = 0;
  while (steps_done < config.total_steps) {
    CurvePoint point;
    double ret_acc = 0.0, shared_acc = 0.0, kl_acc = 0.0, ent_acc = 0.0;
    int agents_run = 0;
    for (int i = 0; i < 2 && steps_done < config.total_steps; ++i) {
      int partner = 1 - i;
      // Warm start: the adversary impersonates the current partner.
      result.adversaries[i].logits = result.policies[partner].logits;
      int take = static_cast<int>(
          std::min<long>(config.rollout_len, config.total_steps - steps_done));
      int agent_slot = i;
      int adv_slot = partner;
      const PolicyTable& slot0 =
          i == 0 ? result.policies[0] : result.adversaries[1];
      const PolicyTable& slot1 =
          i == 0 ? result.adversaries[0] : result.policies[1];
      RolloutBatch batch = CollectRollout(envs[i], slot0, slot1, take, act_rngs[i]);
      steps_done += take;
      GaeAdvantages(batch, agent_slot, result.critics[i], config.gamma,
                    config.gae_lambda);
      for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
        auto chunks = Minibatches(batch.size(), config.minibatches, update_rng);
        for (const auto& idx : chunks) {
          if (idx.empty()) continue;
          LossResult agent =
              SrpoAgentLoss(batch, agent_slot, result.policies[i],
                            config.entropy_coef, config.clip_range, &idx);
          CheckFiniteLoss(agent.loss);
          ApplyPolicyGrad(result.policies[i], agent.grad, config.lr_policy);
          LossResult adversary = SrpoAdversaryLoss(
              batch, adv_slot, agent_slot, result.adversaries[i],
              result.policies[partner], config.tau, config.clip_range, &idx);
          CheckFiniteLoss(adversary.loss);
          ApplyPolicyGrad(result.adversaries[i], adversary.grad,
                          config.lr_adversary);
          CriticLossResult critic =
              CriticLoss(batch, agent_slot, result.critics[i], &idx);
          CheckFiniteLoss(critic.loss);
          ApplyCriticGrad(result.critics[i], critic, config.lr_critic);
        }
      }
      EpisodeStats stats = BatchEpisodeStats(batch);
      ret_acc += stats.mean_return;
      shared_acc += stats.shared_return;
      point.private_cost[i] = stats.private_cost[agent_slot];
      kl_acc += MeanKlOverBatch(batch, adv_slot, result.adversaries[i],
                                result.policies[partner]);
      ent_acc += MeanEntropyOverBatch(batch, agent_slot, result.policies[i]);
      ++agents_run;
    }
    point.step = steps_done;
    point.mean_return = ret_acc / agents_run;
    point.shared_return = shared_acc / agents_run;
    point.kl_adv = kl_acc / agents_run;
    point.entropy = ent_acc / agents_run;
    result.curve.push_back(point);
  }
  result.env_steps = steps_done;
  return result;
}

void WriteCurveCsv(std::ostream& os, const std::vector<CurvePoint>& curve,
                   std::uint64_t config_hash) {
  WriteCsvPreamble(os, config_hash);
  os << "step,mean_return,shared_return,private_cost_1,private_cost_2,"
        "kl_adv,entropy\n";
  for (const auto& p : curve) {
    os << p.step << "," << FormatDouble(p.mean_return) << ","
       << FormatDouble(p.shared_return) << ","
       << FormatDouble(p.private_cost[0]) << ","
       << FormatDouble(p.private_cost[1]) << "," << FormatDouble(p.kl_adv)
       << "," << FormatDouble(p.entropy) << "\n";
  }
}

Checkpoint TeamToCheckpoint(const TrainResult& result,
                            std::uint64_t config_hash, bool with_adversaries) {
  Checkpoint ckpt;
  ckpt.config_hash = config_hash;
  for (int i = 0; i < 2; ++i) {
    ckpt.Add("policy_" + std::to_string(i), result.policies[i].num_obs,
             result.policies[i].num_actions, result.policies[i].logits);
  }
  for (int i = 0; i < 2; ++i) {
    ckpt.Add("critic_" + std::to_string(i), result.critics[i].values.size(), 1,
             result.critics[i].values);
  }
  if (with_adversaries) {
    for (int i = 0; i < 2; ++i) {
      ckpt.Add("adversary_" + std::to_string(i), result.adversaries[i].num_obs,
               result.adversaries[i].num_actions, result.adversaries[i].logits);
    }
  }
  return ckpt;
}

void TeamFromCheckpoint(const Checkpoint& ckpt, TrainResult* result) {
  for (int i = 0; i < 2; ++i) {
    const auto* policy = ckpt.Find("policy_" + std::to_string(i));
    if (policy == nullptr) throw std::runtime_error("checkpoint missing policy");
    result->policies[i].num_obs = static_cast<int>(policy->rows);
    result->policies[i].num_actions = static_cast<int>(policy->cols);
    result->policies[i].logits = policy->data;
    const auto* critic = ckpt.Find("critic_" + std::to_string(i));
    if (critic != nullptr) result->critics[i].values = critic->data;
    const auto* adv = ckpt.Find("adversary_" + std::to_string(i));
    if (adv != nullptr) {
      result->adversaries[i].num_obs = static_cast<int>(adv->rows);
      result->adversaries[i].num_actions = static_cast<int>(adv->cols);
      result->adversaries[i].logits = adv->data;
    }
  }
}

}  // namespace rqelab
