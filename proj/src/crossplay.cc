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

#include "rqelab/crossplay.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "rqelab/io_util.h"

namespace rqelab {

namespace {

struct PairingResult {
  double mean = 0.0;
  double stddev = 0.0;
  double cost_1 = 0.0;
  double cost_2 = 0.0;
  double cost_gap_se = 0.0;
};

// Plays fixed-length episodes with frozen policies; returns the per-agent
// mean episodic return and cost statistics.
PairingResult EvaluatePairing(const PolicyTable& slot0, const PolicyTable& slot1,
                              const GridConfig& env_config, int episodes,
                              int episode_len, std::uint64_t seed) {
  GridConfig config = env_config;
  config.episode_len = episode_len;
  GridworldEnv env(config, DeriveSeed(seed, 1));
  Rng act_rng(DeriveSeed(seed, 2));
  std::vector<double> returns(episodes, 0.0);
  std::vector<double> gaps(episodes, 0.0);
  PairingResult result;
  for (int e = 0; e < episodes; ++e) {
    env.Reset();
    double ret = 0.0;
    double c1 = 0.0, c2 = 0.0;
    for (int t = 0; t < episode_len; ++t) {
      const GridState& s = env.state();
      int obs0 = EncodeObservationFor(config, s, 0);
      int obs1 = EncodeObservationFor(config, s, 1);
      int a0 = slot0.Sample(obs0, act_rng, nullptr);
      int a1 = slot1.Sample(obs1, act_rng, nullptr);
      StepOutcome out = env.Step(static_cast<Move>(a0), static_cast<Move>(a1));
      ret += 0.5 * (out.reward[0] + out.reward[1]);
      c1 -= out.private_part[0];
      c2 -= out.private_part[1];
    }
    returns[e] = ret;
    gaps[e] = c1 - c2;
    result.cost_1 += c1 / episodes;
    result.cost_2 += c2 / episodes;
  }
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= episodes;
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  result.mean = mean;
  result.stddev = episodes > 1 ? std::sqrt(var / (episodes - 1)) : 0.0;
  double gap_mean = 0.0;
  for (double g : gaps) gap_mean += g;
  gap_mean /= episodes;
  double gap_var = 0.0;
  for (double g : gaps) gap_var += (g - gap_mean) * (g - gap_mean);
  result.cost_gap_se =
      episodes > 1 ? std::sqrt(gap_var / (episodes - 1) / episodes) : 0.0;
  return result;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments MomentsOf(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.stddev = xs.size() > 1 ? std::sqrt(var / (xs.size() - 1)) : 0.0;
  return m;
}

}  // namespace

CrossPlayMatrix CrossPlay(const std::vector<TrainedTeam>& teams,
                          const GridConfig& env_config, int episodes,
                          int episode_len, std::uint64_t seed) {
  int n = static_cast<int>(teams.size());
  if (n == 0) throw std::invalid_argument("no teams to evaluate");
  for (const auto& team : teams) {
    if (team.policies[0].num_obs != ObservationCount(env_config) ||
        team.policies[1].num_obs != ObservationCount(env_config)) {
      throw std::invalid_argument("agent/environment interface mismatch: " +
                                  team.id);
    }
  }
  CrossPlayMatrix matrix;
  matrix.episodes = episodes;
  matrix.episode_len = episode_len;
  matrix.values.assign(static_cast<size_t>(n) * n, 0.0);
  matrix.stds.assign(static_cast<size_t>(n) * n, 0.0);
  for (const auto& team : teams) {
    matrix.agent_ids.push_back(team.id);
    matrix.methods.push_back(team.method);
  }
  ParallelFor(n * n, [&](int cell) {
    int i = cell / n;
    int j = cell % n;
    PairingResult r =
        EvaluatePairing(teams[i].policies[0], teams[j].policies[1], env_config,
                        episodes, episode_len, DeriveSeed(seed, cell));
    matrix.values[cell] = r.mean;
    matrix.stds[cell] = r.stddev;
  });
  return matrix;
}

std::vector<TpCpStats> ComputeTpCpStats(const CrossPlayMatrix& matrix) {
  std::set<std::string> methods(matrix.methods.begin(), matrix.methods.end());
  int n = static_cast<int>(matrix.agent_ids.size());
  std::vector<TpCpStats> stats;
  for (const auto& method : methods) {
    std::vector<double> tp, cp;
    for (int i = 0; i < n; ++i) {
      if (matrix.methods[i] != method) continue;
      for (int j = 0; j < n; ++j) {
        if (matrix.methods[j] != method) continue;
        (i == j ? tp : cp).push_back(matrix.At(i, j));
      }
    }
    TpCpStats row;
    row.method = method;
    Moments tpm = MomentsOf(tp);
    Moments cpm = MomentsOf(cp);
    row.tp_mean = tpm.mean;
    row.tp_std = tpm.stddev;
    row.cp_mean = cp.empty() ? tpm.mean : cpm.mean;
    row.cp_std = cpm.stddev;
    row.drop = row.tp_mean - row.cp_mean;
    stats.push_back(row);
  }
  return stats;
}

FreeRidingProfile EvaluateFreeRiding(const PolicyTable& policy_slot0,
                                     const PolicyTable& policy_slot1,
                                     const GridConfig& env_config, int episodes,
                                     std::uint64_t seed) {
  PairingResult r = EvaluatePairing(policy_slot0, policy_slot1, env_config,
                                    episodes, env_config.episode_len, seed);
  FreeRidingProfile profile;
  profile.cost_1 = r.cost_1;
  profile.cost_2 = r.cost_2;
  profile.fr_degree = std::abs(r.cost_1 - r.cost_2);
  profile.mean_return = r.mean;
  profile.std_error = r.cost_gap_se;
  return profile;
}

double CheckerboardScore(const CrossPlayMatrix& matrix,
                         const std::vector<int>& roles,
                         const std::string& method) {
  int n = static_cast<int>(matrix.agent_ids.size());
  if (roles.size() != static_cast<size_t>(n)) {
    throw std::invalid_argument("roles size mismatch");
  }
  std::vector<double> mixed, same;
  for (int i = 0; i < n; ++i) {
    if (matrix.methods[i] != method) continue;
    for (int j = 0; j < n; ++j) {
      if (i == j || matrix.methods[j] != method) continue;
      (roles[i] != roles[j] ? mixed : same).push_back(matrix.At(i, j));
    }
  }
  if (mixed.empty() || same.empty()) return 0.0;
  return MomentsOf(mixed).mean - MomentsOf(same).mean;
}

void WriteMatrixCsv(std::ostream& os, const CrossPlayMatrix& matrix,
                    std::uint64_t config_hash) {
  WriteCsvPreamble(os, config_hash);
  int n = static_cast<int>(matrix.agent_ids.size());
  os << "agent";
  for (int j = 0; j < n; ++j) os << "," << matrix.agent_ids[j];
  os << "\n";
  for (int i = 0; i < n; ++i) {
    os << matrix.agent_ids[i];
    for (int j = 0; j < n; ++j) os << "," << FormatDouble(matrix.At(i, j));
    os << "\n";
  }
}

void WriteMatrixLongCsv(std::ostream& os, const CrossPlayMatrix& matrix,
                        std::uint64_t config_hash) {
  WriteCsvPreamble(os, config_hash);
  int n = static_cast<int>(matrix.agent_ids.size());
  os << "agent_i,agent_j,mean,std,episodes\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      os << matrix.agent_ids[i] << "," << matrix.agent_ids[j] << ","
         << FormatDouble(matrix.At(i, j)) << ","
         << FormatDouble(matrix.stds[static_cast<size_t>(i) * n + j]) << ","
         << matrix.episodes << "\n";
    }
  }
}

std::string StatsToJson(const std::vector<TpCpStats>& stats) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : stats) {
    nlohmann::json row;
    row["method"] = s.method;
    row["tp_mean"] = s.tp_mean;
    row["tp_std"] = s.tp_std;
    row["cp_mean"] = s.cp_mean;
    row["cp_std"] = s.cp_std;
    row["drop"] = s.drop;
    j.push_back(row);
  }
  return j.dump(2);
}

}  // namespace rqelab
