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

#ifndef RQELAB_CROSSPLAY_H_
#define RQELAB_CROSSPLAY_H_

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rqelab/gridworld.h"
#include "rqelab/trainer.h"

// Cross-play evaluation over trained teams. A matrix index is a training
// run; entry (i, j) pairs run i's slot-1 agent with run j's slot-2 agent,
// so the diagonal reproduces the training partners.

namespace rqelab {

struct TrainedTeam {
  std::string id;
  std::string method;  // "ippo" or "srpo"
  std::array<PolicyTable, 2> policies;
};

struct CrossPlayMatrix {
  std::vector<std::string> agent_ids;
  std::vector<std::string> methods;
  std::vector<double> values;  // row-major, mean per-agent episodic return
  std::vector<double> stds;    // per-cell episode-return std
  int episodes = 0;
  int episode_len = 0;

  double At(int i, int j) const {
    return values[static_cast<size_t>(i) * agent_ids.size() + j];
  }
};

// Evaluates every pairing over `episodes` fixed-length episodes with no
// learning; cells run concurrently with per-cell derived seeds.
CrossPlayMatrix CrossPlay(const std::vector<TrainedTeam>& teams,
                          const GridConfig& env_config, int episodes,
                          int episode_len, std::uint64_t seed);

struct TpCpStats {
  std::string method;
  double tp_mean = 0.0;
  double tp_std = 0.0;
  double cp_mean = 0.0;
  double cp_std = 0.0;
  double drop = 0.0;  // tp_mean - cp_mean
};

// Diagonal entries within a method block are TP; off-diagonal intra-method
// entries are CP.
std::vector<TpCpStats> ComputeTpCpStats(const CrossPlayMatrix& matrix);

struct FreeRidingProfile {
  double cost_1 = 0.0;  // mean per-episode private cost, >= 0
  double cost_2 = 0.0;
  double fr_degree = 0.0;  // |cost_1 - cost_2|
  double mean_return = 0.0;
  double std_error = 0.0;  // standard error of the per-episode cost gap
};

FreeRidingProfile EvaluateFreeRiding(const PolicyTable& policy_slot0,
                                     const PolicyTable& policy_slot1,
                                     const GridConfig& env_config, int episodes,
                                     std::uint64_t seed);

// mean(mixed-role intra-method pairings) - mean(same-role pairings), with
// roles taken from the sign of (cost_1 - cost_2) in each team's self-play.
// Returns 0 when a method has fewer than two distinct roles.
double CheckerboardScore(const CrossPlayMatrix& matrix,
                         const std::vector<int>& roles,
                         const std::string& method);

void WriteMatrixCsv(std::ostream& os, const CrossPlayMatrix& matrix,
                    std::uint64_t config_hash);
// Long format: agent_i, agent_j, mean, std, episodes.
void WriteMatrixLongCsv(std::ostream& os, const CrossPlayMatrix& matrix,
                        std::uint64_t config_hash);
std::string StatsToJson(const std::vector<TpCpStats>& stats);

}  // namespace rqelab

#endif  // RQELAB_CROSSPLAY_H_
