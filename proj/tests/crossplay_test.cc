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

#include <cmath>
#include <sstream>

#include "testing.h"

namespace rqelab {
namespace {

PolicyTable BiasedPolicy(const GridConfig& config, double bias_down) {
  PolicyTable t = PolicyTable::Zeros(ObservationCount(config), kNumMoves);
  for (int o = 0; o < t.num_obs; ++o) {
    t.logits[o * kNumMoves + static_cast<int>(Move::kDown)] = bias_down;
  }
  return t;
}

PolicyTable StayPolicy(const GridConfig& config) {
  PolicyTable t = PolicyTable::Zeros(ObservationCount(config), kNumMoves);
  for (int o = 0; o < t.num_obs; ++o) {
    t.logits[o * kNumMoves + static_cast<int>(Move::kStay)] = 25.0;
  }
  return t;
}

TrainedTeam MakeTeam(const std::string& id, const std::string& method,
                     PolicyTable a, PolicyTable b) {
  TrainedTeam team;
  team.id = id;
  team.method = method;
  team.policies = {std::move(a), std::move(b)};
  return team;
}

void TestSingleAgentMatrix() {
  GridConfig config;
  PolicyTable uniform = PolicyTable::Zeros(ObservationCount(config), kNumMoves);
  std::vector<TrainedTeam> teams = {
      MakeTeam("solo", "ippo", uniform, uniform)};
  CrossPlayMatrix matrix = CrossPlay(teams, config, 20, 50, 77);
  RQE_CHECK_EQ(static_cast<int>(matrix.agent_ids.size()), 1);
  RQE_CHECK(std::isfinite(matrix.At(0, 0)));

  // Bit-for-bit reproducible.
  CrossPlayMatrix again = CrossPlay(teams, config, 20, 50, 77);
  RQE_CHECK_EQ(matrix.At(0, 0), again.At(0, 0));
  CrossPlayMatrix other_seed = CrossPlay(teams, config, 20, 50, 78);
  RQE_CHECK(matrix.At(0, 0) != other_seed.At(0, 0));
}

void TestEvaluationDoesNotMutate() {
  GridConfig config;
  PolicyTable a = BiasedPolicy(config, 0.5);
  PolicyTable b = BiasedPolicy(config, -0.5);
  std::vector<double> logits_a = a.logits;
  std::vector<double> logits_b = b.logits;
  std::vector<TrainedTeam> teams = {MakeTeam("x", "ippo", a, b),
                                    MakeTeam("y", "ippo", b, a)};
  CrossPlay(teams, config, 10, 30, 5);
  RQE_CHECK(teams[0].policies[0].logits == logits_a);
  RQE_CHECK(teams[0].policies[1].logits == logits_b);
}

void TestVarianceShrinksWithEpisodes() {
  GridConfig config;
  PolicyTable uniform = PolicyTable::Zeros(ObservationCount(config), kNumMoves);
  std::vector<TrainedTeam> teams = {MakeTeam("u", "ippo", uniform, uniform)};
  CrossPlayMatrix small = CrossPlay(teams, config, 100, 50, 3);
  CrossPlayMatrix large = CrossPlay(teams, config, 1000, 50, 3);
  // Standard error of the mean scales down with episode count.
  double se_small = small.stds[0] / std::sqrt(100.0);
  double se_large = large.stds[0] / std::sqrt(1000.0);
  RQE_CHECK(se_large < se_small);
}

void TestCopiesGiveFlatMatrix() {
  GridConfig config;
  PolicyTable uniform = PolicyTable::Zeros(ObservationCount(config), kNumMoves);
  std::vector<TrainedTeam> teams;
  for (int k = 0; k < 3; ++k) {
    teams.push_back(MakeTeam("copy" + std::to_string(k), "ippo", uniform,
                             uniform));
  }
  CrossPlayMatrix matrix = CrossPlay(teams, config, 200, 50, 11);
  // All entries within Monte-Carlo noise of each other.
  double lo = matrix.values[0], hi = matrix.values[0], se = 0.0;
  for (size_t k = 0; k < matrix.values.size(); ++k) {
    lo = std::min(lo, matrix.values[k]);
    hi = std::max(hi, matrix.values[k]);
    se = std::max(se, matrix.stds[k] / std::sqrt(200.0));
  }
  RQE_CHECK_MSG(hi - lo < 6.0 * se, "spread " << hi - lo << " se " << se);

  auto stats = ComputeTpCpStats(matrix);
  RQE_CHECK_EQ(static_cast<int>(stats.size()), 1);
  RQE_CHECK_MSG(std::abs(stats[0].drop) < 6.0 * se, "drop " << stats[0].drop);
}

void TestTpCpStatsOnSyntheticMatrix() {
  CrossPlayMatrix matrix;
  matrix.agent_ids = {"a", "b", "c"};
  matrix.methods = {"ippo", "ippo", "ippo"};
  matrix.episodes = 1;
  matrix.episode_len = 1;
  // Diagonal 10, off-diagonal 4: drop of exactly 6.
  matrix.values = {10, 4, 4, 4, 10, 4, 4, 4, 10};
  matrix.stds.assign(9, 0.0);
  auto stats = ComputeTpCpStats(matrix);
  RQE_CHECK_EQ(static_cast<int>(stats.size()), 1);
  RQE_CHECK_NEAR(stats[0].tp_mean, 10.0, 1e-12);
  RQE_CHECK_NEAR(stats[0].cp_mean, 4.0, 1e-12);
  RQE_CHECK_NEAR(stats[0].drop, 6.0, 1e-12);

  // Identical agents everywhere: drop 0.
  CrossPlayMatrix flat = matrix;
  flat.values.assign(9, 7.0);
  RQE_CHECK_NEAR(ComputeTpCpStats(flat)[0].drop, 0.0, 1e-12);
}

void TestFreeRidingProfile() {
  GridConfig config;
  // Stay-only policies pay nothing and earn nothing.
  PolicyTable stay = StayPolicy(config);
  PolicyTable uniform = PolicyTable::Zeros(ObservationCount(config), kNumMoves);
  FreeRidingProfile lazy = EvaluateFreeRiding(stay, uniform, config, 20, 13);
  RQE_CHECK_EQ(lazy.cost_1, 0.0);
  RQE_CHECK(lazy.cost_2 > 0.0);
  RQE_CHECK_NEAR(lazy.fr_degree, lazy.cost_2, 1e-12);

  // Two copies in a symmetric-start environment: gap near zero in
  // distribution (within a few standard errors).
  FreeRidingProfile twin = EvaluateFreeRiding(uniform, uniform, config, 400, 17);
  RQE_CHECK_MSG(twin.fr_degree < 4.0 * twin.std_error + 1e-9,
                "gap " << twin.fr_degree << " se " << twin.std_error);
}

void TestCheckerboardScore() {
  CrossPlayMatrix matrix;
  matrix.agent_ids = {"a", "b", "c", "d"};
  matrix.methods = {"ippo", "ippo", "ippo", "ippo"};
  matrix.episodes = 1;
  matrix.episode_len = 1;
  // Roles alternate; mixed pairings do well, same-role pairings poorly.
  matrix.values = {
      9, 8, 2, 8,
      8, 9, 8, 2,
      2, 8, 9, 8,
      8, 2, 8, 9,
  };
  matrix.stds.assign(16, 0.0);
  std::vector<int> roles = {0, 1, 0, 1};
  double score = CheckerboardScore(matrix, roles, "ippo");
  RQE_CHECK_NEAR(score, 6.0, 1e-12);
  // One role only: no signal.
  std::vector<int> same(4, 0);
  RQE_CHECK_EQ(CheckerboardScore(matrix, same, "ippo"), 0.0);
}

void TestCsvAndJsonOutputs() {
  CrossPlayMatrix matrix;
  matrix.agent_ids = {"ippo_s0", "srpo_s0"};
  matrix.methods = {"ippo", "srpo"};
  matrix.values = {1.0, 2.0, 3.0, 4.0};
  matrix.stds = {0.1, 0.2, 0.3, 0.4};
  matrix.episodes = 5;
  matrix.episode_len = 10;
  std::ostringstream wide, longfmt;
  WriteMatrixCsv(wide, matrix, 0x11);
  WriteMatrixLongCsv(longfmt, matrix, 0x11);
  RQE_CHECK(wide.str().find("agent,ippo_s0,srpo_s0") != std::string::npos);
  RQE_CHECK(longfmt.str().find("agent_i,agent_j,mean,std,episodes") !=
            std::string::npos);
  RQE_CHECK(longfmt.str().find("ippo_s0,srpo_s0,2,0.2,5") != std::string::npos);
  std::string json = StatsToJson(ComputeTpCpStats(matrix));
  RQE_CHECK(json.find("\"method\": \"ippo\"") != std::string::npos);
  RQE_CHECK(json.find("\"drop\"") != std::string::npos);
}

}  // namespace
}  // namespace rqelab

int main() {
  rqelab::TestSingleAgentMatrix();
  rqelab::TestEvaluationDoesNotMutate();
  rqelab::TestVarianceShrinksWithEpisodes();
  rqelab::TestCopiesGiveFlatMatrix();
  rqelab::TestTpCpStatsOnSyntheticMatrix();
  rqelab::TestFreeRidingProfile();
  rqelab::TestCheckerboardScore();
  rqelab::TestCsvAndJsonOutputs();
  std::cout << "crossplay_test: OK" << std::endl;
  return 0;
}
