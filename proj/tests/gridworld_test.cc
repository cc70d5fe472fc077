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

#include "rqelab/gridworld.h"

#include <cmath>
#include <set>
#include <sstream>

#include "testing.h"

namespace rqelab {
namespace {

GridState MakeState(Cell a1, Cell a2, bool carry1 = false, bool carry2 = false,
                    bool onion1 = true, bool onion2 = true) {
  GridState state;
  state.agent_pos = {a1, a2};
  state.carrying = {carry1, carry2};
  state.onion_available = {onion1, onion2};
  state.step_count = 0;
  return state;
}

void TestResetDeterminismAndContract() {
  GridConfig config;
  config.Validate();
  GridworldEnv a(config, 4242);
  GridworldEnv b(config, 4242);
  for (int k = 0; k < 20; ++k) {
    GridState sa = a.Reset();
    GridState sb = b.Reset();
    RQE_CHECK(sa.agent_pos[0] == sb.agent_pos[0]);
    RQE_CHECK(sa.agent_pos[1] == sb.agent_pos[1]);
    bool first = sa.agent_pos[0] == config.start_configs[0][0] &&
                 sa.agent_pos[1] == config.start_configs[0][1];
    bool second = sa.agent_pos[0] == config.start_configs[1][0] &&
                  sa.agent_pos[1] == config.start_configs[1][1];
    RQE_CHECK(first || second);
    RQE_CHECK(sa.onion_available[0] && sa.onion_available[1]);
    RQE_CHECK(!sa.carrying[0] && !sa.carrying[1]);
    RQE_CHECK_EQ(sa.step_count, 0);
  }
  // Both start configurations actually occur.
  GridworldEnv c(config, 7);
  std::set<int> seen;
  for (int k = 0; k < 50; ++k) {
    GridState s = c.Reset();
    seen.insert(s.agent_pos[1] == config.start_configs[0][1] ? 0 : 1);
  }
  RQE_CHECK_EQ(static_cast<int>(seen.size()), 2);
}

void TestNullStep() {
  GridConfig config;
  Rng rng(1);
  GridState state = MakeState({0, 0}, {1, 0});
  StepOutcome out = StepGrid(config, state, Move::kStay, Move::kStay, rng);
  RQE_CHECK_EQ(out.reward[0], 0.0);
  RQE_CHECK_EQ(out.reward[1], 0.0);
  RQE_CHECK_EQ(out.shared, 0.0);
  RQE_CHECK_EQ(out.state.step_count, 1);
}

void TestOnionPickup() {
  GridConfig config;
  config.respawn_prob = 0.0;
  Rng rng(2);
  // Agent 1 one step above the (0, 4) onion; agent 2 parked far away.
  GridState state = MakeState({0, 3}, {4, 4});
  StepOutcome out = StepGrid(config, state, Move::kDown, Move::kStay, rng);
  RQE_CHECK_NEAR(out.shared, 1.0, 1e-15);
  RQE_CHECK_NEAR(out.private_part[0], -0.2, 1e-15);
  RQE_CHECK_NEAR(out.reward[0], 0.8, 1e-15);
  RQE_CHECK_NEAR(out.reward[1], 1.0, 1e-15);
  RQE_CHECK(out.state.carrying[0]);
  RQE_CHECK(!out.state.onion_available[0]);
  RQE_CHECK(out.state.agent_pos[0] == (Cell{0, 4}));

  // Carrying already: the onion stays put and no reward is granted.
  GridConfig no_respawn = config;
  no_respawn.respawn_prob = 0.0;
  GridState carrying = MakeState({0, 3}, {4, 4}, /*carry1=*/true);
  StepOutcome out2 =
      StepGrid(no_respawn, carrying, Move::kDown, Move::kStay, rng);
  RQE_CHECK_EQ(out2.shared, 0.0);
  RQE_CHECK(out2.state.onion_available[0]);
  RQE_CHECK(out2.state.carrying[0]);
}

void TestDelivery() {
  GridConfig config;
  config.respawn_prob = 0.0;
  Rng rng(3);
  // Carrying agent bumps the pot from the left.
  GridState state = MakeState({1, 2}, {4, 4}, /*carry1=*/true);
  StepOutcome out = StepGrid(config, state, Move::kRight, Move::kStay, rng);
  RQE_CHECK_NEAR(out.shared, 10.0, 1e-15);
  RQE_CHECK_NEAR(out.private_part[0], -0.2, 1e-15);
  RQE_CHECK(out.state.agent_pos[0] == (Cell{1, 2}));
  RQE_CHECK(!out.state.carrying[0]);

  // Without an onion the pot is just a wall.
  GridState empty_handed = MakeState({1, 2}, {4, 4});
  StepOutcome out2 =
      StepGrid(config, empty_handed, Move::kRight, Move::kStay, rng);
  RQE_CHECK_EQ(out2.shared, 0.0);
  RQE_CHECK_NEAR(out2.private_part[0], -0.2, 1e-15);
  RQE_CHECK(out2.state.agent_pos[0] == (Cell{1, 2}));
}

void TestBlocksAndCollisions() {
  GridConfig config;
  config.respawn_prob = 0.0;
  Rng rng(4);
  // Off-grid move: move cost only.
  GridState state = MakeState({0, 0}, {4, 4});
  StepOutcome out = StepGrid(config, state, Move::kUp, Move::kStay, rng);
  RQE_CHECK_NEAR(out.private_part[0], -0.2, 1e-15);
  RQE_CHECK(out.state.agent_pos[0] == (Cell{0, 0}));

  // Moving into the other agent costs the collision penalty.
  GridState adjacent = MakeState({0, 0}, {1, 0});
  StepOutcome out2 = StepGrid(config, adjacent, Move::kRight, Move::kStay, rng);
  RQE_CHECK_NEAR(out2.private_part[0], -2.2, 1e-15);
  RQE_CHECK_NEAR(out2.private_part[1], 0.0, 1e-15);
  RQE_CHECK(out2.state.agent_pos[0] == (Cell{0, 0}));

  // Swap conflict: both blocked, both penalized, regardless of order.
  for (int seed = 0; seed < 8; ++seed) {
    Rng swap_rng(seed);
    StepOutcome out3 =
        StepGrid(config, adjacent, Move::kRight, Move::kLeft, swap_rng);
    RQE_CHECK_NEAR(out3.private_part[0], -2.2, 1e-15);
    RQE_CHECK_NEAR(out3.private_part[1], -2.2, 1e-15);
    RQE_CHECK(out3.state.agent_pos[0] == (Cell{0, 0}));
    RQE_CHECK(out3.state.agent_pos[1] == (Cell{1, 0}));
  }
}

void TestRespawn() {
  GridConfig config;
  config.respawn_prob = 1.0;
  Rng rng(5);
  GridState state = MakeState({0, 0}, {4, 4});
  state.onion_available = {false, false};
  StepOutcome out = StepGrid(config, state, Move::kStay, Move::kStay, rng);
  RQE_CHECK(out.state.onion_available[0]);
  RQE_CHECK(out.state.onion_available[1]);

  config.respawn_prob = 0.0;
  StepOutcome out2 = StepGrid(config, state, Move::kStay, Move::kStay, rng);
  RQE_CHECK(!out2.state.onion_available[0]);
}

void TestObservationEncoding() {
  GridConfig config;
  RQE_CHECK_EQ(ObservationCount(config), 10000);
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    GridState state;
    state.agent_pos = {Cell{UniformInt(rng, 5), UniformInt(rng, 5)},
                       Cell{UniformInt(rng, 5), UniformInt(rng, 5)}};
    state.carrying = {UniformInt(rng, 2) == 1, UniformInt(rng, 2) == 1};
    state.onion_available = {UniformInt(rng, 2) == 1, UniformInt(rng, 2) == 1};
    int index = EncodeObservation(config, state);
    RQE_CHECK(index >= 0 && index < 10000);
    GridState back = DecodeObservation(config, index);
    RQE_CHECK(back.agent_pos[0] == state.agent_pos[0]);
    RQE_CHECK(back.agent_pos[1] == state.agent_pos[1]);
    RQE_CHECK_EQ(back.carrying[0], state.carrying[0]);
    RQE_CHECK_EQ(back.carrying[1], state.carrying[1]);
    RQE_CHECK_EQ(back.onion_available[0], state.onion_available[0]);
    RQE_CHECK_EQ(back.onion_available[1], state.onion_available[1]);

    // The egocentric view for agent 2 is the slot-swapped encoding.
    GridState swapped = state;
    std::swap(swapped.agent_pos[0], swapped.agent_pos[1]);
    std::swap(swapped.carrying[0], swapped.carrying[1]);
    RQE_CHECK_EQ(EncodeObservationFor(config, state, 1),
                 EncodeObservation(config, swapped));
    RQE_CHECK_EQ(EncodeObservationFor(config, state, 0),
                 EncodeObservation(config, state));
  }
}

void TestEpisodeInvariants() {
  GridConfig config;
  config.episode_len = 100;
  GridworldEnv env(config, 99);
  Rng rng(100);
  double shared_total = 0.0;
  for (int t = 0; t < 100; ++t) {
    Move a1 = static_cast<Move>(UniformInt(rng, kNumMoves));
    Move a2 = static_cast<Move>(UniformInt(rng, kNumMoves));
    StepOutcome out = env.Step(a1, a2);
    // Reward decomposition.
    RQE_CHECK_NEAR(out.reward[0] + out.reward[1],
                   2.0 * out.shared + out.private_part[0] + out.private_part[1],
                   1e-12);
    RQE_CHECK(out.private_part[0] <= 0.0 && out.private_part[1] <= 0.0);
    RQE_CHECK(out.shared >= 0.0);
    shared_total += out.shared;
    // Structural invariants.
    RQE_CHECK(!(out.state.agent_pos[0] == config.pot));
    RQE_CHECK(!(out.state.agent_pos[1] == config.pot));
    RQE_CHECK(!(out.state.agent_pos[0] == out.state.agent_pos[1]));
  }
  RQE_CHECK(env.Done());
  RQE_CHECK_THROWS(env.Step(Move::kStay, Move::kStay), std::logic_error);
  // Shared events always come in +1 / +10 quanta.
  double remainder = std::fmod(shared_total + 1e-9, 1.0);
  RQE_CHECK(remainder < 2e-9);

  // A full stay-only episode earns and costs nothing.
  GridworldEnv idle(config, 3);
  double total = 0.0;
  for (int t = 0; t < 100; ++t) {
    StepOutcome out = idle.Step(Move::kStay, Move::kStay);
    total += std::abs(out.reward[0]) + std::abs(out.reward[1]);
  }
  RQE_CHECK_EQ(total, 0.0);
}

void TestStepDeterminism() {
  GridConfig config;
  GridworldEnv a(config, 555);
  GridworldEnv b(config, 555);
  Rng moves(556);
  for (int t = 0; t < 128; ++t) {
    Move a1 = static_cast<Move>(UniformInt(moves, kNumMoves));
    Move a2 = static_cast<Move>(UniformInt(moves, kNumMoves));
    StepOutcome oa = a.Step(a1, a2);
    StepOutcome ob = b.Step(a1, a2);
    RQE_CHECK_EQ(EncodeObservation(config, oa.state),
                 EncodeObservation(config, ob.state));
    RQE_CHECK_EQ(oa.reward[0], ob.reward[0]);
    RQE_CHECK_EQ(oa.reward[1], ob.reward[1]);
  }
}

void TestConfigJsonAndValidation() {
  GridConfig config;
  GridConfig back = GridConfig::FromJsonString(config.ToJsonString());
  RQE_CHECK(back.pot == config.pot);
  RQE_CHECK(back.onions[0] == config.onions[0]);
  RQE_CHECK_EQ(back.move_cost, config.move_cost);
  RQE_CHECK_EQ(back.episode_len, config.episode_len);

  GridConfig bad;
  bad.onions[0] = bad.pot;
  RQE_CHECK_THROWS(bad.Validate(), std::invalid_argument);
  GridConfig bad2;
  bad2.start_configs[0][0] = bad2.start_configs[0][1];
  RQE_CHECK_THROWS(bad2.Validate(), std::invalid_argument);

  // Override via JSON keeps the rest at defaults.
  GridConfig overridden = GridConfig::FromJsonString("{\"move_cost\": 0.5}");
  RQE_CHECK_EQ(overridden.move_cost, 0.5);
  RQE_CHECK_EQ(overridden.delivery_reward, 10.0);
}

void TestTrajectoryCsv() {
  GridConfig config;
  GridworldEnv env(config, 8);
  std::vector<std::array<Move, 2>> actions;
  std::vector<StepOutcome> outcomes;
  for (int t = 0; t < 5; ++t) {
    actions.push_back({Move::kDown, Move::kStay});
    outcomes.push_back(env.Step(Move::kDown, Move::kStay));
  }
  std::ostringstream os;
  WriteTrajectoryCsv(os, actions, outcomes, 0xabc);
  RQE_CHECK(os.str().find(
                "step,x1,y1,x2,y2,action1,action2,shared,private1,private2") !=
            std::string::npos);
  RQE_CHECK(os.str().find("down,stay") != std::string::npos);
}

}  // namespace
}  // namespace rqelab

int main() {
  rqelab::TestResetDeterminismAndContract();
  rqelab::TestNullStep();
  rqelab::TestOnionPickup();
  rqelab::TestDelivery();
  rqelab::TestBlocksAndCollisions();
  rqelab::TestRespawn();
  rqelab::TestObservationEncoding();
  rqelab::TestEpisodeInvariants();
  rqelab::TestStepDeterminism();
  rqelab::TestConfigJsonAndValidation();
  rqelab::TestTrajectoryCsv();
  std::cout << "gridworld_test: OK" << std::endl;
  return 0;
}
