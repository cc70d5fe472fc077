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

#ifndef RQELAB_GRIDWORLD_H_
#define RQELAB_GRIDWORLD_H_

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rqelab/rng.h"

// Two-agent onion-delivery gridworld: shared team rewards for pickups and
// deliveries, private costs for movement and collisions, stochastic onion
// respawns. Deterministic given the seed.

namespace rqelab {

struct Cell {
  int x = 0;  // column
  int y = 0;  // row; (0, 0) is the top-left corner
  bool operator==(const Cell&) const = default;
};

enum class Move { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
inline constexpr int kNumMoves = 5;

struct GridConfig {
  int width = 5;
  int height = 5;
  Cell pot = {2, 2};  // solid; deliveries happen by bumping into it
  std::array<Cell, 2> onions = {{{0, 4}, {4, 0}}};
  // Two symmetric starting pairs in the top-left region.
  std::array<std::array<Cell, 2>, 2> start_configs = {
      {{{{0, 0}, {1, 0}}}, {{{0, 0}, {0, 1}}}}};
  double move_cost = 0.2;
  double collision_penalty = 2.0;
  double pickup_reward = 1.0;
  double delivery_reward = 10.0;
  double respawn_prob = 0.2;
  int episode_len = 128;

  void Validate() const;
  std::string ToJsonString() const;
  static GridConfig FromJsonString(const std::string& text);
};

struct GridState {
  std::array<Cell, 2> agent_pos;
  std::array<bool, 2> carrying = {false, false};
  std::array<bool, 2> onion_available = {true, true};
  int step_count = 0;
};

struct StepOutcome {
  GridState state;
  double shared = 0.0;                         // pickup/delivery events
  std::array<double, 2> private_part = {0, 0};  // movement/collision, <= 0
  std::array<double, 2> reward = {0, 0};        // shared + private_part[i]
};

// Uniformly picks one of the two start configurations.
GridState ResetGrid(const GridConfig& config, Rng& rng);

// Applies both moves in a uniformly random agent order. Blocked moves into
// the other agent cost the collision penalty; wall/pot blocks only the move
// cost. Missing onions respawn after movement resolution.
StepOutcome StepGrid(const GridConfig& config, const GridState& state,
                     Move a1, Move a2, Rng& rng);

// Bijective index over (pos1, pos2, carry1, carry2, onion1, onion2);
// range [0, width*height * width*height * 16).
int EncodeObservation(const GridConfig& config, const GridState& state);

// Egocentric encoding: agent 1 sees EncodeObservation; agent 2 sees the
// same layout with the agent slots swapped.
int EncodeObservationFor(const GridConfig& config, const GridState& state,
                         int agent);

// Inverse of EncodeObservation (step_count is not part of the index).
GridState DecodeObservation(const GridConfig& config, int index);

inline int ObservationCount(const GridConfig& config) {
  int cells = config.width * config.height;
  return cells * cells * 16;
}

// Owns the seeded stream; episodes end at the fixed horizon.
class GridworldEnv {
 public:
  GridworldEnv(const GridConfig& config, std::uint64_t seed)
      : config_(config), rng_(seed) {
    config_.Validate();
    state_ = ResetGrid(config_, rng_);
  }

  const GridConfig& config() const { return config_; }
  const GridState& state() const { return state_; }
  bool Done() const { return state_.step_count >= config_.episode_len; }

  GridState Reset() {
    state_ = ResetGrid(config_, rng_);
    return state_;
  }

  StepOutcome Step(Move a1, Move a2);

 private:
  GridConfig config_;
  GridState state_;
  Rng rng_;
};

// CSV trajectory dump: step, positions, actions, shared, private1, private2.
void WriteTrajectoryCsv(std::ostream& os,
                        const std::vector<std::array<Move, 2>>& actions,
                        const std::vector<StepOutcome>& outcomes,
                        std::uint64_t config_hash);

}  // namespace rqelab

#endif  // RQELAB_GRIDWORLD_H_
