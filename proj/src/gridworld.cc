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

#include <stdexcept>

#include "json.hpp"

#include "rqelab/io_util.h"

namespace rqelab {

namespace {

Cell Shift(Cell c, Move m) {
  switch (m) {
    case Move::kUp: return {c.x, c.y - 1};
    case Move::kDown: return {c.x, c.y + 1};
    case Move::kLeft: return {c.x - 1, c.y};
    case Move::kRight: return {c.x + 1, c.y};
    case Move::kStay: return c;
  }
  return c;
}

bool InBounds(const GridConfig& config, Cell c) {
  return c.x >= 0 && c.x < config.width && c.y >= 0 && c.y < config.height;
}

int CellIndex(const GridConfig& config, Cell c) {
  return c.y * config.width + c.x;
}

Cell CellFromIndex(const GridConfig& config, int index) {
  return {index % config.width, index / config.width};
}

const char* MoveName(Move m) {
  switch (m) {
    case Move::kUp: return "up";
    case Move::kDown: return "down";
    case Move::kLeft: return "left";
    case Move::kRight: return "right";
    case Move::kStay: return "stay";
  }
  return "?";
}

}  // namespace

void GridConfig::Validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("bad grid size");
  auto check_cell = [&](Cell c, const char* what) {
    if (!InBounds(*this, c)) {
      throw std::invalid_argument(std::string(what) + " out of bounds");
    }
  };
  check_cell(pot, "pot");
  for (const auto& o : onions) {
    check_cell(o, "onion");
    if (o == pot) throw std::invalid_argument("onion on the pot cell");
  }
  if (onions[0] == onions[1]) {
    throw std::invalid_argument("onion cells must be distinct");
  }
  for (const auto& pair : start_configs) {
    for (const auto& s : pair) {
      check_cell(s, "start");
      if (s == pot) throw std::invalid_argument("start on the pot cell");
      for (const auto& o : onions) {
        if (s == o) throw std::invalid_argument("start on an onion cell");
      }
    }
    if (pair[0] == pair[1]) {
      throw std::invalid_argument("agents cannot share a start cell");
    }
  }
  if (episode_len <= 0) throw std::invalid_argument("episode_len must be > 0");
  if (!(respawn_prob >= 0.0 && respawn_prob <= 1.0)) {
    throw std::invalid_argument("respawn_prob must be in [0, 1]");
  }
}

GridState ResetGrid(const GridConfig& config, Rng& rng) {
  GridState state;
  const auto& pair = config.start_configs[UniformInt(rng, 2)];
  state.agent_pos = pair;
  state.carrying = {false, false};
  state.onion_available = {true, true};
  state.step_count = 0;
  return state;
}

StepOutcome StepGrid(const GridConfig& config, const GridState& state,
                     Move a1, Move a2, Rng& rng) {
  if (state.step_count >= config.episode_len) {
    throw std::logic_error("step after episode end");
  }
  StepOutcome out;
  out.state = state;
  GridState& next = out.state;
  const std::array<Move, 2> moves = {a1, a2};

  int first = UniformInt(rng, 2);
  for (int k = 0; k < 2; ++k) {
    int agent = k == 0 ? first : 1 - first;
    Move move = moves[agent];
    if (move == Move::kStay) continue;
    out.private_part[agent] -= config.move_cost;
    Cell target = Shift(next.agent_pos[agent], move);
    if (!InBounds(config, target)) continue;  // wall block
    if (target == config.pot) {
      // The pot is solid; bumping it while carrying is a delivery.
      if (next.carrying[agent]) {
        out.shared += config.delivery_reward;
        next.carrying[agent] = false;
      }
      continue;
    }
    if (target == next.agent_pos[1 - agent]) {
      out.private_part[agent] -= config.collision_penalty;
      continue;
    }
    next.agent_pos[agent] = target;
    for (int o = 0; o < 2; ++o) {
      if (target == config.onions[o] && next.onion_available[o] &&
          !next.carrying[agent]) {
        next.onion_available[o] = false;
        next.carrying[agent] = true;
        out.shared += config.pickup_reward;
      }
    }
  }

  for (int o = 0; o < 2; ++o) {
    if (!next.onion_available[o] && UniformDouble(rng) < config.respawn_prob) {
      next.onion_available[o] = true;
    }
  }

  next.step_count = state.step_count + 1;
  out.reward = {out.shared + out.private_part[0],
                out.shared + out.private_part[1]};
  return out;
}

int EncodeObservation(const GridConfig& config, const GridState& state) {
  int cells = config.width * config.height;
  int idx = CellIndex(config, state.agent_pos[0]);
  idx = idx * cells + CellIndex(config, state.agent_pos[1]);
  idx = idx * 2 + (state.carrying[0] ? 1 : 0);
  idx = idx * 2 + (state.carrying[1] ? 1 : 0);
  idx = idx * 2 + (state.onion_available[0] ? 1 : 0);
  idx = idx * 2 + (state.onion_available[1] ? 1 : 0);
  return idx;
}

int EncodeObservationFor(const GridConfig& config, const GridState& state,
                         int agent) {
  if (agent == 0) return EncodeObservation(config, state);
  GridState swapped = state;
  std::swap(swapped.agent_pos[0], swapped.agent_pos[1]);
  std::swap(swapped.carrying[0], swapped.carrying[1]);
  return EncodeObservation(config, swapped);
}

GridState DecodeObservation(const GridConfig& config, int index) {
  GridState state;
  state.onion_available[1] = index % 2;
  index /= 2;
  state.onion_available[0] = index % 2;
  index /= 2;
  state.carrying[1] = index % 2;
  index /= 2;
  state.carrying[0] = index % 2;
  index /= 2;
  int cells = config.width * config.height;
  state.agent_pos[1] = CellFromIndex(config, index % cells);
  index /= cells;
  state.agent_pos[0] = CellFromIndex(config, index);
  return state;
}

StepOutcome GridworldEnv::Step(Move a1, Move a2) {
  StepOutcome out = StepGrid(config_, state_, a1, a2, rng_);
  state_ = out.state;
  return out;
}

void WriteTrajectoryCsv(std::ostream& os,
                        const std::vector<std::array<Move, 2>>& actions,
                        const std::vector<StepOutcome>& outcomes,
                        std::uint64_t config_hash) {
  WriteCsvPreamble(os, config_hash);
  os << "step,x1,y1,x2,y2,action1,action2,shared,private1,private2\n";
  for (size_t t = 0; t < outcomes.size(); ++t) {
    const auto& o = outcomes[t];
    os << t << "," << o.state.agent_pos[0].x << "," << o.state.agent_pos[0].y
       << "," << o.state.agent_pos[1].x << "," << o.state.agent_pos[1].y << ","
       << MoveName(actions[t][0]) << "," << MoveName(actions[t][1]) << ","
       << FormatDouble(o.shared) << "," << FormatDouble(o.private_part[0])
       << "," << FormatDouble(o.private_part[1]) << "\n";
  }
}

namespace {

nlohmann::json CellToJson(const Cell& c) { return nlohmann::json{c.x, c.y}; }

Cell CellFromJson(const nlohmann::json& j) {
  return Cell{j.at(0).get<int>(), j.at(1).get<int>()};
}

}  // namespace

std::string GridConfig::ToJsonString() const {
  nlohmann::json j;
  j["width"] = width;
  j["height"] = height;
  j["pot"] = CellToJson(pot);
  j["onions"] = {CellToJson(onions[0]), CellToJson(onions[1])};
  j["start_configs"] = {
      {CellToJson(start_configs[0][0]), CellToJson(start_configs[0][1])},
      {CellToJson(start_configs[1][0]), CellToJson(start_configs[1][1])}};
  j["move_cost"] = move_cost;
  j["collision_penalty"] = collision_penalty;
  j["pickup_reward"] = pickup_reward;
  j["delivery_reward"] = delivery_reward;
  j["respawn_prob"] = respawn_prob;
  j["episode_len"] = episode_len;
  return j.dump(2);
}

GridConfig GridConfig::FromJsonString(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GridConfig config;
  config.width = j.value("width", config.width);
  config.height = j.value("height", config.height);
  if (j.contains("pot")) config.pot = CellFromJson(j["pot"]);
  if (j.contains("onions")) {
    config.onions = {CellFromJson(j["onions"][0]), CellFromJson(j["onions"][1])};
  }
  if (j.contains("start_configs")) {
    for (int k = 0; k < 2; ++k) {
      config.start_configs[k] = {CellFromJson(j["start_configs"][k][0]),
                                 CellFromJson(j["start_configs"][k][1])};
    }
  }
  config.move_cost = j.value("move_cost", config.move_cost);
  config.collision_penalty = j.value("collision_penalty", config.collision_penalty);
  config.pickup_reward = j.value("pickup_reward", config.pickup_reward);
  config.delivery_reward = j.value("delivery_reward", config.delivery_reward);
  config.respawn_prob = j.value("respawn_prob", config.respawn_prob);
  config.episode_len = j.value("episode_len", config.episode_len);
  config.Validate();
  return config;
}

}  // namespace rqelab
