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

#include "rqelab/games.h"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

namespace rqelab {

namespace {

void CheckFinite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " has non-finite entry");
    }
  }
}

Eigen::MatrixXd AsMatrix(const std::vector<double>& flat, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = flat[i * n + j];
  }
  return m;
}

}  // namespace

bool IsDistribution(std::span<const double> x, double tol) {
  double total = 0.0;
  for (double v : x) {
    if (!(v >= 0.0)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= tol;
}

MixedStrategy UniformStrategy(int n) {
  return MixedStrategy(n, 1.0 / n);
}

MixedStrategy PointMass(int n, int action) {
  MixedStrategy x(n, 0.0);
  x[action] = 1.0;
  return x;
}

void FiniteCollabGame::Validate() const {
  if (num_actions <= 0) throw std::invalid_argument("num_actions must be > 0");
  if (shared_reward.size() !=
      static_cast<size_t>(num_actions) * num_actions) {
    throw std::invalid_argument("shared_reward shape mismatch");
  }
  if (private_cost.size() != static_cast<size_t>(num_actions)) {
    throw std::invalid_argument("private_cost shape mismatch");
  }
  CheckFinite(shared_reward, "shared_reward");
  CheckFinite(private_cost, "private_cost");
  if (symmetric) {
    for (int a = 0; a < num_actions; ++a) {
      for (int b = a + 1; b < num_actions; ++b) {
        if (Reward(a, b) != Reward(b, a)) {
          throw std::invalid_argument("symmetric flag set but R(a,b) != R(b,a)");
        }
      }
    }
  }
}

void QuadraticAggregativeGame::Validate() const {
  if (dim <= 0) throw std::invalid_argument("dim must be > 0");
  if (num_players <= 0) throw std::invalid_argument("num_players must be > 0");
  if (reward_quad.size() != static_cast<size_t>(dim) * dim) {
    throw std::invalid_argument("reward_quad shape mismatch");
  }
  if (reward_lin.size() != static_cast<size_t>(dim)) {
    throw std::invalid_argument("reward_lin shape mismatch");
  }
  if (rho.size() != static_cast<size_t>(num_players)) {
    throw std::invalid_argument("rho shape mismatch");
  }
  CheckFinite(reward_quad, "reward_quad");
  CheckFinite(reward_lin, "reward_lin");
  for (double r : rho) {
    if (!(r > 0.0)) throw std::invalid_argument("rho entries must be > 0");
  }
  Eigen::MatrixXd q = AsMatrix(reward_quad, dim);
  if (!q.isApprox(q.transpose(), 1e-10)) {
    throw std::invalid_argument("reward_quad must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (es.eigenvalues().maxCoeff() >= -1e-12) {
    throw std::invalid_argument("reward_quad must be negative definite");
  }
  if (target.has_value() && target->size() != static_cast<size_t>(dim)) {
    throw std::invalid_argument("target shape mismatch");
  }
}

QuadraticAggregativeGame QuadraticAggregativeGame::FromTargetForm(
    const std::vector<double>& quad_bar, const std::vector<double>& a_bar,
    const std::vector<double>& rho) {
  int n = static_cast<int>(a_bar.size());
  QuadraticAggregativeGame game;
  game.dim = n;
  game.num_players = static_cast<int>(rho.size());
  game.reward_quad.resize(n * n);
  for (int i = 0; i < n * n; ++i) game.reward_quad[i] = -quad_bar[i];
  game.reward_lin.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      game.reward_lin[i] += quad_bar[i * n + j] * a_bar[j];
    }
  }
  game.rho = rho;
  game.target = a_bar;
  game.Validate();
  return game;
}

double QuadraticAggregativeGame::RewardConstant() const {
  if (!target.has_value()) return 0.0;
  // -1/2 <a_bar, Qbar a_bar> with Qbar = -Q.
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      acc += (*target)[i] * (-reward_quad[i * dim + j]) * (*target)[j];
    }
  }
  return -0.5 * acc;
}

RiskProfile RiskProfile::Shared(int num_players, double tau, double eps) {
  RiskProfile profile;
  profile.tau.assign(num_players, tau);
  profile.eps.assign(num_players, eps);
  return profile;
}

void RiskProfile::Validate() const {
  if (tau.size() != eps.size() || tau.empty()) {
    throw std::invalid_argument("profile shape mismatch");
  }
  for (double t : tau) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("tau must be >= 0 (0 = risk-neutral)");
    }
  }
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("eps must be > 0");
    }
  }
}

double Utility(const FiniteCollabGame& game, int player, int a1, int a2) {
  if (player != 0 && player != 1) throw std::out_of_range("player index");
  if (a1 < 0 || a1 >= game.num_actions || a2 < 0 || a2 >= game.num_actions) {
    throw std::out_of_range("action index");
  }
  int own = player == 0 ? a1 : a2;
  return game.Reward(a1, a2) - game.private_cost[own];
}

double ExpectedUtility(const FiniteCollabGame& game, int player,
                       const MixedStrategy& x1, const MixedStrategy& x2) {
  if (x1.size() != static_cast<size_t>(game.num_actions) ||
      x2.size() != static_cast<size_t>(game.num_actions)) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  double reward = 0.0;
  for (int a = 0; a < game.num_actions; ++a) {
    if (x1[a] == 0.0) continue;
    double row = 0.0;
    for (int b = 0; b < game.num_actions; ++b) {
      row += game.Reward(a, b) * x2[b];
    }
    reward += x1[a] * row;
  }
  const MixedStrategy& own = player == 0 ? x1 : x2;
  double cost = 0.0;
  for (int a = 0; a < game.num_actions; ++a) {
    cost += game.private_cost[a] * own[a];
  }
  return reward - cost;
}

double FreeRidingDegree(const FiniteCollabGame& game, const MixedStrategy& x1,
                        const MixedStrategy& x2) {
  double c1 = 0.0;
  double c2 = 0.0;
  for (int a = 0; a < game.num_actions; ++a) {
    c1 += game.private_cost[a] * x1[a];
    c2 += game.private_cost[a] * x2[a];
  }
  return std::abs(c1 - c2);
}

FiniteCollabGame MakeExampleCoordinationGame() {
  FiniteCollabGame game;
  game.num_actions = 2;
  game.shared_reward = {1.0, 1.0, 1.0, 0.0};
  game.private_cost = {0.4, 0.0};
  game.symmetric = true;
  game.Validate();
  return game;
}

QuadraticAggregativeGame MakeExampleForceGame(double a_bar) {
  return QuadraticAggregativeGame::FromTargetForm({1.0}, {a_bar}, {1.0, 1.0});
}

std::string FiniteCollabGame::ToJsonString() const {
  nlohmann::json j;
  j["n_actions"] = num_actions;
  j["shared_reward"] = shared_reward;
  j["private_cost"] = private_cost;
  j["symmetric"] = symmetric;
  return j.dump(2);
}

FiniteCollabGame FiniteCollabGame::FromJsonString(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FiniteCollabGame game;
  game.num_actions = j.at("n_actions").get<int>();
  game.shared_reward = j.at("shared_reward").get<std::vector<double>>();
  game.private_cost = j.at("private_cost").get<std::vector<double>>();
  game.symmetric = j.value("symmetric", false);
  game.Validate();
  return game;
}

std::string QuadraticAggregativeGame::ToJsonString() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["n_players"] = num_players;
  j["H"] = reward_quad;
  j["h"] = reward_lin;
  j["rho"] = rho;
  if (target.has_value()) j["target"] = *target;
  return j.dump(2);
}

QuadraticAggregativeGame QuadraticAggregativeGame::FromJsonString(
    const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  QuadraticAggregativeGame game;
  game.dim = j.at("dim").get<int>();
  game.num_players = j.at("n_players").get<int>();
  game.reward_quad = j.at("H").get<std::vector<double>>();
  game.reward_lin = j.at("h").get<std::vector<double>>();
  game.rho = j.at("rho").get<std::vector<double>>();
  if (j.contains("target")) {
    game.target = j.at("target").get<std::vector<double>>();
  }
  game.Validate();
  return game;
}

}  // namespace rqelab
