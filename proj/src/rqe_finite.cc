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

#include "rqelab/rqe_finite.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rqelab/io_util.h"
#include "rqelab/risk.h"
#include "rqelab/rng.h"

namespace rqelab {

namespace {

// Expected shared reward of own action a against the opponent distribution:
// row (player 0) or column (player 1) average of R.
void SharedRewardAgainst(const FiniteCollabGame& game, int player,
                         std::span<const double> x_opp, std::vector<double>* out) {
  int n = game.num_actions;
  out->assign(n, 0.0);
  for (int a = 0; a < n; ++a) {
    double acc = 0.0;
    for (int b = 0; b < n; ++b) {
      acc += (player == 0 ? game.Reward(a, b) : game.Reward(b, a)) * x_opp[b];
    }
    (*out)[a] = acc;
  }
}

// Conditional shared reward v_j = E_{a ~ x}[R(a, j)] seen by `player` when
// the opponent plays j. The adversary tilts x_opp along these values.
void ConditionalReward(const FiniteCollabGame& game, int player,
                       std::span<const double> x_own, std::vector<double>* out) {
  int n = game.num_actions;
  out->assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      acc += (player == 0 ? game.Reward(a, j) : game.Reward(j, a)) * x_own[a];
    }
    (*out)[j] = acc;
  }
}

double InfNorm(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

double PairDistance(const StrategyPair& a, const StrategyPair& b) {
  return std::max(InfNorm(a.first, b.first), InfNorm(a.second, b.second));
}

// Starting points: near-corner pure pairs that reliably land in the
// free-riding basins, plus the caller's random draws.
std::vector<StrategyPair> CornerStarts(int n) {
  std::vector<StrategyPair> starts;
  const double kCornerMass = 1.0 - 1e-3;
  auto corner = [&](int action) {
    MixedStrategy x(n, (1.0 - kCornerMass) / (n - 1));
    x[action] = kCornerMass;
    return x;
  };
  if (n < 2) return starts;
  starts.push_back({corner(0), corner(0)});
  starts.push_back({corner(0), corner(n - 1)});
  starts.push_back({corner(n - 1), corner(0)});
  starts.push_back({corner(n - 1), corner(n - 1)});
  return starts;
}

}  // namespace

MixedStrategy RiskAverseQbr(const FiniteCollabGame& game, int player,
                            const MixedStrategy& x_opp, double tau, double eps,
                            double tol, int max_iter) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (x_opp.size() != static_cast<size_t>(game.num_actions)) {
    throw std::invalid_argument("opponent strategy dimension mismatch");
  }
  int n = game.num_actions;
  std::vector<double> gain(n);
  if (tau == 0.0) {
    // Plain quantal response: softmax((R x_opp - c) / eps).
    SharedRewardAgainst(game, player, x_opp, &gain);
    for (int a = 0; a < n; ++a) {
      gain[a] = (gain[a] - game.private_cost[a]) / eps;
    }
    return Softmax(gain);
  }
  // Mirror ascent on logits y: y <- (1 - step*eps) y + step * g with
  // g = R p*(x) - c and step = 0.5/eps, i.e. an equal-weight average of the
  // current logits and the target (R p* - c)/eps. The objective is strictly
  // concave, so the damped fixed-point iteration converges.
  std::vector<double> logits(n, 0.0);
  std::vector<double> cond(n), next(n);
  MixedStrategy x = UniformStrategy(n);
  for (int it = 0; it < max_iter; ++it) {
    ConditionalReward(game, player, x, &cond);
    MixedStrategy tilt = WorstCaseAdversary(cond, x_opp, tau);
    SharedRewardAgainst(game, player, tilt, &gain);
    double residual = 0.0;
    for (int a = 0; a < n; ++a) {
      double target = (gain[a] - game.private_cost[a]) / eps;
      next[a] = 0.5 * logits[a] + 0.5 * target;
      residual = std::max(residual, std::abs(next[a] - logits[a]));
    }
    logits.swap(next);
    x = Softmax(logits);
    if (residual < tol) break;
  }
  return x;
}

double VerifyRqe(const FiniteCollabGame& game, const MixedStrategy& x1,
                 const MixedStrategy& x2, const RiskProfile& profile) {
  MixedStrategy b1 = RiskAverseQbr(game, 0, x2, profile.tau[0], profile.eps[0]);
  MixedStrategy b2 = RiskAverseQbr(game, 1, x1, profile.tau[1], profile.eps[1]);
  return std::max(InfNorm(b1, x1), InfNorm(b2, x2));
}

RqeSolveReport SolveRqe(const FiniteCollabGame& game, const RiskProfile& profile,
                        const StrategyPair& init, double tol, int max_iter) {
  profile.Validate();
  const double kDamping = 0.5;
  RqeSolveReport report;
  MixedStrategy x1 = init.first;
  MixedStrategy x2 = init.second;
  int n = game.num_actions;
  int it = 0;
  double residual = kDivergenceInfinity;
  // Damped simultaneous updates: both responses are computed against the
  // old pair, so the exchange-symmetric diagonal is exactly invariant and
  // symmetric starts can converge to the middle equilibrium branch, which
  // is transversely unstable below the pitchfork.
  for (; it < max_iter; ++it) {
    MixedStrategy b1 = RiskAverseQbr(game, 0, x2, profile.tau[0], profile.eps[0]);
    MixedStrategy b2 = RiskAverseQbr(game, 1, x1, profile.tau[1], profile.eps[1]);
    double r1 = InfNorm(b1, x1);
    double r2 = InfNorm(b2, x2);
    for (int a = 0; a < n; ++a) {
      x1[a] = (1.0 - kDamping) * x1[a] + kDamping * b1[a];
      x2[a] = (1.0 - kDamping) * x2[a] + kDamping * b2[a];
    }
    residual = std::max(r1, r2);
    if (residual < 0.5 * tol) break;
  }
  report.strategies = {x1, x2};
  report.iterations = it;
  report.residual = VerifyRqe(game, x1, x2, profile);
  report.converged = report.residual <= tol;
  return report;
}

std::vector<StrategyPair> EnumerateRqe(const FiniteCollabGame& game,
                                       const RiskProfile& profile,
                                       int n_starts, std::uint64_t seed,
                                       double tol, double dedup_tol) {
  if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
  int n = game.num_actions;
  // n_starts total: symmetric init first, then the corner pairs, then
  // Dirichlet(1,..,1) draws.
  std::vector<StrategyPair> starts;
  starts.push_back({UniformStrategy(n), UniformStrategy(n)});
  for (const auto& corner : CornerStarts(n)) {
    if (static_cast<int>(starts.size()) >= n_starts) break;
    starts.push_back(corner);
  }
  Rng rng(seed);
  while (static_cast<int>(starts.size()) < n_starts) {
    starts.push_back({SampleSimplexUniform(rng, n), SampleSimplexUniform(rng, n)});
  }
  std::vector<StrategyPair> found;
  for (const auto& start : starts) {
    RqeSolveReport report = SolveRqe(game, profile, start, tol);
    if (!report.converged) continue;
    bool duplicate = false;
    for (const auto& eq : found) {
      if (PairDistance(eq, report.strategies) < dedup_tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) found.push_back(report.strategies);
  }
  return found;
}

std::vector<TauScanRow> TauScan(const FiniteCollabGame& game, double eps,
                                const std::vector<double>& tau_grid,
                                int n_starts, std::uint64_t seed) {
  for (size_t i = 1; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < tau_grid[i - 1]) {
      throw std::invalid_argument("tau grid must be sorted");
    }
  }
  int n = game.num_actions;
  std::vector<TauScanRow> rows;
  std::vector<StrategyPair> warm;
  const double kDedup = 1e-3;
  for (size_t gi = 0; gi < tau_grid.size(); ++gi) {
    double tau = tau_grid[gi];
    RiskProfile profile = RiskProfile::Shared(2, tau, eps);
    std::vector<StrategyPair> starts = warm;
    starts.push_back({UniformStrategy(n), UniformStrategy(n)});
    for (const auto& corner : CornerStarts(n)) starts.push_back(corner);
    Rng rng(DeriveSeed(seed, gi));
    for (int k = 0; k < n_starts; ++k) {
      starts.push_back(
          {SampleSimplexUniform(rng, n), SampleSimplexUniform(rng, n)});
    }
    TauScanRow row;
    row.tau = tau;
    for (const auto& start : starts) {
      RqeSolveReport report = SolveRqe(game, profile, start, 1e-9);
      if (!report.converged) continue;
      bool duplicate = false;
      for (const auto& eq : row.equilibria) {
        if (PairDistance(eq, report.strategies) < kDedup) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      row.equilibria.push_back(report.strategies);
      row.degrees.push_back(FreeRidingDegree(game, report.strategies.first,
                                             report.strategies.second));
      row.collaborate_probs.push_back(
          {report.strategies.first[0], report.strategies.second[0]});
      row.residuals.push_back(report.residual);
    }
    warm = row.equilibria;
    rows.push_back(std::move(row));
  }
  return rows;
}

PayoffSpread ComputePayoffSpread(const FiniteCollabGame& game) {
  PayoffSpread s;
  s.c_max = *std::max_element(game.private_cost.begin(), game.private_cost.end());
  s.c_min = *std::min_element(game.private_cost.begin(), game.private_cost.end());
  double r_max = *std::max_element(game.shared_reward.begin(),
                                   game.shared_reward.end());
  double r_min = *std::min_element(game.shared_reward.begin(),
                                   game.shared_reward.end());
  s.v_min = r_min - s.c_max;
  s.v_max = r_max - s.c_min;
  s.v_bar = s.v_max - s.v_min;
  return s;
}

double FreeRidingThreshold(const FiniteCollabGame& game, double eps,
                           double delta) {
  if (!(eps > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("eps and delta must be > 0");
  }
  PayoffSpread s = ComputePayoffSpread(game);
  double cost_gap = s.c_max - s.c_min;
  if (cost_gap == 0.0) return 0.0;  // free-riding degree is identically 0
  double n = static_cast<double>(game.num_actions);
  return 2.0 * (eps * std::log(n) + s.v_bar) * cost_gap * cost_gap /
         (eps * delta * delta);
}

double MinSupportMass(const FiniteCollabGame& game, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  PayoffSpread s = ComputePayoffSpread(game);
  return std::exp(-s.v_bar / eps) / game.num_actions;
}

void WriteTauScanCsv(std::ostream& os, const FiniteCollabGame& game,
                     const std::vector<TauScanRow>& rows,
                     std::uint64_t config_hash) {
  WriteCsvPreamble(os, config_hash);
  int n = game.num_actions;
  os << "tau,eq_index";
  for (int a = 0; a < n; ++a) os << ",x1_" << a;
  for (int a = 0; a < n; ++a) os << ",x2_" << a;
  os << ",delta,collab_prob_1,collab_prob_2,residual\n";
  for (const auto& row : rows) {
    for (size_t e = 0; e < row.equilibria.size(); ++e) {
      os << FormatDouble(row.tau) << "," << e;
      for (int a = 0; a < n; ++a) {
        os << "," << FormatDouble(row.equilibria[e].first[a]);
      }
      for (int a = 0; a < n; ++a) {
        os << "," << FormatDouble(row.equilibria[e].second[a]);
      }
      os << "," << FormatDouble(row.degrees[e]) << ","
         << FormatDouble(row.collaborate_probs[e].first) << ","
         << FormatDouble(row.collaborate_probs[e].second) << ","
         << FormatDouble(row.residuals[e]) << "\n";
    }
  }
}

}  // namespace rqelab
