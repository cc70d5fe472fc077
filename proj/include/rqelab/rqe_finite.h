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

#ifndef RQELAB_RQE_FINITE_H_
#define RQELAB_RQE_FINITE_H_

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "rqelab/games.h"

namespace rqelab {

using StrategyPair = std::pair<MixedStrategy, MixedStrategy>;

struct RqeSolveReport {
  StrategyPair strategies;
  double residual = 0.0;  // max best-response gap, inf-norm on probabilities
  int iterations = 0;
  bool converged = false;
};

// One tau value of a bifurcation scan.
struct TauScanRow {
  double tau = 0.0;
  std::vector<StrategyPair> equilibria;             // deduplicated
  std::vector<double> degrees;                      // free-riding per eq
  std::vector<std::pair<double, double>> collaborate_probs;  // P(action 0)
  std::vector<double> residuals;
};

// The risk-averse quantal best response of `player` to x_opp: the unique
// maximizer of the risk- and entropy-adjusted utility. Solved by damped
// mirror ascent on the logits with the Danskin gradient R p* - c, where p*
// is the Gibbs worst-case tilt of x_opp at the current strategy. tau = 0 is
// the exact quantal response softmax((R x_opp - c) / eps).
MixedStrategy RiskAverseQbr(const FiniteCollabGame& game, int player,
                            const MixedStrategy& x_opp, double tau, double eps,
                            double tol = 1e-10, int max_iter = 20000);

// Damped simultaneous best responses from `init` until the joint
// best-response residual drops below tol.
RqeSolveReport SolveRqe(const FiniteCollabGame& game, const RiskProfile& profile,
                        const StrategyPair& init, double tol = 1e-8,
                        int max_iter = 5000);

// max_i || qbr_i(x_{-i}) - x_i ||_inf: 0 exactly at an RQE.
double VerifyRqe(const FiniteCollabGame& game, const MixedStrategy& x1,
                 const MixedStrategy& x2, const RiskProfile& profile);

// Multi-start search: n_starts Dirichlet(1,..,1) pairs plus the near-corner
// pairs; converged solutions deduplicated at dedup_tol in inf-norm.
std::vector<StrategyPair> EnumerateRqe(const FiniteCollabGame& game,
                                       const RiskProfile& profile,
                                       int n_starts, std::uint64_t seed,
                                       double tol = 1e-9,
                                       double dedup_tol = 1e-3);

// Equilibria per tau with warm starts carried between rows.
std::vector<TauScanRow> TauScan(const FiniteCollabGame& game, double eps,
                                const std::vector<double>& tau_grid,
                                int n_starts, std::uint64_t seed);

// The sufficient risk-aversion level above which no RQE can free-ride by
// more than delta: 2 (eps log n + vbar) (c_max - c_min)^2 / (eps delta^2).
// Returns 0 when the cost vector is constant.
double FreeRidingThreshold(const FiniteCollabGame& game, double eps,
                           double delta);

// Lower bound exp(-vbar / eps) / n on every entry of an RQE strategy.
double MinSupportMass(const FiniteCollabGame& game, double eps);

// Spread constants shared by the two bounds above.
struct PayoffSpread {
  double c_max, c_min, v_min, v_max, v_bar;
};
PayoffSpread ComputePayoffSpread(const FiniteCollabGame& game);

// CSV: tau, eq_index, x1_0.., x2_0.., delta, collab_prob_1, collab_prob_2,
// residual (per-action columns collapse to the documented 2-action header
// for 2-action games).
void WriteTauScanCsv(std::ostream& os, const FiniteCollabGame& game,
                     const std::vector<TauScanRow>& rows,
                     std::uint64_t config_hash);

}  // namespace rqelab

#endif  // RQELAB_RQE_FINITE_H_
