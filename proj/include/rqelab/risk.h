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

#ifndef RQELAB_RISK_H_
#define RQELAB_RISK_H_

#include <limits>
#include <span>
#include <vector>

#include "rqelab/games.h"

// Entropic risk over finite distributions via its log-sum-exp dual, the
// closed-form Gibbs worst-case adversary, and the divergences used
// everywhere else. All exponentials are max-shifted; probabilities are
// clamped at kProbFloor before any log.

namespace rqelab {

inline constexpr double kDivergenceInfinity =
    std::numeric_limits<double>::infinity();
inline constexpr double kProbFloor = 1e-300;

// sum_j p_j log(p_j / q_j) with 0 log(0/q) = 0. Returns kDivergenceInfinity
// when p puts mass where q has none.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// sum_j p_j log p_j, in [-log n, 0].
double NegEntropy(std::span<const double> p);

// -(1/tau) log sum_j x_opp_j exp(-tau v_j): the risk-adjusted value of the
// conditional utilities v under opponent strategy x_opp. Equals
// inf_p <v, p> + (1/tau) KL(p, x_opp). Requires tau > 0.
double EntropicRiskValue(std::span<const double> v,
                         std::span<const double> x_opp, double tau);

// The unique minimizer of <v, p> + (1/tau) KL(p, x_opp): the Gibbs tilt
// p_j proportional to x_opp_j exp(-tau v_j). Requires tau > 0.
MixedStrategy WorstCaseAdversary(std::span<const double> v,
                                 std::span<const double> x_opp, double tau);

// softmax(logits); max-shifted.
MixedStrategy Softmax(std::span<const double> logits);

}  // namespace rqelab

#endif  // RQELAB_RISK_H_
