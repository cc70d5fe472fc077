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

#include "rqelab/risk.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rqelab {

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("KL dimension mismatch");
  }
  double acc = 0.0;
  for (size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    if (q[j] <= 0.0) return kDivergenceInfinity;
    acc += p[j] * std::log(std::max(p[j], kProbFloor) /
                           std::max(q[j], kProbFloor));
  }
  return std::max(acc, 0.0);
}

double NegEntropy(std::span<const double> p) {
  double acc = 0.0;
  for (double v : p) {
    if (v <= 0.0) continue;
    acc += v * std::log(std::max(v, kProbFloor));
  }
  return std::min(acc, 0.0);
}

double EntropicRiskValue(std::span<const double> v,
                         std::span<const double> x_opp, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (v.size() != x_opp.size()) {
    throw std::invalid_argument("risk value dimension mismatch");
  }
  // Shift by the supported minimum so every exponent is <= 0.
  double vmin = kDivergenceInfinity;
  for (size_t j = 0; j < v.size(); ++j) {
    if (x_opp[j] > 0.0) vmin = std::min(vmin, v[j]);
  }
  double mass = 0.0;
  for (size_t j = 0; j < v.size(); ++j) {
    if (x_opp[j] <= 0.0) continue;
    mass += x_opp[j] * std::exp(-tau * (v[j] - vmin));
  }
  return vmin - std::log(mass) / tau;
}

MixedStrategy WorstCaseAdversary(std::span<const double> v,
                                 std::span<const double> x_opp, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (v.size() != x_opp.size()) {
    throw std::invalid_argument("adversary dimension mismatch");
  }
  double vmin = kDivergenceInfinity;
  for (size_t j = 0; j < v.size(); ++j) {
    if (x_opp[j] > 0.0) vmin = std::min(vmin, v[j]);
  }
  MixedStrategy tilt(v.size(), 0.0);
  double mass = 0.0;
  for (size_t j = 0; j < v.size(); ++j) {
    if (x_opp[j] <= 0.0) continue;
    tilt[j] = x_opp[j] * std::exp(-tau * (v[j] - vmin));
    mass += tilt[j];
  }
  for (auto& t : tilt) t /= mass;
  return tilt;
}

MixedStrategy Softmax(std::span<const double> logits) {
  double top = -kDivergenceInfinity;
  for (double y : logits) top = std::max(top, y);
  MixedStrategy x(logits.size());
  double mass = 0.0;
  for (size_t j = 0; j < logits.size(); ++j) {
    x[j] = std::exp(logits[j] - top);
    mass += x[j];
  }
  for (auto& v : x) v /= mass;
  return x;
}

}  // namespace rqelab
