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

#ifndef RQELAB_RNG_H_
#define RQELAB_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

// Deterministic sampling helpers. std::<distribution> implementations are
// not pinned by the standard, so every draw used in artifacts goes through
// the explicit routines below.

namespace rqelab {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double UniformDouble(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformIn(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformDouble(rng);
}

// Uniform integer in [0, n) by rejection-free scaling; n must be small
// relative to 2^53 (always true here).
inline int UniformInt(Rng& rng, int n) {
  int k = static_cast<int>(UniformDouble(rng) * n);
  return k >= n ? n - 1 : k;
}

// Samples an index from an (unnormalized is fine) nonnegative weight vector.
int SampleCategorical(Rng& rng, std::span<const double> weights);

// Dirichlet(1,...,1): uniform over the simplex via normalized exponentials.
std::vector<double> SampleSimplexUniform(Rng& rng, int n);

// Derives an independent stream from a base seed and a work-item index.
// SplitMix64 finalizer keeps derived seeds decorrelated.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t index);

}  // namespace rqelab

#endif  // RQELAB_RNG_H_
