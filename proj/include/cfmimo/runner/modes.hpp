// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: hybrid coherent/non-coherent cell-free massive MIMO downlink toolkit
// Copyright (C) 2026 The cfmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/rates/rates.hpp"

namespace cfmimo::runner {

// Each UE is CJT independently with probability p. UE k draws u_k ~ U[0,1)
// from `seed` and is CJT iff u_k < p, so for a fixed seed the CJT set grows
// monotonically with p.
inline rates::ModeAssignment allocate_modes(std::size_t K, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("CJT probability must lie in [0, 1]");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rates::ModeAssignment a;
  a.mode.reserve(K);
  for (std::size_t k = 0; k < K; ++k) a.mode.push_back(u(rng) < p ? rates::Mode::kCjt : rates::Mode::kNcjt);
  return a;
}

// "0101..." of length K: even-indexed UEs NCJT, odd-indexed UEs CJT.
inline rates::ModeAssignment alternating_modes(std::size_t K) {
  std::string bits(K, '0');
  for (std::size_t k = 1; k < K; k += 2) bits[k] = '1';
  return rates::ModeAssignment::parse(bits);
}

}  // namespace cfmimo::runner
