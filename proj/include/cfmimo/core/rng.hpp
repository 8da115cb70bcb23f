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

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfmimo {

// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream tags keep independently derived seeds from colliding.
enum class Stream : std::uint64_t {
  kApPositions = 1,
  kUePositions = 2,
  kShadowing = 3,
  kPilots = 4,
  kMonteCarlo = 5,
  kTopologyDraw = 6,
  kModeDraw = 7,
  kGenie = 8,
  kChannel = 9,
  kPilotNoise = 10,
};

// Counter-based child seed: the result depends only on (parent, stream,
// indices), never on the order in which children are requested.
inline std::uint64_t derive_seed(std::uint64_t parent, Stream stream,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t s = mix64(parent ^ mix64(static_cast<std::uint64_t>(stream)));
  for (auto i : indices) s = mix64(s ^ mix64(i + 0x632be59bd9b4e019ULL));
  return s;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t parent, Stream stream,
                    std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(derive_seed(parent, stream, indices));
}

}  // namespace cfmimo
