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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"

namespace cfmimo::netgen {

// Pilot indices are 0-based internally (0..tau_p-1).
struct PilotAssignment {
  std::size_t tau_p = 0;
  std::vector<std::size_t> pilot_index;         // t_k
  std::vector<std::vector<std::size_t>> cohort;  // P_k, ascending, includes k

  [[nodiscard]] std::size_t num_ues() const { return pilot_index.size(); }

  // UEs currently holding pilot t, ascending.
  [[nodiscard]] std::vector<std::size_t> users_of(std::size_t t) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < pilot_index.size(); ++k)
      if (pilot_index[k] == t) out.push_back(k);
    return out;
  }

  static PilotAssignment from_indices(std::size_t tau_p, std::vector<std::size_t> index) {
    PilotAssignment a;
    a.tau_p = tau_p;
    for (auto t : index)
      if (t >= tau_p) throw ConfigError("pilot index out of range");
    a.pilot_index = std::move(index);
    a.cohort.resize(a.pilot_index.size());
    for (std::size_t k = 0; k < a.pilot_index.size(); ++k) a.cohort[k] = a.users_of(a.pilot_index[k]);
    return a;
  }
};

// A uniformly random subset of min(K, tau_p) UEs gets mutually distinct
// pilots; every remaining UE reuses a uniformly random pilot.
inline PilotAssignment assign_pilots(std::size_t K, std::size_t tau_p, std::uint64_t seed) {
  if (K < 1) throw ConfigError("assign_pilots: K must be >= 1");
  if (tau_p < 1) throw ConfigError("assign_pilots: tau_p must be >= 1");
  auto rng = make_rng(seed, Stream::kPilots);
  std::vector<std::size_t> ues(K);
  std::iota(ues.begin(), ues.end(), std::size_t{0});
  std::shuffle(ues.begin(), ues.end(), rng);
  std::vector<std::size_t> pilots(tau_p);
  std::iota(pilots.begin(), pilots.end(), std::size_t{0});
  std::shuffle(pilots.begin(), pilots.end(), rng);

  std::vector<std::size_t> index(K);
  const std::size_t orthogonal = std::min(K, tau_p);
  for (std::size_t j = 0; j < orthogonal; ++j) index[ues[j]] = pilots[j];
  std::uniform_int_distribution<std::size_t> pick(0, tau_p - 1);
  for (std::size_t j = orthogonal; j < K; ++j) index[ues[j]] = pick(rng);
  return PilotAssignment::from_indices(tau_p, std::move(index));
}

}  // namespace cfmimo::netgen
