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

#include "cfmimo/chanstat/statistics.hpp"
#include "cfmimo/core/config.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/netgen/scenario.hpp"
#include "cfmimo/rates/rates.hpp"
#include "cfmimo/sca/sca.hpp"

namespace cfmimo::runner {

// Network drop plus its precoding statistics. The Monte Carlo stream is
// derived from the drop seed.
struct Instance {
  netgen::Scenario scenario;
  chanstat::PrecodingStatistics stats;
};

inline Instance make_instance(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  Instance in;
  in.scenario = netgen::make_scenario(config, seed);
  in.stats = chanstat::estimate_statistics(in.scenario.spatial, in.scenario.pilots, in.scenario.topology.serving,
                                           config, derive_seed(seed, Stream::kMonteCarlo));
  return in;
}

struct RunResult {
  Instance instance;
  rates::ModeAssignment modes;
  sca::ScaResult sca;
};

// Scenario generation, statistics, power allocation and rate evaluation for
// one seed. Throws sca::ScaError if the optimizer breaks down.
inline RunResult run_single(const SystemConfig& config, const rates::ModeAssignment& modes, std::uint64_t seed,
                            const sca::ScaOptions& opt = {}) {
  RunResult r;
  r.instance = make_instance(config, seed);
  r.modes = modes;
  r.sca = sca::run_sca(r.instance.stats, modes, config, opt);
  return r;
}

}  // namespace cfmimo::runner
