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

#include <cmath>
#include <cstdint>
#include <filesystem>

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/csv.hpp"
#include "cfmimo/netgen/covariance.hpp"
#include "cfmimo/netgen/pilots.hpp"
#include "cfmimo/netgen/topology.hpp"

namespace cfmimo::netgen {

// Everything a network drop needs before channels are sampled.
struct Scenario {
  SystemConfig config;
  Topology topology;
  SpatialModel spatial;
  PilotAssignment pilots;
};

inline Scenario make_scenario(const SystemConfig& config, std::uint64_t seed) {
  Scenario s;
  s.config = config;
  s.topology = build_topology(config, seed);
  s.spatial = build_spatial_model(s.topology, config);
  s.pilots = assign_pilots(config.K, config.tau_p, seed);
  return s;
}

// ap_positions.csv, ue_positions.csv and links.csv under `dir`.
inline void write_scenario_csv(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "ap_positions.csv");
    w.header({"ap_id", "x_m", "y_m"});
    for (std::size_t m = 0; m < s.topology.num_aps(); ++m)
      w.row(m, s.topology.ap_positions[m].x, s.topology.ap_positions[m].y);
  }
  {
    CsvWriter w(dir / "ue_positions.csv");
    w.header({"ue_id", "x_m", "y_m"});
    for (std::size_t k = 0; k < s.topology.num_ues(); ++k)
      w.row(k, s.topology.ue_positions[k].x, s.topology.ue_positions[k].y);
  }
  CsvWriter w(dir / "links.csv");
  w.header({"ap_id", "ue_id", "distance_m", "beta_db", "serving", "pilot_index"});
  for (std::size_t m = 0; m < s.topology.num_aps(); ++m) {
    for (std::size_t k = 0; k < s.topology.num_ues(); ++k) {
      const auto i = static_cast<Eigen::Index>(m);
      const auto j = static_cast<Eigen::Index>(k);
      w.row(m, k, s.topology.distance_m(i, j), 10.0 * std::log10(s.topology.large_scale(i, j)),
            s.topology.serving.serves(m, k) ? 1 : 0, s.pilots.pilot_index[k]);
    }
  }
}

}  // namespace cfmimo::netgen
