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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfmimo/cfmimo.hpp"

namespace cfmimo::testing {

inline SystemConfig small_config(std::size_t M, std::size_t N, std::size_t K, std::size_t serving,
                                 std::size_t trials = 2000) {
  SystemConfig c;
  c.M = M;
  c.N = N;
  c.K = K;
  c.serving_set_size = serving;
  c.mc_trials = trials;
  return c;
}

// One AP serving one UE with signal mean b and self-interference variance var.
inline chanstat::PrecodingStatistics single_link(double b, double var, double sigma2) {
  auto serving = netgen::ServingSets::from_ue_lists(1, {{0}});
  auto st = chanstat::PrecodingStatistics::zeros(serving, sigma2);
  st.b(0, 0) = b;
  st.C_coh(0, 0)(0, 0) = var;
  return st;
}

// Random powers on the serving sets with every AP total in [0, P_max].
inline rates::PowerSolution random_power(const netgen::ServingSets& s, double pmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rates::PowerSolution p;
  p.p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.num_aps), static_cast<Eigen::Index>(s.num_ues));
  for (std::size_t m = 0; m < s.num_aps; ++m) {
    double total = 0.0;
    for (auto k : s.ues_of_ap[m]) total += (p.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = u(rng));
    if (total > 0.0) p.p.row(static_cast<Eigen::Index>(m)) *= pmax * u(rng) / total;
  }
  return p;
}

inline rates::ModeAssignment random_modes(std::size_t K, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  rates::ModeAssignment a;
  for (std::size_t k = 0; k < K; ++k) a.mode.push_back(coin(rng) ? rates::Mode::kCjt : rates::Mode::kNcjt);
  return a;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cfmimo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cfmimo::testing
