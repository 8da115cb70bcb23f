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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"

namespace cfmimo::netgen {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// UE-centric association: M_k per UE (ascending AP index) and its dual K_m.
struct ServingSets {
  std::size_t num_aps = 0;
  std::size_t num_ues = 0;
  std::vector<std::vector<std::size_t>> aps_of_ue;  // M_k
  std::vector<std::vector<std::size_t>> ues_of_ap;  // K_m

  [[nodiscard]] bool serves(std::size_t ap, std::size_t ue) const {
    const auto& s = aps_of_ue[ue];
    return std::binary_search(s.begin(), s.end(), ap);
  }

  // Builds K_m from M_k; M_k entries are sorted in place.
  static ServingSets from_ue_lists(std::size_t num_aps,
                                   std::vector<std::vector<std::size_t>> aps_of_ue) {
    ServingSets s;
    s.num_aps = num_aps;
    s.num_ues = aps_of_ue.size();
    s.ues_of_ap.assign(num_aps, {});
    for (std::size_t k = 0; k < aps_of_ue.size(); ++k) {
      auto& list = aps_of_ue[k];
      std::sort(list.begin(), list.end());
      if (std::adjacent_find(list.begin(), list.end()) != list.end())
        throw ConfigError("duplicate AP in serving set of UE " + std::to_string(k));
      for (auto m : list) {
        if (m >= num_aps) throw ConfigError("serving set references unknown AP");
        s.ues_of_ap[m].push_back(k);
      }
    }
    s.aps_of_ue = std::move(aps_of_ue);
    return s;
  }
};

struct Topology {
  double area_m = 0.0;
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  ServingSets serving;
  Eigen::MatrixXd distance_m;     // M x K, wrap-around
  Eigen::MatrixXd large_scale;    // M x K, beta (linear power gain)
  Eigen::MatrixXd nominal_angle;  // M x K, radians, AP -> nearest UE image

  [[nodiscard]] std::size_t num_aps() const { return ap_positions.size(); }
  [[nodiscard]] std::size_t num_ues() const { return ue_positions.size(); }
};

inline constexpr double kMinDistance_m = 1.0;
inline constexpr double kPathLossAt1m_dB = -30.5;
inline constexpr double kPathLossExponentTimes10 = 36.7;

struct WrapResult {
  double distance = 0.0;
  double angle = 0.0;   // direction of the minimizing image seen from the AP
  int shift_index = 0;  // 0..8, (dx, dy) in {-1,0,1}^2, row-major
};

// Toroidal distance: minimum over the nine image shifts of the UE.
// Ties keep the smallest shift index.
inline WrapResult wrap_around(const Point& ap, const Point& ue, double area) {
  WrapResult best;
  best.distance = std::numeric_limits<double>::infinity();
  int idx = 0;
  for (int sx = -1; sx <= 1; ++sx) {
    for (int sy = -1; sy <= 1; ++sy, ++idx) {
      const double dx = ue.x + sx * area - ap.x;
      const double dy = ue.y + sy * area - ap.y;
      const double d = std::hypot(dx, dy);
      if (d < best.distance) {
        best.distance = d;
        best.angle = std::atan2(dy, dx);
        best.shift_index = idx;
      }
    }
  }
  return best;
}

inline double wrap_distance(const Point& a, const Point& b, double area) {
  return wrap_around(a, b, area).distance;
}

// beta_dB = -30.5 - 36.7 log10(max(d, 1 m)) + shadowing_dB, returned linear.
inline double large_scale_gain(double distance_m, double shadowing_dB = 0.0) {
  if (!(distance_m > 0.0)) throw DomainError("large_scale_gain: distance must be positive");
  const double d = std::max(distance_m, kMinDistance_m);
  const double db = kPathLossAt1m_dB - kPathLossExponentTimes10 * std::log10(d) + shadowing_dB;
  return std::pow(10.0, db / 10.0);
}

// The `size` APs with largest beta for each UE (ties: lower AP index),
// stored in ascending AP order.
inline ServingSets select_serving_sets(const Eigen::MatrixXd& beta, std::size_t size) {
  const auto M = static_cast<std::size_t>(beta.rows());
  const auto K = static_cast<std::size_t>(beta.cols());
  if (size < 1 || size > M) throw ConfigError("serving_set_size must lie in [1, M]");
  std::vector<std::vector<std::size_t>> lists(K);
  std::vector<std::size_t> order(M);
  for (std::size_t k = 0; k < K; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return beta(a, k) > beta(b, k);
    });
    lists[k].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
  }
  return ServingSets::from_ue_lists(M, std::move(lists));
}

// Geometry-dependent fields from explicit positions and per-link shadowing (dB).
inline Topology topology_from_positions(const SystemConfig& config, std::vector<Point> aps,
                                        std::vector<Point> ues,
                                        const Eigen::MatrixXd& shadowing_dB) {
  const std::size_t M = aps.size();
  const std::size_t K = ues.size();
  if (config.serving_set_size > M) throw ConfigError("serving_set_size exceeds number of APs");
  Topology t;
  t.area_m = config.area_m;
  t.ap_positions = std::move(aps);
  t.ue_positions = std::move(ues);
  t.distance_m.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
  t.large_scale.resizeLike(t.distance_m);
  t.nominal_angle.resizeLike(t.distance_m);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto w = wrap_around(t.ap_positions[m], t.ue_positions[k], config.area_m);
      const auto i = static_cast<Eigen::Index>(m);
      const auto j = static_cast<Eigen::Index>(k);
      t.distance_m(i, j) = w.distance;
      t.nominal_angle(i, j) = w.angle;
      t.large_scale(i, j) =
          large_scale_gain(std::max(w.distance, kMinDistance_m), shadowing_dB(i, j));
    }
  }
  t.serving = select_serving_sets(t.large_scale, config.serving_set_size);
  return t;
}

// Uniform drop of APs and UEs on the square with i.i.d. log-normal shadowing.
// Each entity draws from its own derived stream, so results do not depend
// on generation order.
inline Topology build_topology(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t M = config.M;
  const std::size_t K = config.K;
  auto draw = [&](Stream stream, std::size_t index) {
    auto rng = make_rng(seed, stream, {index});
    std::uniform_real_distribution<double> u(0.0, config.area_m);
    Point p;
    p.x = u(rng);
    p.y = u(rng);
    return p;
  };
  std::vector<Point> aps(M), ues(K);
  for (std::size_t m = 0; m < M; ++m) aps[m] = draw(Stream::kApPositions, m);
  for (std::size_t k = 0; k < K; ++k) ues[k] = draw(Stream::kUePositions, k);

  Eigen::MatrixXd shadow = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M),
                                                 static_cast<Eigen::Index>(K));
  if (config.shadowing_std_dB > 0.0) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        auto rng = make_rng(seed, Stream::kShadowing, {m, k});
        std::normal_distribution<double> g(0.0, config.shadowing_std_dB);
        shadow(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = g(rng);
      }
    }
  }
  return topology_from_positions(config, std::move(aps), std::move(ues), shadow);
}

}  // namespace cfmimo::netgen
