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
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/netgen/topology.hpp"

namespace cfmimo::netgen {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Gaussian local scattering for a half-wavelength ULA (small-ASD closed form):
//   [R]_{l,r} = beta * exp(j*pi*(l-r)*sin(phi)) * exp(-(sigma^2/2) * (pi*(l-r)*cos(phi))^2)
inline CMatrix local_scattering_covariance(double beta, double nominal_angle_rad, double asd_rad,
                                           std::size_t N) {
  if (!(beta > 0.0)) throw DomainError("local_scattering_covariance: beta must be positive");
  if (N < 1) throw DomainError("local_scattering_covariance: N must be >= 1");
  const auto n = static_cast<Eigen::Index>(N);
  CMatrix R(n, n);
  const double pi = std::numbers::pi;
  const double s = std::sin(nominal_angle_rad);
  const double c = std::cos(nominal_angle_rad);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double d = static_cast<double>(l - r);
      const double spread = pi * d * c;
      R(l, r) = beta * std::polar(std::exp(-0.5 * asd_rad * asd_rad * spread * spread), pi * d * s);
    }
  }
  return R;
}

// R_{m,k} for every AP/UE pair, stored row-major by AP.
struct SpatialModel {
  std::size_t num_aps = 0;
  std::size_t num_ues = 0;
  std::size_t antennas = 0;
  std::vector<CMatrix> covariances;

  [[nodiscard]] const CMatrix& R(std::size_t m, std::size_t k) const {
    return covariances[m * num_ues + k];
  }
  CMatrix& R(std::size_t m, std::size_t k) { return covariances[m * num_ues + k]; }

  // beta_{m,k} = tr(R_{m,k}) / N
  [[nodiscard]] double beta(std::size_t m, std::size_t k) const {
    return R(m, k).trace().real() / static_cast<double>(antennas);
  }
};

inline SpatialModel build_spatial_model(const Topology& topology, const SystemConfig& config) {
  SpatialModel s;
  s.num_aps = topology.num_aps();
  s.num_ues = topology.num_ues();
  s.antennas = config.N;
  s.covariances.reserve(s.num_aps * s.num_ues);
  const double asd = config.asd_deg * std::numbers::pi / 180.0;
  for (std::size_t m = 0; m < s.num_aps; ++m) {
    for (std::size_t k = 0; k < s.num_ues; ++k) {
      const auto i = static_cast<Eigen::Index>(m);
      const auto j = static_cast<Eigen::Index>(k);
      s.covariances.push_back(local_scattering_covariance(
          topology.large_scale(i, j), topology.nominal_angle(i, j), asd, config.N));
    }
  }
  return s;
}

}  // namespace cfmimo::netgen
