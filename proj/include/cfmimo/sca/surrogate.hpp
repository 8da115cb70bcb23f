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

#include <Eigen/Core>

#include "cfmimo/core/errors.hpp"

namespace cfmimo::sca {

// Quadratic-over-linear SINR links and their first-order (affine) lower
// bounds around an anchor (p0, theta0). The functions are jointly convex in
// (p, theta) for theta > 0, so the affine surrogate under-estimates them
// everywhere and is tight at the anchor.

// f(p, theta) = (p^T b)^2 / theta
inline double quad_over_lin(const Eigen::VectorXd& p, double theta, const Eigen::VectorXd& b) {
  const double s = p.dot(b);
  return s * s / theta;
}

struct AffineSurrogate {
  double value_at_anchor = 0.0;    // f(p0, theta0)
  Eigen::VectorXd grad_p;          // 2 (p0^T b) b / theta0
  double grad_theta = 0.0;         // -f(p0, theta0) / theta0
  Eigen::VectorXd p0;
  double theta0 = 0.0;

  // F(p, theta) = f0 + grad_p^T (p - p0) + grad_theta (theta - theta0)
  [[nodiscard]] double operator()(const Eigen::VectorXd& p, double theta) const {
    return value_at_anchor + grad_p.dot(p - p0) + grad_theta * (theta - theta0);
  }
};

inline AffineSurrogate surrogate_coh(const Eigen::VectorXd& p0, double theta0, const Eigen::VectorXd& b) {
  if (!(theta0 > 0.0)) throw DomainError("surrogate anchor theta must be positive");
  if (p0.size() != b.size()) throw DomainError("surrogate: dimension mismatch");
  AffineSurrogate s;
  s.p0 = p0;
  s.theta0 = theta0;
  const double proj = p0.dot(b);
  s.value_at_anchor = proj * proj / theta0;
  s.grad_p = (2.0 * proj / theta0) * b;
  s.grad_theta = -s.value_at_anchor / theta0;
  return s;
}

// Scalar stream version: f = (p b)^2 / theta.
inline AffineSurrogate surrogate_nc(double p0, double theta0, double b) {
  return surrogate_coh(Eigen::VectorXd::Constant(1, p0), theta0, Eigen::VectorXd::Constant(1, b));
}

}  // namespace cfmimo::sca
