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
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cfmimo::sca {

// Constraint families of the per-iteration power-allocation program.
enum class Family { kLogRate, kSinrLink, kInterference, kPower, kFronthaul, kBound, kOther };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::kLogRate: return "log_rate";
    case Family::kSinrLink: return "sinr_link";
    case Family::kInterference: return "interference";
    case Family::kPower: return "power";
    case Family::kFronthaul: return "fronthaul";
    case Family::kBound: return "bound";
    case Family::kOther: return "other";
  }
  return "?";
}

// Dense symmetric quadratic term x_B^T Q x_B; `local` indexes the owning
// constraint's support vector.
struct QuadBlock {
  std::vector<Eigen::Index> local;
  Eigen::MatrixXd Q;
};

// One smooth convex inequality g(x) <= 0 over a sparse support.
//   kAffine:    g = a^T x_S + c
//   kQuadratic: g = sum_B x_B^T Q_B x_B + a^T x_S + c     (Q_B PSD)
//   kLogRate:   g = x_S[0] - weight * ln(1 + scale * x_S[1]) + a^T x_S + c
struct Constraint {
  enum class Kind { kAffine, kQuadratic, kLogRate };
  Kind kind = Kind::kAffine;
  Family family = Family::kOther;
  std::vector<Eigen::Index> support;  // strictly ascending
  Eigen::VectorXd linear;             // over support
  double constant = 0.0;
  std::vector<QuadBlock> blocks;
  double weight = 0.0;
  double scale = 0.0;

  [[nodiscard]] double gather_dot(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (std::size_t a = 0; a < support.size(); ++a) v += linear(static_cast<Eigen::Index>(a)) * x(support[a]);
    return v;
  }

  // +inf outside the domain of the log term.
  [[nodiscard]] double value(const Eigen::VectorXd& x) const {
    double v = gather_dot(x) + constant;
    if (kind == Kind::kQuadratic) {
      for (const auto& blk : blocks) {
        const auto n = static_cast<Eigen::Index>(blk.local.size());
        for (Eigen::Index r = 0; r < n; ++r) {
          const double xr = x(support[static_cast<std::size_t>(blk.local[static_cast<std::size_t>(r)])]);
          double row = 0.0;
          for (Eigen::Index c = 0; c < n; ++c)
            row += blk.Q(r, c) * x(support[static_cast<std::size_t>(blk.local[static_cast<std::size_t>(c)])]);
          v += xr * row;
        }
      }
    } else if (kind == Kind::kLogRate) {
      const double arg = 1.0 + scale * x(support[1]);
      if (!(arg > 0.0)) return std::numeric_limits<double>::infinity();
      v += x(support[0]) - weight * std::log(arg);
    }
    return v;
  }

  // Gradient restricted to the support.
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    g = linear;
    if (kind == Kind::kQuadratic) {
      for (const auto& blk : blocks) {
        const auto n = static_cast<Eigen::Index>(blk.local.size());
        for (Eigen::Index r = 0; r < n; ++r) {
          double row = 0.0;
          for (Eigen::Index c = 0; c < n; ++c)
            row += blk.Q(r, c) * x(support[static_cast<std::size_t>(blk.local[static_cast<std::size_t>(c)])]);
          g(blk.local[static_cast<std::size_t>(r)]) += 2.0 * row;
        }
      }
    } else if (kind == Kind::kLogRate) {
      g(0) += 1.0;
      g(1) -= weight * scale / (1.0 + scale * x(support[1]));
    }
  }

  // H(lower) += w * Hessian(g).
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& H) const {
    if (kind == Kind::kQuadratic) {
      for (const auto& blk : blocks) {
        const auto n = static_cast<Eigen::Index>(blk.local.size());
        for (Eigen::Index r = 0; r < n; ++r) {
          const auto gr = support[static_cast<std::size_t>(blk.local[static_cast<std::size_t>(r)])];
          for (Eigen::Index c = 0; c < n; ++c) {
            const auto gc = support[static_cast<std::size_t>(blk.local[static_cast<std::size_t>(c)])];
            if (gr >= gc) H(gr, gc) += 2.0 * w * blk.Q(r, c);
          }
        }
      }
    } else if (kind == Kind::kLogRate) {
      const double arg = 1.0 + scale * x(support[1]);
      H(support[1], support[1]) += w * weight * scale * scale / (arg * arg);
    }
  }
};

// minimize cost^T x  s.t.  constraints, x_j >= 0 for j in `nonnegative`.
struct ConvexProgram {
  Eigen::Index num_vars = 0;
  Eigen::VectorXd cost;
  std::vector<Constraint> constraints;
  std::vector<Eigen::Index> nonnegative;
  Eigen::VectorXd start;  // strictly feasible when possible; otherwise phase I runs
  // Optional solver hint: disjoint small sets of variables that share
  // nonlinear rows only with each other or with ungrouped variables.
  std::vector<std::vector<Eigen::Index>> local_groups;

  [[nodiscard]] std::size_t count(Family f) const {
    if (f == Family::kBound) return nonnegative.size();
    return static_cast<std::size_t>(
        std::count_if(constraints.begin(), constraints.end(), [f](const Constraint& c) { return c.family == f; }));
  }
  [[nodiscard]] std::size_t num_inequalities() const { return constraints.size() + nonnegative.size(); }

  // Largest g_j(x)^+ per family, indexed by Family.
  [[nodiscard]] std::vector<double> violations(const Eigen::VectorXd& x) const {
    std::vector<double> v(static_cast<std::size_t>(Family::kOther) + 1, 0.0);
    for (const auto& c : constraints) {
      auto& slot = v[static_cast<std::size_t>(c.family)];
      slot = std::max(slot, std::max(0.0, c.value(x)));
    }
    auto& b = v[static_cast<std::size_t>(Family::kBound)];
    for (auto j : nonnegative) b = std::max(b, std::max(0.0, -x(j)));
    return v;
  }
};

}  // namespace cfmimo::sca
