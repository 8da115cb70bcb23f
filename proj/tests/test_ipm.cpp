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

#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

namespace cfmimo::sca {
namespace {

Constraint affine(std::vector<Eigen::Index> support, std::vector<double> coef, double constant) {
  Constraint c;
  c.support = std::move(support);
  c.linear = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  c.constant = constant;
  return c;
}

ConvexProgram small_lp() {
  ConvexProgram p;
  p.num_vars = 2;
  p.cost = Eigen::Vector2d(-1.0, -1.0);
  p.constraints.push_back(affine({0, 1}, {1.0, 2.0}, -4.0));
  p.constraints.push_back(affine({0, 1}, {3.0, 1.0}, -6.0));
  p.nonnegative = {0, 1};
  p.start = Eigen::Vector2d(0.1, 0.1);
  return p;
}

TEST(InteriorPoint, LinearProgramVertex) {
  const auto r = solve_program(small_lp());
  ASSERT_EQ(r.status, IpmStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-6);
  EXPECT_NEAR(r.x(1), 1.2, 1e-6);
  EXPECT_NEAR(r.objective, -2.8, 1e-7);
  EXPECT_LE(r.dual_residual, 1e-8);
  EXPECT_NEAR(r.lambda(0), 0.4, 1e-6);
  EXPECT_NEAR(r.lambda(1), 0.2, 1e-6);
}

TEST(InteriorPoint, DiskMaximizesAlongTheDiagonal) {
  ConvexProgram p;
  p.num_vars = 2;
  p.cost = Eigen::Vector2d(-1.0, -1.0);
  Constraint c = affine({0, 1}, {0.0, 0.0}, -1.0);
  c.kind = Constraint::Kind::kQuadratic;
  c.blocks.push_back({{0, 1}, Eigen::Matrix2d::Identity()});
  p.constraints.push_back(c);
  p.start = Eigen::Vector2d::Zero();
  const auto r = solve_program(p);
  ASSERT_EQ(r.status, IpmStatus::kOptimal);
  EXPECT_NEAR(r.x(0), std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(r.x(1), std::sqrt(0.5), 1e-6);
}

TEST(InteriorPoint, LogRateHypograph) {
  ConvexProgram p;
  p.num_vars = 2;
  p.cost = Eigen::Vector2d(-1.0, 0.0);
  Constraint lr = affine({0, 1}, {0.0, 0.0}, 0.0);
  lr.kind = Constraint::Kind::kLogRate;
  lr.weight = 1.5;
  lr.scale = 2.0;
  p.constraints.push_back(lr);
  p.constraints.push_back(affine({1}, {1.0}, -3.0));
  p.nonnegative = {1};
  p.start = Eigen::Vector2d(-1.0, 1.0);
  const auto r = solve_program(p);
  ASSERT_EQ(r.status, IpmStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 1.5 * std::log(7.0), 1e-6);
  EXPECT_NEAR(r.x(1), 3.0, 1e-6);
}

TEST(InteriorPoint, PhaseOneRecoversFromAnInfeasibleStart) {
  auto p = small_lp();
  p.start = Eigen::Vector2d(5.0, -2.0);
  const auto r = solve_program(p);
  ASSERT_EQ(r.status, IpmStatus::kOptimal);
  EXPECT_NEAR(r.objective, -2.8, 1e-7);
  const auto x = find_strictly_feasible(p, p.start);
  for (const auto& c : p.constraints) EXPECT_LT(c.value(x), 0.0);
  EXPECT_GT(x.minCoeff(), 0.0);
}

TEST(InteriorPoint, InfeasibleProgramThrowsWithCertificate) {
  ConvexProgram p;
  p.num_vars = 1;
  p.cost = Eigen::VectorXd::Ones(1);
  p.constraints.push_back(affine({0}, {1.0}, -1.0));
  p.constraints.push_back(affine({0}, {-1.0}, 2.0));
  p.start = Eigen::VectorXd::Zero(1);
  try {
    (void)solve_program(p);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NEAR(e.phase1_value(), 0.5, 1e-6);
    EXPECT_GT(e.multipliers().sum(), 0.0);
  }
}

TEST(InteriorPoint, StructuredAndDenseSolvesAgree) {
  const auto config = testing::small_config(6, 2, 5, 3, 500);
  const auto s = netgen::make_scenario(config, 21);
  const auto st = chanstat::estimate_statistics(s.spatial, s.pilots, s.topology.serving, config, 4);
  const auto modes = rates::ModeAssignment::parse("10110");
  const auto anchor = initial_state(st, modes, config);
  const auto sp = assemble_subproblem(st, modes, config, anchor);
  ASSERT_FALSE(sp.program.local_groups.empty());
  auto dense = sp.program;
  dense.local_groups.clear();
  const auto a = solve_program(sp.program);
  const auto b = solve_program(dense);
  ASSERT_EQ(a.status, IpmStatus::kOptimal);
  ASSERT_EQ(b.status, IpmStatus::kOptimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::max(1.0, std::abs(b.objective)));
  EXPECT_LE((a.x - b.x).lpNorm<Eigen::Infinity>(), 1e-4);
}

TEST(InteriorPoint, EarlyStopAndIterationLimit) {
  auto p = small_lp();
  IpmOptions o;
  o.early_stop = [](const Eigen::VectorXd& x) { return x(0) > 1.0; };
  EXPECT_EQ(solve_program(p, o).status, IpmStatus::kEarlyStop);
  IpmOptions few;
  few.max_iterations = 2;
  EXPECT_EQ(solve_program(p, few).status, IpmStatus::kIterationLimit);
}

}  // namespace
}  // namespace cfmimo::sca
