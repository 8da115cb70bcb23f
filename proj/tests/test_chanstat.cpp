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
#include <complex>
#include <functional>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "support.hpp"

namespace cfmimo::chanstat {
namespace {

using netgen::CMatrix;
using netgen::CVector;

netgen::SpatialModel spatial_from(std::size_t M, std::size_t K, std::size_t N,
                                  const std::function<CMatrix(std::size_t, std::size_t)>& R) {
  netgen::SpatialModel s;
  s.num_aps = M;
  s.num_ues = K;
  s.antennas = N;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t k = 0; k < K; ++k) s.covariances.push_back(R(m, k));
  return s;
}

CMatrix reference_R(double beta, double angle, std::size_t N) {
  return netgen::local_scattering_covariance(beta, angle, 15.0 * std::numbers::pi / 180.0, N);
}

TEST(Channels, ZeroCovarianceGivesZeroChannel) {
  const auto sp = spatial_from(1, 1, 3, [](auto, auto) { return CMatrix::Zero(3, 3); });
  const auto r = sample_true_channels(sp, 5);
  EXPECT_EQ(r.channel(0, 0).norm(), 0.0);
}

TEST(Channels, ScalarVarianceMatchesBeta) {
  const double beta = 4e-9;
  const auto sp = spatial_from(1, 1, 1, [&](auto, auto) { return CMatrix::Constant(1, 1, beta); });
  const std::size_t n = 10000;
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) acc += std::norm(sample_true_channels(sp, trial_seed(1, t)).channel(0, 0)(0));
  EXPECT_NEAR(acc / static_cast<double>(n) / beta, 1.0, 0.05);
}

TEST(Channels, SampleCovarianceMatchesR) {
  const std::size_t N = 4;
  const CMatrix R = reference_R(1e-8, 0.3, N);
  const auto sp = spatial_from(1, 1, N, [&](auto, auto) { return R; });
  SystemConfig c = testing::small_config(1, N, 1, 1);
  ChannelSampler sampler(sp, netgen::PilotAssignment::from_indices(c.tau_p, {0}), c);
  ChannelRealization r;
  CMatrix acc = CMatrix::Zero(N, N);
  const std::size_t n = 10000;
  for (std::size_t t = 0; t < n; ++t) {
    sampler.sample_channels(trial_seed(2, t), r);
    acc += r.channel(0, 0) * r.channel(0, 0).adjoint();
  }
  acc /= static_cast<double>(n);
  const double scale = R.trace().real();
  EXPECT_LT((acc - R).cwiseAbs().maxCoeff() / scale, 0.05);
}

TEST(Psi, SingleAndEmptyAndSharedPilots) {
  const std::size_t N = 3;
  SystemConfig c = testing::small_config(1, N, 3, 1);
  c.tau_p = 3;
  const CMatrix R0 = reference_R(2e-8, 0.1, N);
  const CMatrix R1 = reference_R(5e-9, -0.6, N);
  const CMatrix R2 = reference_R(1e-9, 1.1, N);
  const auto sp = spatial_from(1, 3, N, [&](auto, std::size_t k) { return k == 0 ? R0 : k == 1 ? R1 : R2; });
  const auto pilots = netgen::PilotAssignment::from_indices(3, {0, 1, 1});
  const auto psi = compute_psi(sp, pilots, c);
  const double s2 = c.noise_power_W();
  const CMatrix I = CMatrix::Identity(N, N);
  const double tp = 3.0 * c.pilot_power_W;
  EXPECT_LT((psi.at(0, 0) - (tp * R0 + s2 * I)).norm(), 1e-22);
  EXPECT_LT((psi.at(1, 0) - (tp * R1 + tp * R2 + s2 * I)).norm(), 1e-22);
  EXPECT_LT((psi.at(2, 0) - s2 * I).norm(), 1e-25);
}

TEST(Estimation, NoiselessSingletonRecoversChannel) {
  const std::size_t N = 4;
  SystemConfig c = testing::small_config(1, N, 1, 1);
  c.noise_figure_dB = -150.0;
  const CMatrix R = reference_R(1e-8, 0.2, N) + 1e-9 * CMatrix::Identity(N, N);
  const auto sp = spatial_from(1, 1, N, [&](auto, auto) { return R; });
  ChannelSampler sampler(sp, netgen::PilotAssignment::from_indices(c.tau_p, {0}), c);
  ChannelRealization r;
  sampler.sample(77, r);
  EXPECT_LT((r.estimate(0, 0) - r.channel(0, 0)).norm() / r.channel(0, 0).norm(), 1e-6);
}

TEST(Estimation, EstimateCovarianceMatchesClosedForm) {
  const std::size_t N = 4;
  SystemConfig c = testing::small_config(1, N, 2, 1);
  const CMatrix R0 = reference_R(3e-10, 0.2, N);
  const CMatrix R1 = reference_R(1e-10, -0.9, N);
  const auto sp = spatial_from(1, 2, N, [&](auto, std::size_t k) { return k == 0 ? R0 : R1; });
  const auto pilots = netgen::PilotAssignment::from_indices(c.tau_p, {4, 4});
  ChannelSampler sampler(sp, pilots, c);
  const CMatrix psi = static_cast<double>(c.tau_p) * c.pilot_power_W * (R0 + R1) +
                      c.noise_power_W() * CMatrix::Identity(N, N);
  const CMatrix expected = c.pilot_power_W * static_cast<double>(c.tau_p) * R0 * psi.inverse() * R0;
  CMatrix acc = CMatrix::Zero(N, N);
  double norm_acc = 0.0;
  ChannelRealization r;
  const std::size_t n = 10000;
  for (std::size_t t = 0; t < n; ++t) {
    sampler.sample(trial_seed(3, t), r);
    acc += r.estimate(0, 0) * r.estimate(0, 0).adjoint();
    norm_acc += r.estimate(0, 0).squaredNorm();
  }
  acc /= static_cast<double>(n);
  EXPECT_LT((acc - expected).cwiseAbs().maxCoeff() / expected.trace().real(), 0.05);
  const auto nc = norm_constants(sp, pilots, c);
  EXPECT_NEAR(nc(0, 0) / expected.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(norm_acc / static_cast<double>(n) / nc(0, 0), 1.0, 0.02);
}

TEST(Estimation, PilotSharingUesWithEqualStatisticsGetEqualEstimates) {
  const std::size_t N = 3;
  SystemConfig c = testing::small_config(1, N, 2, 1);
  const CMatrix R = reference_R(1e-9, 0.5, N);
  const auto sp = spatial_from(1, 2, N, [&](auto, auto) { return R; });
  ChannelSampler sampler(sp, netgen::PilotAssignment::from_indices(c.tau_p, {2, 2}), c);
  ChannelRealization r;
  sampler.sample(5, r);
  EXPECT_LT((r.estimate(0, 0) - r.estimate(0, 1)).norm(), 1e-15 * r.estimate(0, 0).norm());
  EXPECT_GT((r.channel(0, 0) - r.channel(0, 1)).norm(), 0.0);
}

TEST(NormConstant, ScalarFormula) {
  SystemConfig c = testing::small_config(1, 1, 1, 1);
  const double beta = 2e-11;
  const auto sp = spatial_from(1, 1, 1, [&](auto, auto) { return CMatrix::Constant(1, 1, beta); });
  const auto nc = norm_constants(sp, netgen::PilotAssignment::from_indices(c.tau_p, {0}), c);
  const double p = c.pilot_power_W;
  const double tp = static_cast<double>(c.tau_p);
  const double expected = p * tp * beta * beta / (tp * p * beta + c.noise_power_W());
  EXPECT_NEAR(nc(0, 0) / expected, 1.0, 1e-12);
}

TEST(Precoder, ZeroOffServingSetAndUnitMeanPower) {
  const std::size_t N = 4;
  SystemConfig c = testing::small_config(2, N, 1, 1);
  const auto sp = spatial_from(2, 1, N, [&](std::size_t m, auto) { return reference_R(m == 0 ? 1e-9 : 1e-11, 0.1, N); });
  const auto pilots = netgen::PilotAssignment::from_indices(c.tau_p, {0});
  const auto serving = netgen::ServingSets::from_ue_lists(2, {{0}});
  const auto nc = norm_constants(sp, pilots, c);
  ChannelSampler sampler(sp, pilots, c);
  ChannelRealization r;
  double acc = 0.0;
  const std::size_t n = 10000;
  for (std::size_t t = 0; t < n; ++t) {
    sampler.sample(trial_seed(4, t), r);
    const auto w = cb_precoder(r, serving, nc);
    EXPECT_EQ(w[1].norm(), 0.0);
    acc += w[0].squaredNorm();
  }
  EXPECT_NEAR(acc / static_cast<double>(n), 1.0, 0.02);
}

TEST(Precoder, SingleAntennaKeepsPhase) {
  SystemConfig c = testing::small_config(1, 1, 1, 1);
  const auto sp = spatial_from(1, 1, 1, [&](auto, auto) { return CMatrix::Constant(1, 1, 1e-9); });
  const auto pilots = netgen::PilotAssignment::from_indices(c.tau_p, {0});
  const auto nc = norm_constants(sp, pilots, c);
  ChannelSampler sampler(sp, pilots, c);
  ChannelRealization r;
  sampler.sample(8, r);
  const auto w = cb_precoder(r, netgen::ServingSets::from_ue_lists(1, {{0}}), nc);
  const std::complex<double> h = r.estimate(0, 0)(0);
  EXPECT_NEAR(std::abs(w[0](0)), std::abs(h) / std::sqrt(nc(0, 0)), 1e-12 * std::abs(w[0](0)));
  EXPECT_NEAR(std::arg(w[0](0)), std::arg(h), 1e-12);
}

TEST(ProjectPsd, ClampsNegativeCurvatureAndKeepsPsdInput) {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 2.0, 2.0, 1.0;
  const auto P = project_psd(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-15);
  EXPECT_NEAR(eig.eigenvalues().maxCoeff(), 3.0, 1e-12);
  Eigen::MatrixXd B(2, 2);
  B << 2.0, 0.5, 0.5, 1.0;
  EXPECT_EQ(project_psd(B), B);
}

class StatisticsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = testing::small_config(4, 4, 3, 2, 10000);
    config_.tau_p = 3;
    scenario_ = netgen::make_scenario(config_, 31);
    stats_ = estimate_statistics(scenario_.spatial, scenario_.pilots, scenario_.topology.serving, config_, 17);
  }
  static SystemConfig config_;
  static netgen::Scenario scenario_;
  static PrecodingStatistics stats_;
};
SystemConfig StatisticsTest::config_;
netgen::Scenario StatisticsTest::scenario_;
PrecodingStatistics StatisticsTest::stats_;

TEST_F(StatisticsTest, SignalMeanMatchesClosedForm) {
  const auto nc = norm_constants(scenario_.spatial, scenario_.pilots, config_);
  for (std::size_t k = 0; k < config_.K; ++k) {
    for (auto m : stats_.serving.aps_of_ue[k]) {
      const auto i = static_cast<Eigen::Index>(m);
      const auto j = static_cast<Eigen::Index>(k);
      EXPECT_NEAR(stats_.b_closed_form(i, j), std::sqrt(nc(i, j)), 1e-12 * std::sqrt(nc(i, j)));
      EXPECT_LE(std::abs(stats_.b(i, j) - stats_.b_closed_form(i, j)), 3.0 * stats_.b_stderr(i, j));
      EXPECT_LT(stats_.b_stderr(i, j), 0.02 * stats_.b(i, j));
    }
  }
}

TEST_F(StatisticsTest, OrthogonalPilotCrossTermsVanish) {
  std::size_t total = 0, within3 = 0;
  for (std::size_t k = 0; k < config_.K; ++k) {
    for (std::size_t i = 0; i < config_.K; ++i) {
      if (i == k) continue;
      ASSERT_NE(scenario_.pilots.pilot_index[k], scenario_.pilots.pilot_index[i]);
      const auto& C = stats_.C_coh(k, i);
      const auto& E = stats_.coh_stderr[k * config_.K + i];
      for (Eigen::Index a = 0; a < C.rows(); ++a)
        for (Eigen::Index b = 0; b < C.cols(); ++b) {
          if (a == b) continue;
          ++total;
          EXPECT_LT(std::abs(C(a, b)), 5.0 * E(a, b));
          if (std::abs(C(a, b)) <= 3.0 * E(a, b)) ++within3;
        }
    }
  }
  ASSERT_GT(total, 0u);
  EXPECT_GE(static_cast<double>(within3) / static_cast<double>(total), 0.95);
}

TEST_F(StatisticsTest, ZeroOutsideServingSetsAndPsd) {
  for (std::size_t k = 0; k < config_.K; ++k)
    for (std::size_t m = 0; m < config_.M; ++m)
      if (!stats_.serving.serves(m, k)) {
        EXPECT_EQ(stats_.b_nc(m, k), 0.0);
        for (std::size_t i = 0; i < config_.K; ++i) EXPECT_EQ(stats_.c_nc(k, i, m), 0.0);
      }
  for (const auto& C : stats_.coh) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12 * std::max(1e-30, C.norm()));
  }
}

TEST_F(StatisticsTest, DeterministicPerSeed) {
  auto c = config_;
  c.mc_trials = 200;
  const auto a = estimate_statistics(scenario_.spatial, scenario_.pilots, scenario_.topology.serving, c, 5);
  const auto b = estimate_statistics(scenario_.spatial, scenario_.pilots, scenario_.topology.serving, c, 5);
  EXPECT_EQ(a.b, b.b);
  for (std::size_t j = 0; j < a.coh.size(); ++j) EXPECT_EQ(a.coh[j], b.coh[j]);
  EXPECT_EQ(a.trials, 200u);
}

}  // namespace
}  // namespace cfmimo::chanstat
