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
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cfmimo/cfmimo.hpp"

namespace cfmimo::testing {

// sqrt(p tau_p tr(R Psi^{-1} R)) per AP/UE pair, built directly from the
// covariances and pilot assignment.
inline Eigen::MatrixXd closed_form_signal_mean(const netgen::Scenario& s) {
  const auto& c = s.config;
  const std::size_t M = s.spatial.num_aps, K = s.spatial.num_ues;
  const auto N = static_cast<Eigen::Index>(s.spatial.antennas);
  const double tp = static_cast<double>(s.pilots.tau_p);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      netgen::CMatrix psi = c.noise_power_W() * netgen::CMatrix::Identity(N, N);
      for (std::size_t l = 0; l < K; ++l)
        if (s.pilots.pilot_index[l] == s.pilots.pilot_index[k]) psi += tp * c.pilot_power_W * s.spatial.R(m, l);
      const auto& R = s.spatial.R(m, k);
      const netgen::CMatrix x = psi.ldlt().solve(R);
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
          std::sqrt(c.pilot_power_W * tp * (R * x).trace().real());
    }
  }
  return out;
}

// Interference written as "total received second moment minus desired
// signal", summed UE by UE and AP pair by AP pair.
inline double explicit_sinr_cjt(const chanstat::PrecodingStatistics& st, const rates::PowerSolution& p,
                                const rates::ModeAssignment& modes, std::size_t i) {
  const std::size_t K = st.num_ues();
  const std::size_t M = st.num_aps();
  double ds = 0.0;
  for (std::size_t m = 0; m < M; ++m) ds += std::sqrt(p.at(m, i)) * st.b_nc(m, i);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (modes.is_cjt(k)) {
      Eigen::MatrixXd E = st.C_coh_full(k, i);
      if (k == i)
        for (std::size_t l = 0; l < M; ++l)
          for (std::size_t r = 0; r < M; ++r)
            E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r)) += st.b_nc(l, i) * st.b_nc(r, i);
      for (std::size_t l = 0; l < M; ++l)
        for (std::size_t r = 0; r < M; ++r)
          total += std::sqrt(p.at(l, k) * p.at(r, k)) * E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r));
    } else {
      for (std::size_t m = 0; m < M; ++m) total += p.at(m, k) * st.c_nc(k, i, m);
    }
  }
  return ds * ds / (total - ds * ds + st.sigma2_dl_W);
}

// Full received second moment minus the desired streams already decoded
// (serving APs up to and including m in ascending order).
inline double explicit_sinr_ncjt(const chanstat::PrecodingStatistics& st, const rates::PowerSolution& p,
                                 const rates::ModeAssignment& modes, std::size_t s, std::size_t m) {
  const std::size_t K = st.num_ues();
  const std::size_t M = st.num_aps();
  double F = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (modes.is_cjt(k)) {
      const Eigen::MatrixXd E = st.C_coh_full(k, s);
      for (std::size_t l = 0; l < M; ++l)
        for (std::size_t r = 0; r < M; ++r)
          F += std::sqrt(p.at(l, k) * p.at(r, k)) * E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r));
    } else {
      for (std::size_t n = 0; n < M; ++n) F += p.at(n, k) * st.c_nc(k, s, n);
    }
  }
  for (std::size_t n = 0; n <= m; ++n)
    if (st.serving.serves(n, s)) F -= p.at(n, s) * st.b_nc(n, s) * st.b_nc(n, s);
  return p.at(m, s) * st.b_nc(m, s) * st.b_nc(m, s) / (F + st.sigma2_dl_W);
}

// Largest sum of per-flow rates mu_f <= r_f under per-AP caps for at most
// two flows; `carried[f]` lists the APs that carry flow f.
inline double best_capped_sum(const std::vector<double>& r, const std::vector<std::vector<bool>>& carried, double cap) {
  if (r.size() == 1) return std::min(r[0], cap);
  const std::size_t M = carried[0].size();
  const double hi = std::min(r[0], cap);
  double best = 0.0;
  for (double mu1 : {0.0, hi, std::clamp(cap - r[1], 0.0, hi)}) {
    double mu2 = r[1];
    for (std::size_t m = 0; m < M; ++m)
      if (carried[1][m]) mu2 = std::min(mu2, cap - (carried[0][m] ? mu1 : 0.0));
    best = std::max(best, mu1 + std::max(0.0, mu2));
  }
  return best;
}

// Exhaustive search over at most two serving-pair powers: a uniform grid on
// [0, P_max] followed by a finer grid around the best cell.
inline double grid_search_optimum(const chanstat::PrecodingStatistics& st, const rates::ModeAssignment& modes,
                                  const SystemConfig& config, int steps = 400) {
  const std::size_t M = st.num_aps(), K = st.num_ues();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < K; ++k)
    for (auto m : st.serving.aps_of_ue[k]) pairs.emplace_back(m, k);
  if (pairs.empty() || pairs.size() > 2) throw ConfigError("grid search supports one or two power variables");
  const auto flows = sca::enumerate_flows(st.serving, modes);
  if (flows.size() > 2) throw ConfigError("grid search supports at most two flows");
  std::vector<std::vector<bool>> carried;
  for (const auto& f : flows) {
    std::vector<bool> row(M, false);
    for (std::size_t m = 0; m < M; ++m) row[m] = f.cjt() ? st.serving.serves(m, f.ue) : f.ap == m;
    carried.push_back(row);
  }
  const double pmax = config.max_ap_power_W;
  auto value = [&](double a, double b) {
    rates::PowerSolution p;
    p.p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
    const double v[2] = {a, b};
    for (std::size_t j = 0; j < pairs.size(); ++j)
      p.p(static_cast<Eigen::Index>(pairs[j].first), static_cast<Eigen::Index>(pairs[j].second)) = v[j];
    for (Eigen::Index m = 0; m < p.p.rows(); ++m)
      if (p.p.row(m).sum() > pmax * (1.0 + 1e-12)) return -1.0;
    const auto rep = rates::evaluate(st, p, modes, config);
    std::vector<double> r;
    for (const auto& f : flows)
      r.push_back(f.cjt() ? rep.rate_ue[f.ue]
                          : rep.rate_nc(static_cast<Eigen::Index>(f.ap), static_cast<Eigen::Index>(f.ue)));
    return best_capped_sum(r, carried, config.fronthaul_cap_bpsHz);
  };
  const bool two = pairs.size() == 2;
  double best = -1.0, ba = 0.0, bb = 0.0;
  auto scan = [&](double a0, double a1, double b0, double b1, int n) {
    for (int i = 0; i <= n; ++i) {
      const double a = std::clamp(a0 + (a1 - a0) * i / n, 0.0, pmax);
      for (int j = 0; j <= (two ? n : 0); ++j) {
        const double b = two ? std::clamp(b0 + (b1 - b0) * j / n, 0.0, pmax) : 0.0;
        const double v = value(a, b);
        if (v > best) {
          best = v;
          ba = a;
          bb = b;
        }
      }
    }
  };
  scan(0.0, pmax, 0.0, pmax, steps);
  const double h = pmax / steps;
  scan(ba - h, ba + h, bb - h, bb + h, 100);
  return best;
}

// Per-UE ergodic rate of a receiver that knows every instantaneous effective
// gain h_{m,i}^H w_{m,k}; NCJT streams are decoded in ascending AP order.
inline std::vector<double> genie_rates(const netgen::Scenario& s, const chanstat::PrecodingStatistics& st,
                                       const rates::PowerSolution& power, const rates::ModeAssignment& modes,
                                       std::size_t trials, std::uint64_t seed) {
  const auto& c = s.config;
  const std::size_t M = s.spatial.num_aps, K = s.spatial.num_ues;
  const chanstat::ChannelSampler sampler(s.spatial, s.pilots, c);
  const auto nc = chanstat::norm_constants(s.spatial, s.pilots, c);
  const double prelog = c.prelog();
  std::vector<double> rate(K, 0.0);
  chanstat::ChannelRealization r;
  std::vector<std::complex<double>> g(M * K * K);  // [(m * K + i) * K + k]: h_{m,i}^H w_{m,k}
  for (std::size_t t = 0; t < trials; ++t) {
    sampler.sample(derive_seed(seed, Stream::kMonteCarlo, {t}), r);
    const auto w = chanstat::cb_precoder(r, st.serving, nc);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t i = 0; i < K; ++i)
        for (std::size_t k = 0; k < K; ++k) g[(m * K + i) * K + k] = r.channel(m, i).dot(w[m * K + k]);
    auto gain = [&](std::size_t m, std::size_t i, std::size_t k) { return g[(m * K + i) * K + k]; };
    for (std::size_t i = 0; i < K; ++i) {
      std::vector<double> part(K, 0.0);  // received power from each UE's streams at UE i
      for (std::size_t k = 0; k < K; ++k) {
        if (modes.is_cjt(k)) {
          std::complex<double> sum = 0.0;
          for (std::size_t m = 0; m < M; ++m) sum += std::sqrt(power.at(m, k)) * gain(m, i, k);
          part[k] = std::norm(sum);
        } else {
          for (std::size_t m = 0; m < M; ++m) part[k] += power.at(m, k) * std::norm(gain(m, i, k));
        }
      }
      double others = st.sigma2_dl_W;
      for (std::size_t k = 0; k < K; ++k)
        if (k != i) others += part[k];
      if (modes.is_cjt(i)) {
        rate[i] += prelog * std::log2(1.0 + part[i] / others);
      } else {
        double remaining = part[i];
        for (auto m : st.serving.aps_of_ue[i]) {
          const double sig = power.at(m, i) * std::norm(gain(m, i, i));
          remaining -= sig;
          rate[i] += prelog * std::log2(1.0 + sig / (others + std::max(0.0, remaining)));
        }
      }
    }
  }
  for (auto& v : rate) v /= static_cast<double>(trials);
  return rate;
}

}  // namespace cfmimo::testing
