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
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "cfmimo/chanstat/estimation.hpp"
#include "cfmimo/core/config.hpp"
#include "cfmimo/core/csv.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/netgen/topology.hpp"

namespace cfmimo::chanstat {

inline constexpr std::size_t kMinRecommendedTrials = 100;
inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

// Deterministic precoding moments (power coefficients excluded).
//
// Matrices attached to an interfering UE k live on its serving set M_k in
// ascending AP order ("local" coordinates); entries for APs outside M_k are
// structurally zero because w_{m,k} = 0 there.
//
//   b(m, i)        = Re E[h_{m,i}^H w_{m,i}],           m in M_i
//   coh(k, i)      = Re E[g g^H] with g_a = h_{M_k[a],i}^H w_{M_k[a],k}   (k != i)
//                    Re E[g g^H] - b_i b_i^T                               (k == i)
//   c_nc(k, i, m)  = E[|h_{m,i}^H w_{m,k}|^2]
//   var_nc(m, s)   = E[|h_{m,s}^H w_{m,s}|^2] - b(m, s)^2
struct PrecodingStatistics {
  netgen::ServingSets serving;
  double sigma2_dl_W = 0.0;
  Eigen::MatrixXd b;                 // M x K
  std::vector<Eigen::MatrixXd> coh;  // [k * K + i], |M_k| x |M_k|
  // Monte Carlo bookkeeping; empty for hand-built statistics.
  std::size_t trials = 0;
  bool low_trial_count = false;
  Eigen::MatrixXd b_stderr;                 // M x K
  std::vector<Eigen::MatrixXd> coh_stderr;  // standard error of the raw second moment
  Eigen::MatrixXd b_closed_form;            // sqrt(E||h_hat||^2), M x K

  [[nodiscard]] std::size_t num_aps() const { return serving.num_aps; }
  [[nodiscard]] std::size_t num_ues() const { return serving.num_ues; }

  // Zeroed statistics over the given association.
  static PrecodingStatistics zeros(const netgen::ServingSets& serving, double sigma2) {
    PrecodingStatistics s;
    s.serving = serving;
    s.sigma2_dl_W = sigma2;
    const auto M = static_cast<Eigen::Index>(serving.num_aps);
    const auto K = static_cast<Eigen::Index>(serving.num_ues);
    s.b = Eigen::MatrixXd::Zero(M, K);
    s.coh.resize(serving.num_ues * serving.num_ues);
    for (std::size_t k = 0; k < serving.num_ues; ++k) {
      const auto n = static_cast<Eigen::Index>(serving.aps_of_ue[k].size());
      for (std::size_t i = 0; i < serving.num_ues; ++i) s.coh[k * serving.num_ues + i] = Eigen::MatrixXd::Zero(n, n);
    }
    return s;
  }

  [[nodiscard]] std::size_t local_index(std::size_t k, std::size_t m) const {
    const auto& list = serving.aps_of_ue[k];
    const auto it = std::lower_bound(list.begin(), list.end(), m);
    if (it == list.end() || *it != m) return kNoIndex;
    return static_cast<std::size_t>(it - list.begin());
  }

  [[nodiscard]] const Eigen::MatrixXd& C_coh(std::size_t k, std::size_t i) const {
    return coh[k * num_ues() + i];
  }
  Eigen::MatrixXd& C_coh(std::size_t k, std::size_t i) { return coh[k * num_ues() + i]; }

  // b_i restricted to M_i.
  [[nodiscard]] Eigen::VectorXd b_local(std::size_t i) const {
    const auto& list = serving.aps_of_ue[i];
    Eigen::VectorXd v(static_cast<Eigen::Index>(list.size()));
    for (std::size_t a = 0; a < list.size(); ++a)
      v(static_cast<Eigen::Index>(a)) = b(static_cast<Eigen::Index>(list[a]), static_cast<Eigen::Index>(i));
    return v;
  }

  [[nodiscard]] double b_nc(std::size_t m, std::size_t s) const {
    return b(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s));
  }

  [[nodiscard]] double c_nc(std::size_t k, std::size_t i, std::size_t m) const {
    const auto a = local_index(k, m);
    if (a == kNoIndex) return 0.0;
    const auto ai = static_cast<Eigen::Index>(a);
    double v = C_coh(k, i)(ai, ai);
    if (k == i) v += b_nc(m, k) * b_nc(m, k);
    return v;
  }

  [[nodiscard]] double var_nc(std::size_t m, std::size_t s) const {
    const auto a = local_index(s, m);
    if (a == kNoIndex) return 0.0;
    return C_coh(s, s)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a));
  }

  // C_coh(k, i) embedded in an M x M matrix.
  [[nodiscard]] Eigen::MatrixXd C_coh_full(std::size_t k, std::size_t i) const {
    const auto& list = serving.aps_of_ue[k];
    const auto M = static_cast<Eigen::Index>(num_aps());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(M, M);
    const auto& c = C_coh(k, i);
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t r = 0; r < list.size(); ++r)
        out(static_cast<Eigen::Index>(list[a]), static_cast<Eigen::Index>(list[r])) =
            c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r));
    return out;
  }
};

// Symmetrizes and clamps negative eigenvalues to zero. Matrices that are
// already PSD are returned bit-for-bit after symmetrization.
inline Eigen::MatrixXd project_psd(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  if (S.size() == 0) return S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in PSD projection");
  if (eig.eigenvalues().minCoeff() >= 0.0) return S;
  const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

// Instantaneous precoded gains g(k, i, a) = h_{M_k[a], i}^H w_{M_k[a], k}
// for one channel realization.
class GainTensor {
 public:
  explicit GainTensor(const netgen::ServingSets& serving) : serving_(&serving), offset_(serving.num_ues + 1, 0) {
    for (std::size_t k = 0; k < serving.num_ues; ++k) offset_[k + 1] = offset_[k] + serving.aps_of_ue[k].size();
    g_.assign(offset_.back() * serving.num_ues, Complex{});
  }

  void compute(const ChannelRealization& r, const Eigen::MatrixXd& norm_consts) {
    const std::size_t K = serving_->num_ues;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& list = serving_->aps_of_ue[k];
      for (std::size_t a = 0; a < list.size(); ++a) {
        const std::size_t m = list[a];
        const double c = norm_consts(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
        if (!(c > 0.0)) throw NumericalError("degenerate link: zero estimate power on a serving pair");
        const double inv = 1.0 / std::sqrt(c);
        const auto& w = r.h_hat[m * K + k];
        Complex* row = &g_[(offset_[k] + a) * K];
        for (std::size_t i = 0; i < K; ++i) row[i] = r.h[m * K + i].dot(w) * inv;
      }
    }
  }

  [[nodiscard]] Complex operator()(std::size_t k, std::size_t i, std::size_t a) const {
    return g_[(offset_[k] + a) * serving_->num_ues + i];
  }

 private:
  const netgen::ServingSets* serving_;
  std::vector<std::size_t> offset_;
  std::vector<Complex> g_;
};

namespace detail {

// Running sums for one block of trials; merged block-wise into the totals
// so the reduction order is fixed by the trial count alone.
struct MomentSums {
  std::vector<double> b, b_sq, s, s_sq;
  void resize(std::size_t nb, std::size_t ns) {
    b.assign(nb, 0.0);
    b_sq.assign(nb, 0.0);
    s.assign(ns, 0.0);
    s_sq.assign(ns, 0.0);
  }
  void clear() {
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(b_sq.begin(), b_sq.end(), 0.0);
    std::fill(s.begin(), s.end(), 0.0);
    std::fill(s_sq.begin(), s_sq.end(), 0.0);
  }
  void add(const MomentSums& o) {
    for (std::size_t j = 0; j < b.size(); ++j) { b[j] += o.b[j]; b_sq[j] += o.b_sq[j]; }
    for (std::size_t j = 0; j < s.size(); ++j) { s[j] += o.s[j]; s_sq[j] += o.s_sq[j]; }
  }
};

inline double stderr_of_mean(double sum, double sum_sq, std::size_t n) {
  if (n < 2) return std::numeric_limits<double>::infinity();
  const double dn = static_cast<double>(n);
  const double mean = sum / dn;
  const double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
  return std::sqrt(var / dn);
}

}  // namespace detail

inline std::uint64_t trial_seed(std::uint64_t mc_seed, std::size_t trial) {
  return derive_seed(mc_seed, Stream::kMonteCarlo, {trial});
}

// Empirical means over `config.mc_trials` independent (channel, pilot noise)
// draws. Trial n uses trial_seed(mc_seed, n).
inline PrecodingStatistics estimate_statistics(const netgen::SpatialModel& spatial,
                                               const netgen::PilotAssignment& pilots,
                                               const netgen::ServingSets& serving,
                                               const SystemConfig& config, std::uint64_t mc_seed) {
  const std::size_t M = spatial.num_aps;
  const std::size_t K = spatial.num_ues;
  const std::size_t trials = config.mc_trials;
  if (trials < 1) throw ConfigError("mc_trials must be >= 1");

  const Eigen::MatrixXd nc = norm_constants(spatial, pilots, config);
  ChannelSampler sampler(spatial, pilots, config);
  GainTensor gains(serving);

  std::vector<std::size_t> n(K), sq_off(K + 1, 0), b_off(K + 1, 0);
  for (std::size_t k = 0; k < K; ++k) {
    n[k] = serving.aps_of_ue[k].size();
    sq_off[k + 1] = sq_off[k] + n[k] * n[k] * K;
    b_off[k + 1] = b_off[k] + n[k];
  }
  detail::MomentSums total, block;
  total.resize(b_off[K], sq_off[K]);
  block.resize(b_off[K], sq_off[K]);

  constexpr std::size_t kBlock = 128;
  ChannelRealization r;
  auto wanted = [&](std::size_t m, std::size_t k) { return serving.serves(m, k); };
  for (std::size_t t = 0; t < trials; ++t) {
    const auto seed = trial_seed(mc_seed, t);
    sampler.sample_channels(seed, r);
    sampler.estimate(r, seed, r, wanted);
    gains.compute(r, nc);

    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t a = 0; a < n[i]; ++a) {
        const double x = gains(i, i, a).real();
        block.b[b_off[i] + a] += x;
        block.b_sq[b_off[i] + a] += x * x;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t nk = n[k];
      for (std::size_t i = 0; i < K; ++i) {
        double* s = &block.s[sq_off[k] + i * nk * nk];
        double* s2 = &block.s_sq[sq_off[k] + i * nk * nk];
        for (std::size_t a = 0; a < nk; ++a) {
          const Complex ga = gains(k, i, a);
          for (std::size_t c = a; c < nk; ++c) {
            const double v = (ga * std::conj(gains(k, i, c))).real();
            s[a * nk + c] += v;
            s2[a * nk + c] += v * v;
          }
        }
      }
    }
    if ((t + 1) % kBlock == 0 || t + 1 == trials) {
      total.add(block);
      block.clear();
    }
  }

  PrecodingStatistics st = PrecodingStatistics::zeros(serving, config.noise_power_W());
  st.trials = trials;
  st.low_trial_count = trials < kMinRecommendedTrials;
  st.b_stderr = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
  st.b_closed_form = nc.cwiseMax(0.0).cwiseSqrt();
  st.coh_stderr.resize(K * K);
  const double dn = static_cast<double>(trials);

  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t a = 0; a < n[i]; ++a) {
      const auto m = static_cast<Eigen::Index>(serving.aps_of_ue[i][a]);
      const auto j = static_cast<Eigen::Index>(i);
      st.b(m, j) = total.b[b_off[i] + a] / dn;
      st.b_stderr(m, j) = detail::stderr_of_mean(total.b[b_off[i] + a], total.b_sq[b_off[i] + a], trials);
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t nk = n[k];
    const auto nn = static_cast<Eigen::Index>(nk);
    const Eigen::VectorXd bk = st.b_local(k);
    for (std::size_t i = 0; i < K; ++i) {
      const double* s = &total.s[sq_off[k] + i * nk * nk];
      const double* s2 = &total.s_sq[sq_off[k] + i * nk * nk];
      Eigen::MatrixXd raw(nn, nn), se(nn, nn);
      for (std::size_t a = 0; a < nk; ++a) {
        for (std::size_t c = a; c < nk; ++c) {
          const auto ia = static_cast<Eigen::Index>(a);
          const auto ic = static_cast<Eigen::Index>(c);
          raw(ia, ic) = raw(ic, ia) = s[a * nk + c] / dn;
          se(ia, ic) = se(ic, ia) = detail::stderr_of_mean(s[a * nk + c], s2[a * nk + c], trials);
        }
      }
      if (k == i) raw -= bk * bk.transpose();
      if (!raw.allFinite()) throw NumericalError("non-finite precoding moment");
      st.C_coh(k, i) = project_psd(raw);
      st.coh_stderr[k * K + i] = std::move(se);
    }
  }
  if (!st.b.allFinite()) throw NumericalError("non-finite precoding moment");
  return st;
}

inline PrecodingStatistics estimate_statistics(const netgen::SpatialModel& spatial,
                                               const netgen::PilotAssignment& pilots,
                                               const netgen::Topology& topology, const SystemConfig& config) {
  return estimate_statistics(spatial, pilots, topology.serving, config,
                             derive_seed(config.seed, Stream::kMonteCarlo));
}

// stats.csv: kind, ue_i (victim), ue_k (transmitting UE), ap_l, ap_r, value.
inline void write_statistics_csv(const PrecodingStatistics& st, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.header({"kind", "ue_i", "ue_k", "ap_l", "ap_r", "value"});
  const std::size_t K = st.num_ues();
  for (std::size_t i = 0; i < K; ++i)
    for (auto m : st.serving.aps_of_ue[i]) w.row("b_coh", i, i, m, m, st.b_nc(m, i));
  for (std::size_t k = 0; k < K; ++k) {
    const auto& list = st.serving.aps_of_ue[k];
    for (std::size_t i = 0; i < K; ++i) {
      const auto& c = st.C_coh(k, i);
      for (std::size_t a = 0; a < list.size(); ++a)
        for (std::size_t r = 0; r < list.size(); ++r)
          w.row("C_coh", i, k, list[a], list[r], c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)));
    }
  }
  for (std::size_t s = 0; s < K; ++s)
    for (auto m : st.serving.aps_of_ue[s]) w.row("b_nc", s, s, m, m, st.b_nc(m, s));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < K; ++i)
      for (auto m : st.serving.aps_of_ue[k]) w.row("c_nc", i, k, m, m, st.c_nc(k, i, m));
  for (std::size_t s = 0; s < K; ++s)
    for (auto m : st.serving.aps_of_ue[s]) w.row("var_nc", s, s, m, m, st.var_nc(m, s));
}

}  // namespace cfmimo::chanstat
