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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/netgen/covariance.hpp"
#include "cfmimo/netgen/pilots.hpp"
#include "cfmimo/netgen/topology.hpp"

namespace cfmimo::chanstat {

using netgen::CMatrix;
using netgen::CVector;
using Complex = std::complex<double>;

// True channels h and MMSE estimates h_hat, both indexed [m * K + k].
struct ChannelRealization {
  std::size_t num_aps = 0;
  std::size_t num_ues = 0;
  std::vector<CVector> h;
  std::vector<CVector> h_hat;
  std::uint64_t trial_seed = 0;

  [[nodiscard]] const CVector& channel(std::size_t m, std::size_t k) const { return h[m * num_ues + k]; }
  [[nodiscard]] const CVector& estimate(std::size_t m, std::size_t k) const {
    return h_hat[m * num_ues + k];
  }
};

// Psi_{t,m} = sum_{l: t_l = t} tau_p p_l R_{m,l} + sigma_ul^2 I, indexed [t * M + m].
struct PsiSet {
  std::size_t num_aps = 0;
  std::vector<CMatrix> psi;
  [[nodiscard]] const CMatrix& at(std::size_t pilot, std::size_t ap) const { return psi[pilot * num_aps + ap]; }
};

inline PsiSet compute_psi(const netgen::SpatialModel& spatial, const netgen::PilotAssignment& pilots,
                          const SystemConfig& config) {
  const auto n = static_cast<Eigen::Index>(spatial.antennas);
  const double tau_p = static_cast<double>(pilots.tau_p);
  const double noise = config.noise_power_W();
  PsiSet out;
  out.num_aps = spatial.num_aps;
  out.psi.reserve(pilots.tau_p * spatial.num_aps);
  for (std::size_t t = 0; t < pilots.tau_p; ++t) {
    const auto users = pilots.users_of(t);
    for (std::size_t m = 0; m < spatial.num_aps; ++m) {
      CMatrix psi = noise * CMatrix::Identity(n, n);
      for (auto l : users) psi += tau_p * config.pilot_power_W * spatial.R(m, l);
      out.psi.push_back(std::move(psi));
    }
  }
  return out;
}

// E[||h_hat_{m,k}||^2] = p tau_p tr(R Psi^{-1} R) for every pair, M x K.
inline Eigen::MatrixXd norm_constants(const netgen::SpatialModel& spatial,
                                      const netgen::PilotAssignment& pilots, const SystemConfig& config) {
  const auto psi = compute_psi(spatial, pilots, config);
  const double scale = config.pilot_power_W * static_cast<double>(pilots.tau_p);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spatial.num_aps), static_cast<Eigen::Index>(spatial.num_ues));
  for (std::size_t m = 0; m < spatial.num_aps; ++m) {
    for (std::size_t k = 0; k < spatial.num_ues; ++k) {
      const auto& R = spatial.R(m, k);
      Eigen::LLT<CMatrix> llt(psi.at(pilots.pilot_index[k], m));
      const CMatrix x = llt.solve(R);
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = scale * (R * x).trace().real();
    }
  }
  return out;
}

// A with A A^H = R from the eigendecomposition; small negative eigenvalues
// from rounding are clamped, materially negative ones are rejected.
inline CMatrix covariance_factor(const CMatrix& R) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(R);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const double tol = 1e-12 * std::abs(R.trace().real());
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -tol) throw NumericalError("covariance matrix is not positive semidefinite");
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  return eig.eigenvectors() * lambda.asDiagonal();
}

namespace detail {

inline void fill_cn(CVector& v, Rng& rng, double variance) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * variance));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = Complex(re, im);
  }
}

}  // namespace detail

// Precomputes square-root factors and MMSE filters so that each trial costs
// only matrix-vector products.
class ChannelSampler {
 public:
  ChannelSampler(const netgen::SpatialModel& spatial, const netgen::PilotAssignment& pilots,
                 const SystemConfig& config)
      : M_(spatial.num_aps),
        K_(spatial.num_ues),
        N_(static_cast<Eigen::Index>(spatial.antennas)),
        tau_p_(pilots.tau_p),
        pilot_index_(pilots.pilot_index),
        pilot_users_(pilots.tau_p),
        pilot_amp_(std::sqrt(config.pilot_power_W)),
        noise_var_(static_cast<double>(pilots.tau_p) * config.noise_power_W()) {
    for (std::size_t t = 0; t < tau_p_; ++t) pilot_users_[t] = pilots.users_of(t);
    const auto psi = compute_psi(spatial, pilots, config);
    factors_.reserve(M_ * K_);
    filters_.reserve(M_ * K_);
    for (std::size_t m = 0; m < M_; ++m) {
      for (std::size_t k = 0; k < K_; ++k) {
        const auto& R = spatial.R(m, k);
        factors_.push_back(covariance_factor(R));
        Eigen::LLT<CMatrix> llt(psi.at(pilot_index_[k], m));
        if (llt.info() != Eigen::Success) throw NumericalError("singular pilot correlation matrix");
        // sqrt(p_k) R Psi^{-1} = sqrt(p_k) (Psi^{-1} R)^H
        filters_.push_back(pilot_amp_ * llt.solve(R).adjoint());
      }
    }
  }

  [[nodiscard]] std::size_t num_aps() const { return M_; }
  [[nodiscard]] std::size_t num_ues() const { return K_; }

  // h_{m,k} = A_{m,k} z with z ~ CN(0, I), all pairs.
  void sample_channels(std::uint64_t trial_seed, ChannelRealization& out) const {
    prepare(out, trial_seed);
    auto rng = make_rng(trial_seed, Stream::kChannel);
    CVector z(N_);
    for (std::size_t idx = 0; idx < M_ * K_; ++idx) {
      detail::fill_cn(z, rng, 1.0);
      out.h[idx].noalias() = factors_[idx] * z;
    }
  }

  // Projects the received pilot block onto each pilot sequence and applies
  // the MMSE filter. Only pairs with `wanted(m, k)` are estimated; the rest
  // are left at zero.
  template <class Pred>
  void estimate(const ChannelRealization& in, std::uint64_t trial_seed, ChannelRealization& out,
                Pred wanted) const {
    if (&in != &out) {
      prepare(out, trial_seed);
      out.h = in.h;
    }
    auto rng = make_rng(trial_seed, Stream::kPilotNoise);
    CVector y(N_);
    const double tau_p = static_cast<double>(tau_p_);
    for (std::size_t m = 0; m < M_; ++m) {
      for (std::size_t t = 0; t < tau_p_; ++t) {
        detail::fill_cn(y, rng, noise_var_);
        for (auto l : pilot_users_[t]) y += (pilot_amp_ * tau_p) * in.h[m * K_ + l];
        for (auto k : pilot_users_[t]) {
          if (!wanted(m, k)) {
            out.h_hat[m * K_ + k].setZero();
            continue;
          }
          out.h_hat[m * K_ + k].noalias() = filters_[m * K_ + k] * y;
        }
      }
    }
  }

  void sample(std::uint64_t trial_seed, ChannelRealization& out) const {
    sample_channels(trial_seed, out);
    estimate(out, trial_seed, out, [](std::size_t, std::size_t) { return true; });
  }

 private:
  void prepare(ChannelRealization& r, std::uint64_t trial_seed) const {
    r.num_aps = M_;
    r.num_ues = K_;
    r.trial_seed = trial_seed;
    if (r.h.size() != M_ * K_) r.h.assign(M_ * K_, CVector::Zero(N_));
    if (r.h_hat.size() != M_ * K_) r.h_hat.assign(M_ * K_, CVector::Zero(N_));
  }

  std::size_t M_;
  std::size_t K_;
  Eigen::Index N_;
  std::size_t tau_p_;
  std::vector<std::size_t> pilot_index_;
  std::vector<std::vector<std::size_t>> pilot_users_;
  double pilot_amp_;
  double noise_var_;
  std::vector<CMatrix> factors_;
  std::vector<CMatrix> filters_;
};

inline ChannelRealization sample_true_channels(const netgen::SpatialModel& spatial,
                                               std::uint64_t trial_seed) {
  ChannelRealization r;
  r.num_aps = spatial.num_aps;
  r.num_ues = spatial.num_ues;
  r.trial_seed = trial_seed;
  r.h.reserve(spatial.num_aps * spatial.num_ues);
  auto rng = make_rng(trial_seed, Stream::kChannel);
  CVector z(static_cast<Eigen::Index>(spatial.antennas));
  for (std::size_t idx = 0; idx < spatial.num_aps * spatial.num_ues; ++idx) {
    detail::fill_cn(z, rng, 1.0);
    r.h.push_back(covariance_factor(spatial.covariances[idx]) * z);
  }
  r.h_hat.assign(r.h.size(), CVector::Zero(z.size()));
  return r;
}

// Fills realization.h_hat for every AP/UE pair.
inline void mmse_estimate(ChannelRealization& realization, const netgen::SpatialModel& spatial,
                          const netgen::PilotAssignment& pilots, const SystemConfig& config,
                          std::uint64_t trial_seed) {
  ChannelSampler sampler(spatial, pilots, config);
  sampler.estimate(realization, trial_seed, realization, [](std::size_t, std::size_t) { return true; });
}

// Conjugate beamforming w = h_hat / sqrt(E||h_hat||^2) on serving pairs, zero elsewhere.
inline std::vector<CVector> cb_precoder(const ChannelRealization& realization,
                                        const netgen::ServingSets& serving,
                                        const Eigen::MatrixXd& norm_consts) {
  const std::size_t K = realization.num_ues;
  std::vector<CVector> w(realization.h_hat.size());
  for (std::size_t m = 0; m < realization.num_aps; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto& est = realization.h_hat[m * K + k];
      if (!serving.serves(m, k)) {
        w[m * K + k] = CVector::Zero(est.size());
        continue;
      }
      const double c = norm_consts(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
      if (!(c > 0.0))
        throw NumericalError("degenerate link: zero estimate power for AP " + std::to_string(m) +
                             ", UE " + std::to_string(k));
      w[m * K + k] = est / std::sqrt(c);
    }
  }
  return w;
}

}  // namespace cfmimo::chanstat
