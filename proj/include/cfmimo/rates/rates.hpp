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
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cfmimo/chanstat/statistics.hpp"
#include "cfmimo/core/config.hpp"
#include "cfmimo/core/csv.hpp"
#include "cfmimo/core/errors.hpp"

namespace cfmimo::rates {

using chanstat::PrecodingStatistics;

enum class Mode { kNcjt = 0, kCjt = 1 };

// Partition of the UEs into G^coh (CJT) and G^nc (NCJT).
struct ModeAssignment {
  std::vector<Mode> mode;

  static ModeAssignment uniform(std::size_t K, Mode m) { return {std::vector<Mode>(K, m)}; }

  // '1' = CJT, '0' = NCJT, one character per UE.
  static ModeAssignment parse(std::string_view bits) {
    ModeAssignment a;
    for (char c : bits) {
      if (c == '1') a.mode.push_back(Mode::kCjt);
      else if (c == '0') a.mode.push_back(Mode::kNcjt);
      else throw ConfigError("mode string must contain only '0' and '1'");
    }
    return a;
  }

  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (auto m : mode) s.push_back(m == Mode::kCjt ? '1' : '0');
    return s;
  }

  [[nodiscard]] std::size_t size() const { return mode.size(); }
  [[nodiscard]] bool is_cjt(std::size_t k) const { return mode[k] == Mode::kCjt; }
  [[nodiscard]] std::vector<std::size_t> g_coh() const { return collect(Mode::kCjt); }
  [[nodiscard]] std::vector<std::size_t> g_nc() const { return collect(Mode::kNcjt); }
  [[nodiscard]] std::size_t count_cjt() const { return g_coh().size(); }

 private:
  [[nodiscard]] std::vector<std::size_t> collect(Mode m) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < mode.size(); ++k)
      if (mode[k] == m) out.push_back(k);
    return out;
  }
};

// Power coefficients p_{m,k} in watts, M x K.
struct PowerSolution {
  Eigen::MatrixXd p;

  [[nodiscard]] double at(std::size_t m, std::size_t k) const {
    return p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  }
  [[nodiscard]] double amplitude(std::size_t m, std::size_t k) const { return std::sqrt(at(m, k)); }

  // sqrt(p_{m,k}) over M_k, ascending AP order.
  [[nodiscard]] Eigen::VectorXd amplitudes(const netgen::ServingSets& s, std::size_t k) const {
    const auto& list = s.aps_of_ue[k];
    Eigen::VectorXd v(static_cast<Eigen::Index>(list.size()));
    for (std::size_t a = 0; a < list.size(); ++a) v(static_cast<Eigen::Index>(a)) = amplitude(list[a], k);
    return v;
  }

  // Equal split P_max / |K_m| over every AP's served UEs.
  static PowerSolution equal_split(const netgen::ServingSets& s, double max_ap_power) {
    PowerSolution out;
    out.p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.num_aps), static_cast<Eigen::Index>(s.num_ues));
    for (std::size_t m = 0; m < s.num_aps; ++m) {
      const auto& ues = s.ues_of_ap[m];
      for (auto k : ues)
        out.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
            max_ap_power / static_cast<double>(ues.size());
    }
    return out;
  }
};

// Throws ConfigError unless p >= 0, p = 0 off the serving sets and every
// AP's total stays within max_ap_power + tol.
inline void check_power(const PowerSolution& power, const netgen::ServingSets& s, double max_ap_power,
                        double tol = 1e-12) {
  if (power.p.rows() != static_cast<Eigen::Index>(s.num_aps) ||
      power.p.cols() != static_cast<Eigen::Index>(s.num_ues))
    throw ConfigError("power matrix has wrong shape");
  for (std::size_t m = 0; m < s.num_aps; ++m) {
    double total = 0.0;
    for (std::size_t k = 0; k < s.num_ues; ++k) {
      const double v = power.at(m, k);
      if (!(v >= 0.0)) throw ConfigError("negative or NaN power coefficient");
      if (v > 0.0 && !s.serves(m, k)) throw ConfigError("power assigned outside the serving set");
      total += v;
    }
    if (total > max_ap_power + tol) throw ConfigError("AP power budget exceeded");
  }
}

// Order in which an NCJT UE decodes the per-AP streams. Receives M_s
// (ascending) and returns a permutation of it.
using DecodeOrder = std::function<std::vector<std::size_t>(std::size_t ue, const std::vector<std::size_t>& serving)>;

inline std::vector<std::size_t> ascending_order(std::size_t, const std::vector<std::size_t>& serving) {
  return serving;
}

// Interference at `victim` from the transmissions of every other UE.
inline double cross_interference(const PrecodingStatistics& st, const PowerSolution& power,
                                 const ModeAssignment& modes, std::size_t victim) {
  double acc = 0.0;
  for (std::size_t k = 0; k < st.num_ues(); ++k) {
    if (k == victim) continue;
    if (modes.is_cjt(k)) {
      const Eigen::VectorXd a = power.amplitudes(st.serving, k);
      acc += a.dot(st.C_coh(k, victim) * a);
    } else {
      for (auto m : st.serving.aps_of_ue[k]) acc += power.at(m, k) * st.c_nc(k, victim, m);
    }
  }
  return acc;
}

// gamma_i = (p_i^T b_i)^2 / (sum_coh p_k^T C_ki p_k + sum_nc p_k^T diag(c_ki) p_k + sigma^2)
inline double sinr_cjt(const PrecodingStatistics& st, const PowerSolution& power, const ModeAssignment& modes,
                       std::size_t i) {
  if (!modes.is_cjt(i)) throw ModeError("sinr_cjt: UE " + std::to_string(i) + " is not in CJT mode");
  const Eigen::VectorXd a = power.amplitudes(st.serving, i);
  const double signal = a.dot(st.b_local(i));
  const double self = a.dot(st.C_coh(i, i) * a);
  const double den = cross_interference(st, power, modes, i) + self + st.sigma2_dl_W;
  return signal * signal / den;
}

// Stream of AP m to NCJT UE s; streams decoded before m (and m itself) only
// contribute their estimation-uncertainty variance.
inline double sinr_ncjt(const PrecodingStatistics& st, const PowerSolution& power, const ModeAssignment& modes,
                        std::size_t s, std::size_t m, const DecodeOrder& order = ascending_order) {
  if (modes.is_cjt(s)) throw ModeError("sinr_ncjt: UE " + std::to_string(s) + " is not in NCJT mode");
  if (!st.serving.serves(m, s)) throw DomainError("sinr_ncjt: AP " + std::to_string(m) + " does not serve UE");
  const auto seq = order(s, st.serving.aps_of_ue[s]);
  double self = 0.0;
  bool decoded = true;
  for (auto n : seq) {
    const double pn = power.at(n, s);
    self += pn * (decoded ? st.var_nc(n, s) : st.c_nc(s, s, n));
    if (n == m) decoded = false;
  }
  const double bm = st.b_nc(m, s);
  const double den = cross_interference(st, power, modes, s) + self + st.sigma2_dl_W;
  return power.at(m, s) * bm * bm / den;
}

inline double rate_from_sinr(double sinr, double prelog) {
  if (!(sinr >= 0.0)) throw DomainError("rate_from_sinr: SINR must be nonnegative");
  return prelog * std::log2(1.0 + sinr);
}

struct RateReport {
  double prelog = 0.0;
  std::vector<double> sinr_cjt;  // per UE; 0 for NCJT UEs
  Eigen::MatrixXd sinr_nc;       // M x K; nonzero only for NCJT serving pairs
  std::vector<double> rate_ue;   // r_i^coh or r_s^nc = sum_m r_{m,s}
  Eigen::MatrixXd rate_nc;       // per-stream r_{m,s}, M x K
  std::vector<double> fronthaul; // C_m
  double sum_rate = 0.0;
};

// C_m = sum over CJT UEs in K_m of r_i + sum over NCJT UEs in K_m of r_{m,s}.
inline double fronthaul_load(const RateReport& report, const ModeAssignment& modes,
                             const netgen::ServingSets& serving, std::size_t m) {
  double load = 0.0;
  for (auto k : serving.ues_of_ap[m]) {
    load += modes.is_cjt(k) ? report.rate_ue[k]
                            : report.rate_nc(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  }
  return load;
}

inline RateReport evaluate(const PrecodingStatistics& st, const PowerSolution& power, const ModeAssignment& modes,
                           const SystemConfig& config, const DecodeOrder& order = ascending_order) {
  const std::size_t K = st.num_ues();
  const std::size_t M = st.num_aps();
  if (modes.size() != K) throw ConfigError("mode assignment size does not match K");
  RateReport r;
  r.prelog = config.prelog();
  r.sinr_cjt.assign(K, 0.0);
  r.rate_ue.assign(K, 0.0);
  r.sinr_nc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
  r.rate_nc = r.sinr_nc;
  for (std::size_t k = 0; k < K; ++k) {
    if (modes.is_cjt(k)) {
      r.sinr_cjt[k] = sinr_cjt(st, power, modes, k);
      r.rate_ue[k] = rate_from_sinr(r.sinr_cjt[k], r.prelog);
    } else {
      for (auto m : st.serving.aps_of_ue[k]) {
        const auto i = static_cast<Eigen::Index>(m);
        const auto j = static_cast<Eigen::Index>(k);
        r.sinr_nc(i, j) = sinr_ncjt(st, power, modes, k, m, order);
        r.rate_nc(i, j) = rate_from_sinr(r.sinr_nc(i, j), r.prelog);
        r.rate_ue[k] += r.rate_nc(i, j);
      }
    }
    r.sum_rate += r.rate_ue[k];
  }
  r.fronthaul.resize(M);
  for (std::size_t m = 0; m < M; ++m) r.fronthaul[m] = fronthaul_load(r, modes, st.serving, m);
  return r;
}

// rates.csv (ue_id, mode, rate_bpsHz) and fronthaul.csv (ap_id, load_bpsHz, cap_bpsHz, slack).
inline void write_report_csv(const RateReport& r, const ModeAssignment& modes, double cap,
                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "rates.csv");
    w.header({"ue_id", "mode", "rate_bpsHz"});
    for (std::size_t k = 0; k < r.rate_ue.size(); ++k) w.row(k, modes.is_cjt(k) ? "CJT" : "NCJT", r.rate_ue[k]);
  }
  CsvWriter w(dir / "fronthaul.csv");
  w.header({"ap_id", "load_bpsHz", "cap_bpsHz", "slack"});
  for (std::size_t m = 0; m < r.fronthaul.size(); ++m) w.row(m, r.fronthaul[m], cap, cap - r.fronthaul[m]);
}

}  // namespace cfmimo::rates
