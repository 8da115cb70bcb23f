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
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfmimo/chanstat/statistics.hpp"
#include "cfmimo/core/config.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/rates/rates.hpp"
#include "cfmimo/sca/ipm.hpp"
#include "cfmimo/sca/program.hpp"
#include "cfmimo/sca/surrogate.hpp"

namespace cfmimo::sca {

using chanstat::PrecodingStatistics;
using rates::ModeAssignment;

// A rate-carrying stream: one per CJT UE, one per (serving AP, NCJT UE).
struct Flow {
  std::size_t ue = 0;
  std::size_t ap = chanstat::kNoIndex;  // kNoIndex for CJT flows
  [[nodiscard]] bool cjt() const { return ap == chanstat::kNoIndex; }
  friend bool operator==(const Flow&, const Flow&) = default;
};

// CJT UEs ascending, then NCJT streams by (UE, AP) ascending.
inline std::vector<Flow> enumerate_flows(const netgen::ServingSets& serving, const ModeAssignment& modes) {
  std::vector<Flow> flows;
  for (auto i : modes.g_coh()) flows.push_back({i, chanstat::kNoIndex});
  for (auto s : modes.g_nc())
    for (auto m : serving.aps_of_ue[s]) flows.push_back({s, m});
  return flows;
}

// Iterate of the successive convex approximation. Physical units: amplitude
// in sqrt(W), theta in W, xi as a linear SINR, mu in bit/s/Hz.
struct ScaState {
  int iteration = 0;
  Eigen::MatrixXd amplitude;  // M x K
  std::vector<Flow> flows;
  Eigen::VectorXd mu;
  Eigen::VectorXd xi;
  Eigen::VectorXd theta;
  double objective = 0.0;
  std::vector<double> history;  // objective after each solved subproblem
};

// Per-UE quadratic blocks p_k^T Q_k p_k (local to M_k) whose sum is the
// interference-plus-self-distortion term of one flow, without noise.
struct InterferenceModel {
  std::vector<std::size_t> ues;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<bool> diagonal;
};

inline InterferenceModel interference_model(const PrecodingStatistics& st, const ModeAssignment& modes,
                                            const Flow& f, const rates::DecodeOrder& order) {
  InterferenceModel im;
  const std::size_t v = f.ue;
  for (std::size_t k = 0; k < st.num_ues(); ++k) {
    const auto& list = st.serving.aps_of_ue[k];
    const auto n = static_cast<Eigen::Index>(list.size());
    if (k == v) {
      if (f.cjt()) {
        im.blocks.push_back(st.C_coh(v, v));
        im.diagonal.push_back(false);
      } else {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        const auto seq = order(v, list);
        bool decoded = true;
        for (auto m : seq) {
          const auto a = static_cast<Eigen::Index>(st.local_index(v, m));
          d(a, a) = decoded ? st.var_nc(m, v) : st.c_nc(v, v, m);
          if (m == f.ap) decoded = false;
        }
        im.blocks.push_back(std::move(d));
        im.diagonal.push_back(true);
      }
    } else if (modes.is_cjt(k)) {
      im.blocks.push_back(st.C_coh(k, v));
      im.diagonal.push_back(false);
    } else {
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index a = 0; a < n; ++a) d(a, a) = st.c_nc(k, v, list[static_cast<std::size_t>(a)]);
      im.blocks.push_back(std::move(d));
      im.diagonal.push_back(true);
    }
    im.ues.push_back(k);
  }
  return im;
}

inline Eigen::VectorXd local_amplitudes(const Eigen::MatrixXd& amplitude, const netgen::ServingSets& s,
                                        std::size_t k) {
  const auto& list = s.aps_of_ue[k];
  Eigen::VectorXd v(static_cast<Eigen::Index>(list.size()));
  for (std::size_t a = 0; a < list.size(); ++a)
    v(static_cast<Eigen::Index>(a)) = amplitude(static_cast<Eigen::Index>(list[a]), static_cast<Eigen::Index>(k));
  return v;
}

inline double evaluate_interference(const InterferenceModel& im, const Eigen::MatrixXd& amplitude,
                                    const netgen::ServingSets& s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < im.ues.size(); ++j) {
    const Eigen::VectorXd a = local_amplitudes(amplitude, s, im.ues[j]);
    acc += a.dot(im.blocks[j] * a);
  }
  return acc;
}

// Signal vector of a flow over the transmitting UE's serving set.
inline Eigen::VectorXd flow_signal(const PrecodingStatistics& st, const Flow& f) {
  if (f.cjt()) return st.b_local(f.ue);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(st.serving.aps_of_ue[f.ue].size()));
  b(static_cast<Eigen::Index>(st.local_index(f.ue, f.ap))) = st.b_nc(f.ap, f.ue);
  return b;
}

struct ScaOptions {
  int max_iterations = 30;           // T_max
  double relative_tolerance = 1e-4;  // stop when |obj_t - obj_{t-1}| < tol * |obj_{t-1}|
  double interior_shift = 1e-3;      // pull toward the equal split for a strictly feasible start
  double start_margin = 0.02;        // relative slack of the subproblem start
  double dead_flow_sinr = 1e-12;     // anchors below this SINR carry no rate this iteration
  IpmOptions ipm{};
  rates::DecodeOrder order = rates::ascending_order;
};

// Convex program of one iteration plus the bookkeeping that maps its
// normalized variables back to physical quantities.
//
// Normalization: x_{m,k} = amplitude / sqrt(P_max); xi = f0 * xi_hat,
// theta = theta0 * theta_hat and mu = r0 * mu_hat with (f0, theta0) the
// anchor SINR and interference proxy of each flow and r0 = prelog log2(1 + f0).
struct Subproblem {
  ConvexProgram program;
  std::vector<Flow> flows;
  std::vector<bool> active;
  std::vector<Eigen::Index> mu_var, xi_var, theta_var;  // -1 when inactive
  std::vector<double> xi_scale, theta_scale, mu_scale;
  Eigen::MatrixXi power_var;  // M x K, -1 off the serving sets
  double amp_scale = 0.0;
  std::size_t num_power_vars = 0;
  std::size_t num_active_flows = 0;
  const PrecodingStatistics* stats = nullptr;
  std::vector<InterferenceModel> interference;
};

inline Subproblem assemble_subproblem(const PrecodingStatistics& st, const ModeAssignment& modes,
                                      const SystemConfig& config, const ScaState& anchor,
                                      const ScaOptions& opt = {}) {
  const std::size_t M = st.num_aps();
  const std::size_t K = st.num_ues();
  const auto& serving = st.serving;
  Subproblem sp;
  sp.stats = &st;
  sp.flows = enumerate_flows(serving, modes);
  if (anchor.flows != sp.flows) throw ConfigError("SCA anchor does not match the mode assignment");
  const std::size_t F = sp.flows.size();
  const double pmax = config.max_ap_power_W;
  const double cap = config.fronthaul_cap_bpsHz;
  if (!(pmax >= 0.0)) throw ConfigError("max_ap_power_W must be nonnegative");
  if (!(cap > 0.0)) throw ConfigError("fronthaul_cap_bpsHz must be positive");
  sp.amp_scale = std::sqrt(pmax);

  // Power variables for every serving pair.
  sp.power_var = Eigen::MatrixXi::Constant(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K), -1);
  Eigen::Index nv = 0;
  if (pmax > 0.0) {
    for (std::size_t k = 0; k < K; ++k)
      for (auto m : serving.aps_of_ue[k])
        sp.power_var(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = static_cast<int>(nv++);
  }
  sp.num_power_vars = static_cast<std::size_t>(nv);

  sp.active.assign(F, false);
  sp.mu_var.assign(F, -1);
  sp.xi_var.assign(F, -1);
  sp.theta_var.assign(F, -1);
  sp.xi_scale.assign(F, 0.0);
  sp.theta_scale.assign(F, 0.0);
  sp.mu_scale.assign(F, 0.0);
  const double log_weight = config.prelog() / std::numbers::ln2;
  sp.interference.resize(F);
  std::vector<AffineSurrogate> surrogate(F);
  for (std::size_t f = 0; f < F; ++f) {
    sp.interference[f] = interference_model(st, modes, sp.flows[f], opt.order);
    const Eigen::VectorXd b = flow_signal(st, sp.flows[f]);
    const double theta0 = anchor.theta(static_cast<Eigen::Index>(f));
    if (pmax <= 0.0 || b.maxCoeff() <= 0.0 || !(theta0 > 0.0)) continue;
    const Eigen::VectorXd p0 = local_amplitudes(anchor.amplitude, serving, sp.flows[f].ue);
    surrogate[f] = surrogate_coh(p0, theta0, b);
    if (!(surrogate[f].value_at_anchor > opt.dead_flow_sinr)) continue;
    sp.active[f] = true;
    sp.xi_scale[f] = surrogate[f].value_at_anchor;
    sp.theta_scale[f] = theta0;
    sp.mu_scale[f] = log_weight * std::log1p(sp.xi_scale[f]);
    sp.mu_var[f] = nv++;
    sp.xi_var[f] = nv++;
    sp.theta_var[f] = nv++;
    ++sp.num_active_flows;
  }

  auto& prog = sp.program;
  prog.num_vars = nv;
  prog.cost = Eigen::VectorXd::Zero(nv);
  for (std::size_t f = 0; f < F; ++f) {
    if (!sp.active[f]) continue;
    const auto& flow = sp.flows[f];
    prog.cost(sp.mu_var[f]) = -sp.mu_scale[f];

    // prelog * log2(1 + xi) >= mu
    Constraint lr;
    lr.kind = Constraint::Kind::kLogRate;
    lr.family = Family::kLogRate;
    lr.support = {sp.mu_var[f], sp.xi_var[f]};
    lr.linear = Eigen::Vector2d::Zero();
    lr.weight = log_weight / sp.mu_scale[f];
    lr.scale = sp.xi_scale[f];
    prog.constraints.push_back(std::move(lr));

    // xi <= F(p, theta): xi_hat - (amp / f0) grad_p^T x + theta_hat <= 0
    {
      Constraint c;
      c.kind = Constraint::Kind::kAffine;
      c.family = Family::kSinrLink;
      std::vector<std::pair<Eigen::Index, double>> terms;
      const auto& list = serving.aps_of_ue[flow.ue];
      const double coef = sp.amp_scale / sp.xi_scale[f];
      for (std::size_t a = 0; a < list.size(); ++a) {
        const double gpa = surrogate[f].grad_p(static_cast<Eigen::Index>(a));
        if (gpa != 0.0) terms.emplace_back(sp.power_var(static_cast<Eigen::Index>(list[a]), static_cast<Eigen::Index>(flow.ue)), -coef * gpa);
      }
      terms.emplace_back(sp.xi_var[f], 1.0);
      terms.emplace_back(sp.theta_var[f], 1.0);
      std::sort(terms.begin(), terms.end());
      c.linear.resize(static_cast<Eigen::Index>(terms.size()));
      for (std::size_t j = 0; j < terms.size(); ++j) {
        c.support.push_back(terms[j].first);
        c.linear(static_cast<Eigen::Index>(j)) = terms[j].second;
      }
      prog.constraints.push_back(std::move(c));
    }

    // theta >= q(p) + sigma^2, divided by theta0
    {
      Constraint c;
      c.kind = Constraint::Kind::kQuadratic;
      c.family = Family::kInterference;
      const auto& im = sp.interference[f];
      const double qscale = pmax / sp.theta_scale[f];
      std::vector<Eigen::Index> support;
      for (std::size_t j = 0; j < im.ues.size(); ++j)
        for (auto m : serving.aps_of_ue[im.ues[j]])
          support.push_back(sp.power_var(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(im.ues[j])));
      support.push_back(sp.theta_var[f]);
      std::vector<Eigen::Index> order(support.size());
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<Eigen::Index>(j);
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return support[static_cast<std::size_t>(a)] < support[static_cast<std::size_t>(b)];
      });
      std::vector<Eigen::Index> pos(support.size());
      for (std::size_t j = 0; j < order.size(); ++j) pos[static_cast<std::size_t>(order[j])] = static_cast<Eigen::Index>(j);
      c.support.resize(support.size());
      for (std::size_t j = 0; j < support.size(); ++j) c.support[static_cast<std::size_t>(pos[j])] = support[j];
      c.linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(support.size()));
      c.linear(pos.back()) = -1.0;
      c.constant = st.sigma2_dl_W / sp.theta_scale[f];
      std::size_t cursor = 0;
      for (std::size_t j = 0; j < im.ues.size(); ++j) {
        const std::size_t n = serving.aps_of_ue[im.ues[j]].size();
        QuadBlock blk;
        for (std::size_t a = 0; a < n; ++a) blk.local.push_back(pos[cursor + a]);
        cursor += n;
        blk.Q = qscale * im.blocks[j];
        if (im.diagonal[j]) {
          // Split diagonal blocks into 1x1 terms.
          for (std::size_t a = 0; a < n; ++a) {
            const double d = blk.Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a));
            if (d == 0.0) continue;
            QuadBlock one;
            one.local = {blk.local[a]};
            one.Q = Eigen::MatrixXd::Constant(1, 1, d);
            c.blocks.push_back(std::move(one));
          }
        } else if (n > 0) {
          c.blocks.push_back(std::move(blk));
        }
      }
      prog.constraints.push_back(std::move(c));
    }
  }

  // sum_k x_{m,k}^2 <= 1 per AP
  if (pmax > 0.0) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto& ues = serving.ues_of_ap[m];
      if (ues.empty()) continue;
      Constraint c;
      c.kind = Constraint::Kind::kQuadratic;
      c.family = Family::kPower;
      for (auto k : ues) c.support.push_back(sp.power_var(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)));
      std::sort(c.support.begin(), c.support.end());
      c.linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.support.size()));
      c.constant = -1.0;
      QuadBlock blk;
      for (std::size_t a = 0; a < c.support.size(); ++a) blk.local.push_back(static_cast<Eigen::Index>(a));
      blk.Q = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(c.support.size()),
                                        static_cast<Eigen::Index>(c.support.size()));
      c.blocks.push_back(std::move(blk));
      prog.constraints.push_back(std::move(c));
    }
  }

  // sum of mu over the flows carried by AP m <= C_max (row divided by C_max)
  for (std::size_t m = 0; m < M; ++m) {
    Constraint c;
    c.kind = Constraint::Kind::kAffine;
    c.family = Family::kFronthaul;
    for (std::size_t f = 0; f < F; ++f) {
      if (!sp.active[f]) continue;
      const auto& flow = sp.flows[f];
      const bool carried = flow.cjt() ? serving.serves(m, flow.ue) : flow.ap == m;
      if (carried) c.support.push_back(sp.mu_var[f]);
    }
    if (c.support.empty()) continue;
    std::sort(c.support.begin(), c.support.end());
    c.linear.resize(static_cast<Eigen::Index>(c.support.size()));
    for (std::size_t j = 0; j < c.support.size(); ++j) {
      const auto f = static_cast<std::size_t>(std::find(sp.mu_var.begin(), sp.mu_var.end(), c.support[j]) - sp.mu_var.begin());
      c.linear(static_cast<Eigen::Index>(j)) = sp.mu_scale[f] / cap;
    }
    c.constant = -1.0;
    prog.constraints.push_back(std::move(c));
  }

  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(sp.num_power_vars); ++j) prog.nonnegative.push_back(j);
  for (std::size_t f = 0; f < F; ++f) {
    if (!sp.active[f]) continue;
    prog.nonnegative.push_back(sp.mu_var[f]);
    prog.nonnegative.push_back(sp.xi_var[f]);
  }
  std::sort(prog.nonnegative.begin(), prog.nonnegative.end());
  for (std::size_t f = 0; f < F; ++f)
    if (sp.active[f]) prog.local_groups.push_back({sp.mu_var[f], sp.xi_var[f], sp.theta_var[f]});

  // Strictly feasible start near the anchor.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nv);
  if (pmax > 0.0) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto& ues = serving.ues_of_ap[m];
      const double eq = std::sqrt(0.5 / static_cast<double>(std::max<std::size_t>(ues.size(), 1)));
      for (auto k : ues) {
        const auto i = static_cast<Eigen::Index>(m);
        const auto j = static_cast<Eigen::Index>(k);
        const double a = std::max(0.0, anchor.amplitude(i, j)) / sp.amp_scale;
        x(sp.power_var(i, j)) = (1.0 - opt.interior_shift) * std::min(a, 1.0) + opt.interior_shift * eq;
      }
    }
  }
  Eigen::MatrixXd amp_start = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
  for (Eigen::Index m = 0; m < amp_start.rows(); ++m)
    for (Eigen::Index k = 0; k < amp_start.cols(); ++k)
      if (sp.power_var(m, k) >= 0) amp_start(m, k) = sp.amp_scale * x(sp.power_var(m, k));

  const double kMargin = opt.start_margin;
  for (std::size_t f = 0; f < F; ++f) {
    if (!sp.active[f]) continue;
    const double theta0 = sp.theta_scale[f];
    const double f0 = sp.xi_scale[f];
    const double need = (evaluate_interference(sp.interference[f], amp_start, serving) + st.sigma2_dl_W) / theta0;
    const double th = std::max(1.0, need) * (1.0 + kMargin);
    x(sp.theta_var[f]) = th;
    const Eigen::VectorXd p = local_amplitudes(amp_start, serving, sp.flows[f].ue);
    const double F_hat = surrogate[f].grad_p.dot(p) / f0 - th;
    if (!(F_hat > 0.0)) throw NumericalError("could not build a strictly feasible SCA start");
    const double xi_anchor = anchor.xi(static_cast<Eigen::Index>(f)) / f0;
    const double xi_hat = xi_anchor > 0.0 ? std::min(xi_anchor, F_hat) * (1.0 - kMargin) : 0.5 * F_hat;
    x(sp.xi_var[f]) = xi_hat;
    const double rate = log_weight * std::log1p(f0 * xi_hat);
    const double mu_anchor = anchor.mu(static_cast<Eigen::Index>(f));
    const double mu = mu_anchor > 0.0 ? std::min(mu_anchor, rate) * (1.0 - kMargin) : 0.5 * rate;
    x(sp.mu_var[f]) = mu / sp.mu_scale[f];
  }
  // Fronthaul: shrink mu where a row is not strictly satisfied.
  for (const auto& c : prog.constraints) {
    if (c.family != Family::kFronthaul) continue;
    const double load = c.gather_dot(x);
    if (load < 1.0 - kMargin) continue;
    const double factor = (1.0 - kMargin) / load;
    for (auto j : c.support) x(j) *= factor;
  }
  prog.start = std::move(x);
  return sp;
}

struct SubproblemSolution {
  Eigen::MatrixXd amplitude;  // M x K, sqrt(W)
  Eigen::VectorXd mu, xi, theta;
  double objective = 0.0;     // sum of mu
  std::vector<double> residuals;  // max violation per Family (normalized rows)
  double kkt_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  IpmStatus status = IpmStatus::kOptimal;
};

inline SubproblemSolution solve_subproblem(const Subproblem& sp, const IpmOptions& opt = {}) {
  const auto& st = *sp.stats;
  const std::size_t F = sp.flows.size();
  SubproblemSolution sol;
  const auto r = solve_program(sp.program, opt);
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.kkt_residual = r.dual_residual;
  sol.gap = r.gap;
  sol.residuals = sp.program.violations(r.x);
  sol.amplitude = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(st.num_aps()), static_cast<Eigen::Index>(st.num_ues()));
  for (Eigen::Index m = 0; m < sol.amplitude.rows(); ++m)
    for (Eigen::Index k = 0; k < sol.amplitude.cols(); ++k)
      if (sp.power_var(m, k) >= 0) sol.amplitude(m, k) = sp.amp_scale * std::max(0.0, r.x(sp.power_var(m, k)));
  sol.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(F));
  sol.xi = sol.mu;
  sol.theta = sol.mu;
  for (std::size_t f = 0; f < F; ++f) {
    const auto i = static_cast<Eigen::Index>(f);
    if (!sp.active[f]) {
      sol.theta(i) = evaluate_interference(sp.interference[f], sol.amplitude, st.serving) + st.sigma2_dl_W;
      continue;
    }
    sol.mu(i) = sp.mu_scale[f] * std::max(0.0, r.x(sp.mu_var[f]));
    sol.xi(i) = sp.xi_scale[f] * r.x(sp.xi_var[f]);
    sol.theta(i) = sp.theta_scale[f] * r.x(sp.theta_var[f]);
  }
  sol.objective = sol.mu.sum();
  return sol;
}

}  // namespace cfmimo::sca
