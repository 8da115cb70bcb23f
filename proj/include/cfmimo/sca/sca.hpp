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
#include <filesystem>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cfmimo/chanstat/statistics.hpp"
#include "cfmimo/core/config.hpp"
#include "cfmimo/core/csv.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/rates/rates.hpp"
#include "cfmimo/sca/subproblem.hpp"

namespace cfmimo::sca {

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double max_fronthaul_violation = 0.0;  // bit/s/Hz
  double max_power_violation = 0.0;      // W
  int solver_iterations = 0;
};

struct ScaResult {
  rates::PowerSolution power;
  ScaState state;
  std::vector<IterationRecord> trace;
  rates::RateReport report;
  double objective = 0.0;  // sum of mu
  bool converged = false;
};

// Subproblem failure during run_sca. Carries the iterations completed so far.
class ScaError : public NumericalError {
 public:
  ScaError(const std::string& what, std::vector<IterationRecord> trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  [[nodiscard]] const std::vector<IterationRecord>& trace() const { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

inline IterationRecord record_of(const PrecodingStatistics& st, const ScaState& s, double cap, double pmax) {
  IterationRecord r;
  r.iteration = s.iteration;
  r.objective = s.objective;
  const auto& serving = st.serving;
  for (std::size_t m = 0; m < st.num_aps(); ++m) {
    double load = 0.0;
    double power = 0.0;
    for (std::size_t f = 0; f < s.flows.size(); ++f) {
      const auto& fl = s.flows[f];
      if (fl.cjt() ? serving.serves(m, fl.ue) : fl.ap == m) load += s.mu(static_cast<Eigen::Index>(f));
    }
    for (auto k : serving.ues_of_ap[m]) {
      const double a = s.amplitude(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
      power += a * a;
    }
    r.max_fronthaul_violation = std::max(r.max_fronthaul_violation, load - cap);
    r.max_power_violation = std::max(r.max_power_violation, power - pmax);
  }
  return r;
}

// Equal split anchor with theta, xi, mu taken from the exact expressions.
inline ScaState initial_state(const PrecodingStatistics& st, const ModeAssignment& modes, const SystemConfig& config,
                              const ScaOptions& opt = {}) {
  ScaState s;
  s.flows = enumerate_flows(st.serving, modes);
  const auto F = static_cast<Eigen::Index>(s.flows.size());
  const auto eq = rates::PowerSolution::equal_split(st.serving, config.max_ap_power_W);
  s.amplitude = eq.p.cwiseSqrt();
  s.mu = Eigen::VectorXd::Zero(F);
  s.xi = Eigen::VectorXd::Zero(F);
  s.theta = Eigen::VectorXd::Zero(F);
  const double log_weight = config.prelog() / std::numbers::ln2;
  for (Eigen::Index f = 0; f < F; ++f) {
    const auto& flow = s.flows[static_cast<std::size_t>(f)];
    const auto im = interference_model(st, modes, flow, opt.order);
    s.theta(f) = evaluate_interference(im, s.amplitude, st.serving) + st.sigma2_dl_W;
    const double sig = local_amplitudes(s.amplitude, st.serving, flow.ue).dot(flow_signal(st, flow));
    s.xi(f) = sig * sig / s.theta(f);
    s.mu(f) = log_weight * std::log1p(s.xi(f));
  }
  // Scale mu down where an AP's fronthaul would be exceeded.
  for (std::size_t m = 0; m < st.num_aps(); ++m) {
    double load = 0.0;
    for (Eigen::Index f = 0; f < F; ++f) {
      const auto& fl = s.flows[static_cast<std::size_t>(f)];
      if (fl.cjt() ? st.serving.serves(m, fl.ue) : fl.ap == m) load += s.mu(f);
    }
    if (load <= config.fronthaul_cap_bpsHz) continue;
    const double factor = config.fronthaul_cap_bpsHz / load;
    for (Eigen::Index f = 0; f < F; ++f) {
      const auto& fl = s.flows[static_cast<std::size_t>(f)];
      if (fl.cjt() ? st.serving.serves(m, fl.ue) : fl.ap == m) s.mu(f) *= factor;
    }
  }
  s.objective = s.mu.sum();
  return s;
}

// Squares the amplitudes and trims rounding so that every AP total is <= P_max.
inline rates::PowerSolution finalize_power(const Eigen::MatrixXd& amplitude, const netgen::ServingSets& s,
                                           double pmax) {
  rates::PowerSolution out;
  out.p = Eigen::MatrixXd::Zero(amplitude.rows(), amplitude.cols());
  for (std::size_t m = 0; m < s.num_aps; ++m) {
    double total = 0.0;
    for (auto k : s.ues_of_ap[m]) {
      const double a = std::max(0.0, amplitude(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)));
      out.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = a * a;
      total += a * a;
    }
    if (total > pmax) {
      const double factor = pmax / total;
      for (auto k : s.ues_of_ap[m]) out.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) *= factor;
      total = 0.0;
      for (auto k : s.ues_of_ap[m]) total += out.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
      if (total > pmax)
        for (auto k : s.ues_of_ap[m])
          out.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
              std::nextafter(out.p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) * (1.0 - 1e-15), 0.0);
    }
  }
  return out;
}

inline ScaState advance(const ScaState& anchor, const SubproblemSolution& sol) {
  ScaState next;
  next.iteration = anchor.iteration + 1;
  next.flows = anchor.flows;
  next.amplitude = sol.amplitude;
  next.mu = sol.mu;
  next.xi = sol.xi;
  next.theta = sol.theta;
  next.objective = sol.objective;
  next.history = anchor.history;
  next.history.push_back(sol.objective);
  return next;
}

inline ScaResult run_sca(const PrecodingStatistics& st, const ModeAssignment& modes, const SystemConfig& config,
                         const ScaOptions& opt = {}) {
  if (modes.mode.size() != st.num_ues()) throw ConfigError("mode assignment size does not match K");
  if (opt.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  ScaResult res;
  res.state = initial_state(st, modes, config, opt);
  const double cap = config.fronthaul_cap_bpsHz;
  const double pmax = config.max_ap_power_W;
  res.trace.push_back(record_of(st, res.state, cap, pmax));
  for (int t = 1; t <= opt.max_iterations; ++t) {
    SubproblemSolution sol;
    try {
      const auto sp = assemble_subproblem(st, modes, config, res.state, opt);
      sol = solve_subproblem(sp, opt.ipm);
    } catch (const NumericalError& e) {
      throw ScaError(std::string("SCA iteration ") + std::to_string(t) + ": " + e.what(), res.trace);
    }
    if (sol.status == IpmStatus::kNumericalFailure)
      throw ScaError("SCA iteration " + std::to_string(t) + ": subproblem solver failed", res.trace);
    const double previous = res.state.objective;
    res.state = advance(res.state, sol);
    auto rec = record_of(st, res.state, cap, pmax);
    rec.solver_iterations = sol.iterations;
    res.trace.push_back(rec);
    if (sol.status == IpmStatus::kIterationLimit)
      throw ScaError("SCA iteration " + std::to_string(t) + ": subproblem hit the iteration limit", res.trace);
    if (t >= 2 && std::abs(res.state.objective - previous) < opt.relative_tolerance * std::abs(previous)) {
      res.converged = true;
      break;
    }
    if (res.state.objective == 0.0 && previous == 0.0) {
      res.converged = true;
      break;
    }
  }
  res.objective = res.state.objective;
  res.power = finalize_power(res.state.amplitude, st.serving, pmax);
  res.report = rates::evaluate(st, res.power, modes, config, opt.order);
  return res;
}

inline void write_convergence_csv(const std::filesystem::path& file, const std::vector<IterationRecord>& trace) {
  CsvWriter w(file);
  w.header({"iteration", "objective_bpsHz", "max_fronthaul_violation", "max_power_violation"});
  for (const auto& r : trace) w.row(r.iteration, r.objective, r.max_fronthaul_violation, r.max_power_violation);
}

inline void write_power_csv(const std::filesystem::path& file, const rates::PowerSolution& power,
                            const netgen::ServingSets& serving) {
  CsvWriter w(file);
  w.header({"ap_id", "ue_id", "power_W"});
  for (std::size_t m = 0; m < serving.num_aps; ++m)
    for (auto k : serving.ues_of_ap[m]) w.row(m, k, power.at(m, k));
}

}  // namespace cfmimo::sca
