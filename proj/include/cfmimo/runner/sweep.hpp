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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/csv.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/runner/modes.hpp"
#include "cfmimo/runner/pipeline.hpp"
#include "cfmimo/sca/sca.hpp"

namespace cfmimo::runner {

inline std::vector<double> default_p_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

struct SweepRow;

struct SweepSpec {
  SystemConfig base;
  std::vector<double> p_grid = default_p_grid();
  std::vector<double> cmax_values;              // empty: base.fronthaul_cap_bpsHz
  std::vector<std::size_t> serving_set_sizes;   // empty: base.serving_set_size
  std::size_t topology_draws = 10;
  std::size_t mode_draws = 5;                   // per topology draw and p
  std::uint64_t seed = 1;
  sca::ScaOptions sca;
  std::function<void(const SweepRow&)> on_row;  // progress hook, called in run order

  [[nodiscard]] std::vector<double> cmax_list() const {
    return cmax_values.empty() ? std::vector<double>{base.fronthaul_cap_bpsHz} : cmax_values;
  }
  [[nodiscard]] std::vector<std::size_t> serving_list() const {
    return serving_set_sizes.empty() ? std::vector<std::size_t>{base.serving_set_size} : serving_set_sizes;
  }

  void validate() const {
    base.validate();
    if (p_grid.empty()) throw ConfigError("p grid is empty");
    for (double p : p_grid)
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p grid values must lie in [0, 1]");
    if (topology_draws < 1 || mode_draws < 1) throw ConfigError("draw counts must be >= 1");
    for (double c : cmax_list()) {
      SystemConfig cfg = base;
      cfg.fronthaul_cap_bpsHz = c;
      cfg.validate();
    }
    for (auto s : serving_list()) {
      SystemConfig cfg = base;
      cfg.serving_set_size = s;
      cfg.validate();
    }
  }
};

struct SweepRow {
  double p = 0.0;
  double cmax = 0.0;
  std::size_t serving_set_size = 0;
  std::size_t topo_trial = 0;
  std::size_t mode_trial = 0;
  std::size_t n_cjt = 0;
  double sum_rate = std::numeric_limits<double>::quiet_NaN();             // SCA objective
  double recomputed_sum_rate = std::numeric_limits<double>::quiet_NaN();  // rates at the final powers
  int iterations = 0;
  bool converged = false;
};

struct SummaryRow {
  double p = 0.0;
  double cmax = 0.0;
  std::size_t serving_set_size = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stderr_of_mean = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
  std::size_t n_samples = 0;
  std::size_t n_failed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;        // sorted by (p, cmax, serving size, topology, mode draw)
  std::vector<SummaryRow> summary;   // sorted by (p, cmax, serving size)

  [[nodiscard]] std::size_t failed() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !std::isfinite(r.sum_rate); }));
  }
  [[nodiscard]] std::size_t unconverged() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.converged; }));
  }

  // Summary rows of one (cmax, serving size) curve, ascending in p.
  [[nodiscard]] std::vector<SummaryRow> curve(double cmax, std::size_t serving) const {
    std::vector<SummaryRow> out;
    for (const auto& s : summary)
      if (s.cmax == cmax && s.serving_set_size == serving) out.push_back(s);
    return out;
  }

  // Smallest p attaining the largest mean on a curve; NaN if it has no samples.
  [[nodiscard]] double argmax_p(double cmax, std::size_t serving) const {
    double best_p = std::numeric_limits<double>::quiet_NaN();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : curve(cmax, serving))
      if (s.n_samples > 0 && s.mean > best) {
        best = s.mean;
        best_p = s.p;
      }
    return best_p;
  }
};

inline auto row_key(const SweepRow& r) {
  return std::make_tuple(r.p, r.cmax, r.serving_set_size, r.topo_trial, r.mode_trial);
}

// Mean and standard error over the finished rows of every (p, cmax, serving size) cell. Rows
// that stopped at the iteration cap count; rows whose optimizer failed do not.
inline std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows) {
  struct Acc {
    std::vector<double> values;
    std::size_t failed = 0;
  };
  std::map<std::tuple<double, double, std::size_t>, Acc> cells;
  for (const auto& r : rows) {
    auto& a = cells[{r.p, r.cmax, r.serving_set_size}];
    if (std::isfinite(r.sum_rate)) a.values.push_back(r.sum_rate);
    else ++a.failed;
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, a] : cells) {
    SummaryRow s;
    std::tie(s.p, s.cmax, s.serving_set_size) = key;
    s.n_samples = a.values.size();
    s.n_failed = a.failed;
    if (!a.values.empty()) {
      double sum = 0.0;
      for (double v : a.values) sum += v;
      s.mean = sum / static_cast<double>(a.values.size());
      if (a.values.size() >= 2) {
        double ss = 0.0;
        for (double v : a.values) ss += (v - s.mean) * (v - s.mean);
        const double n = static_cast<double>(a.values.size());
        s.stderr_of_mean = std::sqrt(ss / (n - 1.0) / n);
      }
    }
    out.push_back(s);
  }
  return out;
}

inline std::uint64_t topology_seed(std::uint64_t master, std::size_t topo) {
  return derive_seed(master, Stream::kTopologyDraw, {topo});
}

// The same mode-draw seed is reused across p, cmax and serving size so that
// curves are compared on common random numbers.
inline std::uint64_t mode_seed(std::uint64_t master, std::size_t topo, std::size_t draw) {
  return derive_seed(master, Stream::kModeDraw, {topo, draw});
}

// Every (serving size, topology, cmax, p, mode draw) combination is solved
// once. Statistics are estimated once per (serving size, topology). A run
// whose optimizer fails is kept with a NaN sum rate and excluded from the
// summary.
inline SweepResult sweep_p(const SweepSpec& spec) {
  spec.validate();
  SweepResult res;
  for (auto serving : spec.serving_list()) {
    SystemConfig cfg = spec.base;
    cfg.serving_set_size = serving;
    for (std::size_t t = 0; t < spec.topology_draws; ++t) {
      const Instance inst = make_instance(cfg, topology_seed(spec.seed, t));
      for (double cmax : spec.cmax_list()) {
        SystemConfig run_cfg = cfg;
        run_cfg.fronthaul_cap_bpsHz = cmax;
        for (double p : spec.p_grid) {
          for (std::size_t d = 0; d < spec.mode_draws; ++d) {
            SweepRow row;
            row.p = p;
            row.cmax = cmax;
            row.serving_set_size = serving;
            row.topo_trial = t;
            row.mode_trial = d;
            const auto modes = allocate_modes(cfg.K, p, mode_seed(spec.seed, t, d));
            row.n_cjt = modes.count_cjt();
            try {
              const auto r = sca::run_sca(inst.stats, modes, run_cfg, spec.sca);
              row.sum_rate = r.objective;
              row.recomputed_sum_rate = r.report.sum_rate;
              row.iterations = static_cast<int>(r.trace.size()) - 1;
              row.converged = r.converged;
            } catch (const sca::ScaError& e) {
              row.iterations = static_cast<int>(e.trace().size()) - 1;
            }
            if (spec.on_row) spec.on_row(row);
            res.rows.push_back(row);
          }
        }
      }
    }
  }
  std::sort(res.rows.begin(), res.rows.end(), [](const auto& a, const auto& b) { return row_key(a) < row_key(b); });
  res.summary = summarize(res.rows);
  return res;
}

inline void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows) {
  CsvWriter w(file);
  w.header({"p", "cmax_bpsHz", "serving_set_size", "topo_trial", "mode_trial", "n_cjt", "sum_rate_bpsHz",
            "recomputed_sum_rate_bpsHz", "iterations", "converged"});
  for (const auto& r : rows)
    w.row(r.p, r.cmax, r.serving_set_size, r.topo_trial, r.mode_trial, r.n_cjt, r.sum_rate, r.recomputed_sum_rate,
          r.iterations, r.converged ? 1 : 0);
}

inline void write_summary_csv(const std::filesystem::path& file, const std::vector<SummaryRow>& summary) {
  CsvWriter w(file);
  w.header({"p", "cmax_bpsHz", "serving_set_size", "mean_sum_rate", "stderr", "n_samples"});
  for (const auto& s : summary) w.row(s.p, s.cmax, s.serving_set_size, s.mean, s.stderr_of_mean, s.n_samples);
}

}  // namespace cfmimo::runner
