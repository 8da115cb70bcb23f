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
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/netgen/scenario.hpp"
#include "cfmimo/rates/rates.hpp"
#include "cfmimo/runner/modes.hpp"
#include "cfmimo/runner/pipeline.hpp"
#include "cfmimo/runner/sweep.hpp"
#include "cfmimo/sca/sca.hpp"

namespace cfmimo::runner {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace detail {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";

  [[nodiscard]] SystemConfig load() const {
    SystemConfig c = config_path.empty() ? SystemConfig{} : load_config(config_path);
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  }
};

inline void add_common(CLI::App& cmd, CommonArgs& a) {
  cmd.add_option("--config", a.config_path, "flat key = value scenario file");
  cmd.add_option("--seed", a.seed, "master seed (overrides the config file)");
  cmd.add_option("--out", a.out, "output directory")->capture_default_str();
}

inline std::filesystem::path prepare_out(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

}  // namespace detail

// Entry point of the `cfmimo` tool. `args` excludes the program name.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Hybrid CJT/NCJT cell-free massive MIMO downlink simulator", "cfmimo"};
  app.require_subcommand(1);

  detail::CommonArgs gen_args;
  auto* gen = app.add_subcommand("gen", "write the network drop (AP/UE positions, links) as CSV");
  detail::add_common(*gen, gen_args);

  detail::CommonArgs conv_args;
  std::string modes_text;
  auto* conv = app.add_subcommand("converge", "run power allocation once and write convergence.csv");
  detail::add_common(*conv, conv_args);
  conv->add_option("--modes", modes_text, "per-UE serving modes, 1 = CJT, 0 = NCJT (default 0101...)");

  detail::CommonArgs sweep_args;
  std::vector<double> p_grid = default_p_grid();
  std::vector<double> cmax;
  std::vector<std::size_t> serving;
  std::size_t draws = 5;
  std::size_t topologies = 10;
  auto* sweep = app.add_subcommand("sweep", "sweep the CJT probability p and write sweep.csv and summary.csv");
  detail::add_common(*sweep, sweep_args);
  sweep->add_option("--p-grid", p_grid, "comma-separated CJT probabilities")->delimiter(',');
  sweep->add_option("--cmax", cmax, "comma-separated fronthaul capacities in bit/s/Hz")->delimiter(',');
  sweep->add_option("--serving-set", serving, "comma-separated serving set sizes")->delimiter(',');
  sweep->add_option("--draws", draws, "mode draws per topology and grid point")->capture_default_str();
  sweep->add_option("--topologies", topologies, "network drops per grid point")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    if (gen->parsed()) {
      const SystemConfig c = gen_args.load();
      const auto dir = detail::prepare_out(gen_args.out);
      const auto s = netgen::make_scenario(c, c.seed);
      netgen::write_scenario_csv(s, dir);
      std::ofstream cfg(dir / "config.cfg");
      write_config(cfg, c);
      out << "wrote scenario to " << dir.string() << "\n";
    } else if (conv->parsed()) {
      const SystemConfig c = conv_args.load();
      const auto dir = detail::prepare_out(conv_args.out);
      const auto modes = modes_text.empty() ? alternating_modes(c.K) : rates::ModeAssignment::parse(modes_text);
      if (modes.size() != c.K) throw ConfigError("--modes must have exactly K characters");
      const Instance inst = make_instance(c, c.seed);
      try {
        const auto r = sca::run_sca(inst.stats, modes, c);
        sca::write_convergence_csv(dir / "convergence.csv", r.trace);
        sca::write_power_csv(dir / "power.csv", r.power, inst.stats.serving);
        rates::write_report_csv(r.report, modes, c.fronthaul_cap_bpsHz, dir);
        out << "objective " << r.objective << " bit/s/Hz, recomputed sum-rate " << r.report.sum_rate
            << " bit/s/Hz, " << r.trace.size() - 1 << " iterations" << (r.converged ? "" : " (not converged)")
            << "\n";
      } catch (const sca::ScaError& e) {
        sca::write_convergence_csv(dir / "convergence.csv", e.trace());
        throw;
      }
    } else if (sweep->parsed()) {
      SweepSpec spec;
      spec.base = sweep_args.load();
      spec.seed = spec.base.seed;
      spec.p_grid = p_grid;
      spec.cmax_values = cmax;
      spec.serving_set_sizes = serving;
      spec.mode_draws = draws;
      spec.topology_draws = topologies;
      spec.validate();
      const auto dir = detail::prepare_out(sweep_args.out);
      spec.on_row = [&err](const SweepRow& r) {
        err << "p=" << r.p << " cmax=" << r.cmax << " |M_k|=" << r.serving_set_size << " topo=" << r.topo_trial
            << " draw=" << r.mode_trial << " sum_rate=" << r.sum_rate
            << (!std::isfinite(r.sum_rate) ? " FAILED" : r.converged ? "" : " (not converged)") << "\n";
      };
      const auto res = sweep_p(spec);
      write_sweep_csv(dir / "sweep.csv", res.rows);
      write_summary_csv(dir / "summary.csv", res.summary);
      out << res.rows.size() << " runs, " << res.failed() << " failed, " << res.unconverged() << " not converged\n";
      const bool empty_cell =
          std::any_of(res.summary.begin(), res.summary.end(), [](const auto& s) { return s.n_samples == 0; });
      if (empty_cell) {
        err << "error: some grid points have no finished run\n";
        return kExitNumerical;
      }
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace cfmimo::runner
