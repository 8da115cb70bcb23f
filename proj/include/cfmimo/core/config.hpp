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
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "cfmimo/core/errors.hpp"

namespace cfmimo {

inline constexpr double kBoltzmann = 1.381e-23;    // J/K
inline constexpr double kNoiseTemperature = 290.0;  // K

// Scenario constants. Field names double as the keys of the flat
// `key = value` configuration file.
struct SystemConfig {
  std::size_t M = 14;                 // access points
  std::size_t N = 8;                  // antennas per AP
  std::size_t K = 15;                 // single-antenna UEs
  std::size_t serving_set_size = 8;   // |M_k|
  std::size_t tau_c = 200;            // symbols per coherence block
  std::size_t tau_p = 10;             // pilot length
  double pilot_power_W = 0.1;
  double max_ap_power_W = 0.2;
  double fronthaul_cap_bpsHz = 15.0;
  double area_m = 600.0;
  double bandwidth_Hz = 20e6;
  double noise_figure_dB = 9.0;
  double asd_deg = 15.0;
  double shadowing_std_dB = 4.0;      // 0 disables shadow fading
  std::size_t mc_trials = 10000;
  std::uint64_t seed = 1;

  [[nodiscard]] std::size_t tau_d() const { return tau_c - tau_p; }
  [[nodiscard]] double prelog() const {
    return static_cast<double>(tau_d()) / static_cast<double>(tau_c);
  }
  // sigma^2 = B * kB * T0 * F, shared by uplink pilots and downlink data.
  [[nodiscard]] double noise_power_W() const {
    return bandwidth_Hz * kBoltzmann * kNoiseTemperature *
           std::pow(10.0, noise_figure_dB / 10.0);
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (M < 1) fail("M must be >= 1");
    if (N < 1) fail("N must be >= 1");
    if (K < 1) fail("K must be >= 1");
    if (serving_set_size < 1 || serving_set_size > M)
      fail("serving_set_size must lie in [1, M]");
    if (tau_p < 1 || tau_p > tau_c) fail("tau_p must lie in [1, tau_c]");
    if (!(pilot_power_W > 0.0)) fail("pilot_power_W must be positive");
    if (!(max_ap_power_W >= 0.0)) fail("max_ap_power_W must be nonnegative");
    if (!(fronthaul_cap_bpsHz > 0.0)) fail("fronthaul_cap_bpsHz must be positive");
    if (!(area_m > 0.0)) fail("area_m must be positive");
    if (!(bandwidth_Hz > 0.0)) fail("bandwidth_Hz must be positive");
    if (!std::isfinite(noise_figure_dB)) fail("noise_figure_dB must be finite");
    if (!(asd_deg >= 0.0)) fail("asd_deg must be nonnegative");
    if (!(shadowing_std_dB >= 0.0)) fail("shadowing_std_dB must be nonnegative");
    if (mc_trials < 1) fail("mc_trials must be >= 1");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  std::istringstream in{std::string(text)};
  T v{};
  if constexpr (std::is_unsigned_v<T>) {
    if (!text.empty() && text.front() == '-')
      throw ConfigError("negative value for key '" + std::string(key) + "'");
  }
  in >> v;
  if (in.fail() || !(in >> std::ws).eof())
    throw ConfigError("bad value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  return v;
}

}  // namespace detail

// Applies one `key = value` assignment. Unknown keys are configuration errors.
inline void set_config_value(SystemConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_value;
  if (key == "M") c.M = parse_value<std::size_t>(key, value);
  else if (key == "N") c.N = parse_value<std::size_t>(key, value);
  else if (key == "K") c.K = parse_value<std::size_t>(key, value);
  else if (key == "serving_set_size") c.serving_set_size = parse_value<std::size_t>(key, value);
  else if (key == "tau_c") c.tau_c = parse_value<std::size_t>(key, value);
  else if (key == "tau_p") c.tau_p = parse_value<std::size_t>(key, value);
  else if (key == "pilot_power_W") c.pilot_power_W = parse_value<double>(key, value);
  else if (key == "max_ap_power_W") c.max_ap_power_W = parse_value<double>(key, value);
  else if (key == "fronthaul_cap_bpsHz") c.fronthaul_cap_bpsHz = parse_value<double>(key, value);
  else if (key == "area_m") c.area_m = parse_value<double>(key, value);
  else if (key == "bandwidth_Hz") c.bandwidth_Hz = parse_value<double>(key, value);
  else if (key == "noise_figure_dB") c.noise_figure_dB = parse_value<double>(key, value);
  else if (key == "asd_deg") c.asd_deg = parse_value<double>(key, value);
  else if (key == "shadowing_std_dB") c.shadowing_std_dB = parse_value<double>(key, value);
  else if (key == "mc_trials") c.mc_trials = parse_value<std::size_t>(key, value);
  else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

// Reads `key = value` lines on top of the defaults. '#' starts a comment.
inline SystemConfig parse_config(std::istream& in) {
  SystemConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = detail::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, detail::trim(v.substr(0, eq)), detail::trim(v.substr(eq + 1)));
  }
  c.validate();
  return c;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

inline void write_config(std::ostream& out, const SystemConfig& c) {
  out.precision(17);
  out << "M = " << c.M << '\n'
      << "N = " << c.N << '\n'
      << "K = " << c.K << '\n'
      << "serving_set_size = " << c.serving_set_size << '\n'
      << "tau_c = " << c.tau_c << '\n'
      << "tau_p = " << c.tau_p << '\n'
      << "pilot_power_W = " << c.pilot_power_W << '\n'
      << "max_ap_power_W = " << c.max_ap_power_W << '\n'
      << "fronthaul_cap_bpsHz = " << c.fronthaul_cap_bpsHz << '\n'
      << "area_m = " << c.area_m << '\n'
      << "bandwidth_Hz = " << c.bandwidth_Hz << '\n'
      << "noise_figure_dB = " << c.noise_figure_dB << '\n'
      << "asd_deg = " << c.asd_deg << '\n'
      << "shadowing_std_dB = " << c.shadowing_std_dB << '\n'
      << "mc_trials = " << c.mc_trials << '\n'
      << "seed = " << c.seed << '\n';
}

}  // namespace cfmimo
