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
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

namespace cfmimo {
namespace {

TEST(Config, DefaultsDescribeTheReferenceScenario) {
  SystemConfig c;
  EXPECT_EQ(c.M, 14u);
  EXPECT_EQ(c.N, 8u);
  EXPECT_EQ(c.K, 15u);
  EXPECT_EQ(c.serving_set_size, 8u);
  EXPECT_EQ(c.tau_c, 200u);
  EXPECT_EQ(c.tau_p, 10u);
  EXPECT_DOUBLE_EQ(c.pilot_power_W, 0.1);
  EXPECT_DOUBLE_EQ(c.max_ap_power_W, 0.2);
  EXPECT_DOUBLE_EQ(c.area_m, 600.0);
  EXPECT_DOUBLE_EQ(c.bandwidth_Hz, 20e6);
  EXPECT_DOUBLE_EQ(c.noise_figure_dB, 9.0);
  EXPECT_DOUBLE_EQ(c.asd_deg, 15.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, NoisePowerFollowsThermalFloor) {
  SystemConfig c;
  const double expected = 20e6 * 1.381e-23 * 290.0 * std::pow(10.0, 0.9);
  EXPECT_NEAR(c.noise_power_W() / expected, 1.0, 1e-12);
  EXPECT_NEAR(10.0 * std::log10(c.noise_power_W() / 1e-3), -92.0, 0.1);
}

TEST(Config, PrelogIsDataFraction) {
  SystemConfig c;
  EXPECT_DOUBLE_EQ(c.prelog(), 190.0 / 200.0);
  EXPECT_EQ(c.tau_d(), 190u);
}

TEST(Config, ParseOverridesDefaultsAndIgnoresComments) {
  std::istringstream in("# scenario\nM = 4\nserving_set_size = 4\n  K=3 # trailing\n\nfronthaul_cap_bpsHz = 30\nseed = 99\n");
  const auto c = parse_config(in);
  EXPECT_EQ(c.M, 4u);
  EXPECT_EQ(c.K, 3u);
  EXPECT_DOUBLE_EQ(c.fronthaul_cap_bpsHz, 30.0);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.N, 8u);
}

TEST(Config, WriteThenParseRoundTrips) {
  SystemConfig c;
  c.M = 5;
  c.serving_set_size = 3;
  c.noise_figure_dB = 7.25;
  c.shadowing_std_dB = 0.0;
  c.seed = 123456789012345ULL;
  std::stringstream ss;
  write_config(ss, c);
  const auto back = parse_config(ss);
  EXPECT_EQ(back.M, c.M);
  EXPECT_EQ(back.serving_set_size, c.serving_set_size);
  EXPECT_EQ(back.noise_figure_dB, c.noise_figure_dB);
  EXPECT_EQ(back.shadowing_std_dB, c.shadowing_std_dB);
  EXPECT_EQ(back.seed, c.seed);
}

TEST(Config, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("M = four\n"), ConfigError);
  EXPECT_THROW(parse("M = -3\n"), ConfigError);
  EXPECT_THROW(parse("M 4\n"), ConfigError);
  EXPECT_THROW(parse("M = 4 5\n"), ConfigError);
  EXPECT_THROW(parse("tau_p = 300\n"), ConfigError);
  EXPECT_THROW(parse("serving_set_size = 15\n"), ConfigError);
  EXPECT_THROW(parse("fronthaul_cap_bpsHz = 0\n"), ConfigError);
  EXPECT_THROW(parse("max_ap_power_W = -0.1\n"), ConfigError);
  EXPECT_NO_THROW(parse("max_ap_power_W = 0\n"));
  EXPECT_THROW(load_config("/nonexistent/path/to.cfg"), ConfigError);
}

TEST(Rng, DerivedSeedsDependOnlyOnTheirPath) {
  const auto a = derive_seed(7, Stream::kModeDraw, {1, 2});
  EXPECT_EQ(a, derive_seed(7, Stream::kModeDraw, {1, 2}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 50; ++i)
    for (std::uint64_t j = 0; j < 50; ++j) seen.insert(derive_seed(7, Stream::kModeDraw, {i, j}));
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_NE(derive_seed(7, Stream::kModeDraw, {1, 2}), derive_seed(7, Stream::kModeDraw, {2, 1}));
  EXPECT_NE(derive_seed(7, Stream::kModeDraw, {1}), derive_seed(7, Stream::kTopologyDraw, {1}));
  EXPECT_NE(derive_seed(7, Stream::kModeDraw), derive_seed(8, Stream::kModeDraw));
}

TEST(Csv, WriterOutputReadsBack) {
  const auto dir = testing::scratch_dir("csv");
  {
    CsvWriter w(dir / "t.csv");
    w.header({"a", "b", "c"});
    w.row(1, 0.1, "x");
    w.row(2, 1.0 / 3.0, "y");
  }
  const auto t = read_csv(dir / "t.csv");
  ASSERT_EQ(t.columns.size(), 3u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(1, "b"), 1.0 / 3.0);
  EXPECT_EQ(t.number(0, "b"), 0.1);
  EXPECT_EQ(t.rows[1][2], "y");
  EXPECT_THROW((void)t.column("missing"), ConfigError);
  EXPECT_THROW(read_csv(dir / "absent.csv"), ConfigError);
}

}  // namespace
}  // namespace cfmimo
