/*
 * Copyright 2026 The DemandNet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "demandnet/data/series.hpp"
#include "demandnet/data/synth.hpp"
#include "test_util.hpp"

namespace demandnet {
namespace {

using testing::TempDir;
using testing::write_text;

TEST(Io, SplitsQuotedFields) {
  const auto f = io::split_csv_line(R"(a,"b,c","d ""q""",)");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "d \"q\"");
  EXPECT_EQ(f[3], "");
}

TEST(Io, FormatDoubleRoundTrips) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal(0.0, 1e3) * std::pow(10.0, rng.uniform(-20, 20));
    EXPECT_EQ(*io::parse_double(io::format_double(v)), v);
  }
  EXPECT_FALSE(io::parse_double("abc").has_value());
  EXPECT_FALSE(io::parse_double("1.5x").has_value());
}

TEST(Io, AtomicWriteReplacesContent) {
  TempDir dir;
  const std::string path = dir.file("a.txt");
  io::atomic_write(path, "one");
  io::atomic_write(path, "two");
  EXPECT_EQ(io::read_file(path), "two");
  EXPECT_THROW(io::read_file(dir.file("missing")), Error);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42, 1), b(42, 1), c(42, 2);
  const uint64_t x = a.next();
  EXPECT_EQ(x, b.next());
  EXPECT_NE(x, c.next());
  EXPECT_EQ(mix_seed(5, 6), mix_seed(5, 6));
  EXPECT_NE(mix_seed(5, 6), mix_seed(6, 5));
}

TEST(Rng, StateRoundTrip) {
  Rng a(9);
  a.next();
  const std::string s = a.state();
  const double u = a.uniform();
  Rng b(0);
  b.set_state(s);
  EXPECT_EQ(b.uniform(), u);
}

TEST(Dates, RoundTripAndValidation) {
  EXPECT_EQ(data::parse_date("1970-01-01"), 0);
  EXPECT_EQ(data::format_date(data::parse_date("2020-02-29")), "2020-02-29");
  EXPECT_THROW(data::parse_date("2021-02-29"), ParseError);
  EXPECT_THROW(data::parse_date("2021/01/01"), ParseError);
}

std::string make_csv(int ids, int rows, int m, double policy_override = -1.0) {
  std::string csv = "series_id,date,target";
  for (int j = 0; j < m - 1; ++j) csv += ",c" + std::to_string(j);
  csv += ",policy\n";
  for (int k = 0; k < ids; ++k) {
    for (int t = 0; t < rows; ++t) {
      csv += "id" + std::to_string(k) + "," + data::format_date(18000 + t) + "," +
             std::to_string(t + k);
      for (int j = 0; j < m - 1; ++j) csv += "," + std::to_string(j * t);
      const double pol = (policy_override >= 0.0 && t == 3) ? policy_override : 0.25;
      csv += "," + io::format_double(pol) + "\n";
    }
  }
  return csv;
}

TEST(LoadDataset, GroupsSeriesById) {
  TempDir dir;
  const auto path = write_text(dir, "d.csv", make_csv(2, 100, 3));
  const auto bundles = data::load_dataset(path, {});
  ASSERT_EQ(bundles.size(), 2u);
  for (const auto& b : bundles) {
    EXPECT_EQ(b.length(), 100u);
    EXPECT_EQ(b.covariate_count(), 3u);
    EXPECT_EQ(b.covariate_names[static_cast<std::size_t>(b.policy_index)], "policy");
  }
}

TEST(LoadDataset, GapNamesTheMissingDate) {
  TempDir dir;
  std::string csv = "series_id,date,target,policy\n";
  csv += "a,2020-03-01,1,0\na,2020-03-02,1,0\na,2020-03-04,1,0\n";
  const auto path = write_text(dir, "d.csv", csv);
  try {
    data::load_dataset(path, {});
    FAIL() << "expected a gap error";
  } catch (const GapError& e) {
    EXPECT_NE(std::string(e.what()).find("2020-03-03"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, PolicyOutsideUnitIntervalIsRejected) {
  TempDir dir;
  const auto path = write_text(dir, "d.csv", make_csv(1, 10, 2, 1.3));
  EXPECT_THROW(data::load_dataset(path, {}), RangeError);
}

TEST(LoadDataset, MissingColumnsAndBadCells) {
  TempDir dir;
  EXPECT_THROW(data::load_dataset(write_text(dir, "a.csv", "series_id,date,policy\na,2020-01-01,0\n"), {}),
               SchemaError);
  EXPECT_THROW(data::load_dataset(write_text(dir, "b.csv", "series_id,date,target,policy\na,2020-01-01,x,0\n"), {}),
               ParseError);
}

TEST(LoadDataset, StaticSidecarIsAttached) {
  TempDir dir;
  const auto path = write_text(dir, "d.csv", make_csv(2, 5, 2));
  data::CsvSchema schema;
  schema.static_path = write_text(dir, "s.csv", "series_id,pop,gdp\nid0,1,2\nid1,3,4\n");
  const auto bundles = data::load_dataset(path, schema);
  EXPECT_EQ(bundles[1].static_names, (std::vector<std::string>{"pop", "gdp"}));
  EXPECT_EQ(bundles[1].static_values, (std::vector<double>{3, 4}));
  schema.static_path = write_text(dir, "s2.csv", "series_id,pop\nid0,1\n");
  EXPECT_THROW(data::load_dataset(path, schema), SchemaError);
}

TEST(LoadDataset, WriteThenLoadRoundTrips) {
  TempDir dir;
  data::SynthConfig cfg;
  cfg.series_count = 2;
  cfg.length = 60;
  cfg.shock_onset = 30;
  const auto bundles = data::synth_generate(cfg, 4);
  data::write_dataset(dir.file("d.csv"), bundles);
  data::write_static(dir.file("s.csv"), bundles);
  data::CsvSchema schema;
  schema.static_path = dir.file("s.csv");
  const auto loaded = data::load_dataset(dir.file("d.csv"), schema);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].target, bundles[0].target);
  EXPECT_EQ(loaded[1].covariates, bundles[1].covariates);
  EXPECT_EQ(loaded[1].static_values, bundles[1].static_values);
  EXPECT_EQ(loaded[0].start_day, bundles[0].start_day);
}

TEST(NormStats, ConstantChannel) {
  auto b = testing::ramp_bundle(10);
  for (auto& v : b.target) v = 5.0;
  const auto s = data::fit_norm_stats(b, data::Range{0, 10});
  EXPECT_EQ(s.location[0], 5.0);
  EXPECT_EQ(s.scale[0], 1.0);
  EXPECT_TRUE(s.constant[0]);
}

TEST(NormStats, TwoPointChannelUsesPopulationSd) {
  auto b = testing::ramp_bundle(4);
  b.target = {0.0, 2.0, 100.0, -50.0};
  const auto s = data::fit_norm_stats(b, data::Range{0, 2});
  EXPECT_DOUBLE_EQ(s.location[0], 1.0);
  EXPECT_DOUBLE_EQ(s.scale[0], 1.0);
}

TEST(NormStats, PolicyPassesThroughAndRoundTrip) {
  Rng rng(11);
  auto b = testing::ramp_bundle(50);
  for (auto& v : b.target) v = rng.normal(3.0, 7.0);
  const auto s = data::fit_norm_stats(b, data::Range{0, 40});
  const auto n = data::normalize(b, s);
  for (Eigen::Index t = 0; t < 50; ++t) EXPECT_EQ(n.covariates(t, 1), b.covariates(t, 1));
  const auto back = data::denormalize(n, s);
  for (std::size_t t = 0; t < 50; ++t) EXPECT_NEAR(back.target[t], b.target[t], 1e-10);
  EXPECT_LE((back.covariates - b.covariates).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Windows, CountsAndLabels) {
  EXPECT_EQ(data::make_windows(testing::ramp_bundle(5), 3, 1).size(), 2u);
  EXPECT_THROW(data::make_windows(testing::ramp_bundle(100), 32, 80), InsufficientDataError);
  const auto b = testing::ramp_bundle(200);
  const auto w = data::make_windows(b, 16, 40);
  ASSERT_EQ(w.size(), 145u);
  for (int k = 0; k < 40; ++k) EXPECT_EQ(w[0].label(k), b.target[16 + static_cast<std::size_t>(k)]);
  EXPECT_EQ(w[0].window.rows(), 16);
  EXPECT_EQ(w[0].window.cols(), 3);
  EXPECT_EQ(w[0].future_policies(0), b.covariates(16, 1));
}

TEST(Windows, CountIdentityProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t tau = 1 + rng.index(20);
    const std::size_t h = 1 + rng.index(20);
    const std::size_t t = tau + h + rng.index(60);
    EXPECT_EQ(data::make_windows(testing::ramp_bundle(t), tau, h).size(), t - tau - h + 1);
  }
}

TEST(Split, ChronologicalFractions) {
  const auto a = data::split_time(100, {});
  EXPECT_EQ(a.train, (data::Range{0, 80}));
  EXPECT_EQ(a.validation, (data::Range{80, 90}));
  EXPECT_EQ(a.test, (data::Range{90, 100}));
  const auto b = data::split_time(101, {});
  EXPECT_EQ(b.train.size(), 80u);
  EXPECT_EQ(b.validation.size(), 10u);
  EXPECT_EQ(b.test.size(), 11u);
  EXPECT_THROW(data::split_time(100, {0.5, 0.5, 0.1}), InvalidArgument);
}

TEST(Split, DisjointExhaustiveAndLeakFree) {
  for (std::size_t t = 30; t < 400; t += 7) {
    const auto s = data::split_time(t, {});
    EXPECT_EQ(s.train.begin, 0u);
    EXPECT_EQ(s.train.end, s.validation.begin);
    EXPECT_EQ(s.validation.end, s.test.begin);
    EXPECT_EQ(s.test.end, t);
    const auto b = testing::ramp_bundle(t);
    for (const auto& w : data::windows_with_labels_in(b, 4, 3, s.train)) {
      EXPECT_LE(w.origin + 3, s.train.end);
    }
  }
}

TEST(Holdout, Partitions) {
  std::vector<data::SeriesBundle> all;
  for (int k = 0; k < 8; ++k) all.push_back(testing::ramp_bundle(10, "s" + std::to_string(k)));
  const auto [train, unseen] = data::holdout_series(all, {"s0", "s2", "s4", "s6"});
  EXPECT_EQ(train.size(), 4u);
  EXPECT_EQ(unseen.size(), 4u);
  EXPECT_THROW(data::holdout_series(all, {}), InvalidArgument);
  std::set<std::string> every;
  for (const auto& b : all) every.insert(b.id);
  EXPECT_THROW(data::holdout_series(all, every), InvalidArgument);
  EXPECT_THROW(data::holdout_series(all, {"nope"}), InvalidArgument);
}

TEST(Synth, DeterministicBytes) {
  TempDir dir;
  data::SynthConfig cfg;
  cfg.length = 120;
  cfg.shock_onset = 60;
  data::write_dataset(dir.file("a.csv"), data::synth_generate(cfg, 3));
  data::write_dataset(dir.file("b.csv"), data::synth_generate(cfg, 3));
  data::write_dataset(dir.file("c.csv"), data::synth_generate(cfg, 4));
  EXPECT_EQ(io::read_file(dir.file("a.csv")), io::read_file(dir.file("b.csv")));
  EXPECT_NE(io::read_file(dir.file("a.csv")), io::read_file(dir.file("c.csv")));
}

TEST(Synth, ZeroPolicyLeavesBaseProcess) {
  data::SynthConfig cfg;
  cfg.length = 200;
  cfg.shock_onset = 100;
  cfg.policy_schedule.kind = data::PolicyKind::kNone;
  const auto shocked = data::synth_generate(cfg, 1);
  cfg.suppression_depth = 0.0;
  const auto base = data::synth_generate(cfg, 1);
  for (std::size_t k = 0; k < base.size(); ++k) EXPECT_EQ(shocked[k].target, base[k].target);
}

TEST(Synth, FullClosureScalesDemand) {
  data::SynthConfig cfg;
  cfg.policy_schedule.kind = data::PolicyKind::kStep;
  cfg.policy_schedule.level = 1.0;
  cfg.depth_jitter = 0.0;
  cfg.trend = 0.0;
  const double expected = data::suppression(1.0, cfg.suppression_depth, cfg.suppression_exponent);
  EXPECT_NEAR(expected, 0.4, 1e-15);
  for (const auto& b : data::synth_generate(cfg, 2)) {
    const auto onset = static_cast<std::ptrdiff_t>(cfg.shock_onset);
    const double pre = std::accumulate(b.target.begin(), b.target.begin() + onset, 0.0) /
                       static_cast<double>(onset);
    const double post = std::accumulate(b.target.begin() + onset, b.target.end(), 0.0) /
                        static_cast<double>(b.length() - static_cast<std::size_t>(onset));
    EXPECT_NEAR(post / pre, expected, 0.02) << b.id;
  }
}

TEST(Synth, ConfigJsonRejectsUnknownKeys) {
  data::SynthConfig cfg;
  nlohmann::json j;
  data::to_json(j, cfg);
  data::SynthConfig back;
  data::from_json(j, back);
  EXPECT_EQ(back.length, cfg.length);
  j["lenght"] = 3;
  EXPECT_THROW(data::from_json(j, back), ConfigError);
}

}  // namespace
}  // namespace demandnet
