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

#include "demandnet/data/synth.hpp"
#include "demandnet/eval/baselines.hpp"
#include "demandnet/eval/experiment.hpp"
#include "test_util.hpp"

namespace demandnet {
namespace {

using V = std::vector<double>;

TEST(Metrics, HandExamples) {
  const V truth = {1.0, 2.0};
  EXPECT_EQ(eval::mae(truth, truth), 0.0);
  EXPECT_EQ(eval::rmse(truth, truth), 0.0);
  EXPECT_NEAR(eval::mae(V{2.0, 1.0}, truth), 1.0, 1e-12);
  EXPECT_NEAR(eval::rmse(V{2.0, 1.0}, truth), 1.0, 1e-12);
  EXPECT_NEAR(eval::mae(V{4.0, 6.0}, truth), 3.5, 1e-12);
  EXPECT_NEAR(eval::rmse(V{4.0, 6.0}, truth), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(std::sqrt(12.5), 3.53553, 1e-5);
  EXPECT_THROW(eval::mae(V{1.0}, truth), DimensionMismatch);
}

TEST(Metrics, EqualAbsoluteErrorsGiveEqualMaeAndRmse) {
  Rng rng(1);
  V pred, truth;
  for (int i = 0; i < 30; ++i) {
    truth.push_back(rng.normal());
    pred.push_back(truth.back() + (rng.uniform() < 0.5 ? 0.75 : -0.75));
  }
  EXPECT_NEAR(eval::mae(pred, truth), eval::rmse(pred, truth), 1e-12);
}

TEST(Metrics, PredSd) {
  EXPECT_EQ(eval::pred_sd(V{3.0, 3.0, 3.0}), 0.0);
  EXPECT_EQ(eval::pred_sd(V{7.0}), 0.0);
  EXPECT_NEAR(eval::pred_sd(V{0.0, 2.0}), 1.0, 1e-12);
  EXPECT_NEAR(eval::pred_sd(V{1.0, 2.0, 3.0, 4.0}), std::sqrt(1.25), 1e-12);
  EXPECT_NEAR(std::sqrt(1.25), 1.11803, 1e-5);
}

TEST(ExpSmoothing, DegenerateAndHandCases) {
  const V s = {3.0, 1.0, 4.0, 1.0, 5.0};
  EXPECT_EQ(eval::exp_smoothing_forecast(s, 1.0, 3), (V{5.0, 5.0, 5.0}));
  for (const double a : {0.1, 0.5, 0.9}) {
    EXPECT_EQ(eval::exp_smoothing_forecast(V(10, 2.5), a, 4), V(4, 2.5));
  }
  EXPECT_EQ(eval::exp_smoothing_forecast(V{0.0, 1.0}, 0.5, 2), (V{0.5, 0.5}));
  const auto holt = eval::exp_smoothing_forecast(V{0.0, 1.0, 2.0, 3.0}, 0.5,
                                                 3, eval::SmoothingMode::kHolt, 0.1);
  for (int h = 0; h < 3; ++h) EXPECT_NEAR(holt[h], 4.0 + h, 1e-12);
}

TEST(ExpSmoothing, TuningPrefersTrendOnRamp) {
  V ramp;
  for (int t = 0; t < 60; ++t) ramp.push_back(0.5 * t);
  const auto fit = eval::tune_exp_smoothing(ramp, 40, 60, 5);
  EXPECT_EQ(fit.mode, eval::SmoothingMode::kHolt);
  EXPECT_LE(fit.validation_mae, 1e-9);
}

TEST(Ar, RecoversExactAr1) {
  V s = {1.0};
  for (int t = 1; t < 20; ++t) s.push_back(0.5 * s.back());
  const auto m = eval::fit_ar(s, 1, false);
  ASSERT_EQ(m.coefficients.size(), 1u);
  EXPECT_NEAR(m.coefficients[0], 0.5, 1e-8);
}

TEST(Ar, ConstantAndRampSeries) {
  const auto flat = eval::ar_forecast(V(30, 4.0), 3, 5);
  for (const double v : flat) EXPECT_NEAR(v, 4.0, 1e-9);
  V ramp;
  for (int t = 0; t < 30; ++t) ramp.push_back(2.0 * t + 1.0);
  const auto next = eval::ar_forecast(ramp, 2, 4);
  for (int h = 0; h < 4; ++h) EXPECT_NEAR(next[h], 2.0 * (30 + h) + 1.0, 1e-9);
  EXPECT_THROW(eval::fit_ar(V{1.0, 2.0}, 3), InsufficientDataError);
}

TEST(SeasonalNaive, RepeatsLastSeason) {
  const V s = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(eval::seasonal_naive_forecast(s, 3, 7), (V{3, 4, 5}));
  EXPECT_EQ(eval::seasonal_naive_forecast(s, 9, 7), (V{3, 4, 5, 6, 7, 8, 9, 3, 4}));
  EXPECT_EQ(eval::seasonal_naive_forecast(s, 2, 1), (V{9, 9}));
}

std::vector<data::SeriesBundle> synth_bundles(int count, int length) {
  data::SynthConfig c;
  c.series_count = count;
  c.length = length;
  c.shock_onset = length * 3 / 5;
  return data::synth_generate(c, 21);
}

TEST(Report, BaselineOnlyShapeAndDeterminism) {
  const auto bundles = synth_bundles(3, 900);
  eval::PipelineConfig cfg;
  cfg.origin_stride = 7;
  const auto a = eval::run_split80(bundles, {"seasonal-naive"}, eval::kDefaultHorizons, {1},
                                   cfg);
  EXPECT_EQ(a.cells.size(), 4u);
  for (const auto& c : a.cells) {
    EXPECT_FALSE(c.failed);
    EXPECT_GT(c.n, 0u);
    EXPECT_EQ(c.sd, 0.0);
  }
  const auto b = eval::run_split80(bundles, {"seasonal-naive"}, eval::kDefaultHorizons, {1},
                                   cfg);
  EXPECT_EQ(eval::report_csv(a), eval::report_csv(b));
  EXPECT_EQ(eval::report_csv(a, true), eval::report_csv(b, true));
  const std::string csv = eval::report_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "protocol,method,horizon,mae,rmse,sd,seeds");
  EXPECT_NE(csv.find("\nsplit80,seasonal-naive,80,"), std::string::npos);
  EXPECT_FALSE(eval::report_table(a).empty());
}

TEST(Report, ErrorGrowsWithHorizonForBaselines) {
  const auto bundles = synth_bundles(3, 900);
  eval::PipelineConfig cfg;
  cfg.origin_stride = 5;
  const auto r = eval::run_split80(bundles, {"exp-smoothing", "ar"}, {10, 80}, {1}, cfg);
  for (const std::string m : {"exp-smoothing", "ar"}) {
    EXPECT_LT(r.cell(m, 10).mae, r.cell(m, 80).mae) << m;
  }
  EXPECT_THROW(r.cell("ar", 20), InvalidArgument);
}

TEST(Report, UnseenCoversHeldSeriesOnly) {
  const auto bundles = synth_bundles(8, 700);
  const auto held = eval::random_holdout(bundles, 4, 3);
  EXPECT_EQ(held.size(), 4u);
  EXPECT_EQ(held, eval::random_holdout(bundles, 4, 3));
  eval::PipelineConfig cfg;
  cfg.origin_stride = 10;
  const auto r = eval::run_unseen(bundles, held, {"seasonal-naive"}, {10, 20}, {1}, cfg);
  EXPECT_EQ(r.series.size(), 4u);
  for (const auto& id : r.series) EXPECT_TRUE(held.count(id)) << id;
  EXPECT_EQ(r.cells.size(), 2u);
  EXPECT_THROW(eval::random_holdout(bundles, 9, 1), InvalidArgument);
}

TEST(Report, TinyDemandNetRunIsDeterministic) {
  const auto bundles = synth_bundles(3, 260);
  eval::PipelineConfig cfg;
  cfg.window = 12;
  cfg.use_autoencoder = false;
  cfg.effect_arch.hidden = {4};
  cfg.effect.train.epochs = 3;
  cfg.forecaster_arch.hidden = 6;
  cfg.forecaster.train.epochs = 2;
  cfg.forecaster.train.samples_per_epoch = 64;
  cfg.kappa = 5;
  cfg.dropout_windows = 2;
  cfg.origin_stride = 8;
  const std::vector<std::string> methods = {"demandnet-gru", "seasonal-naive"};
  const auto a = eval::run_split80(bundles, methods, {5, 10}, {4, 5}, cfg);
  const auto b = eval::run_split80(bundles, methods, {5, 10}, {4, 5}, cfg);
  EXPECT_EQ(eval::report_csv(a), eval::report_csv(b));
  EXPECT_EQ(a.runs.size(), 2u);
  EXPECT_FALSE(a.cell("demandnet-gru", 10).failed);
  EXPECT_GT(a.cell("demandnet-gru", 10).sd, 0.0);
  EXPECT_NE(eval::report_csv(a).find(",4;5\n"), std::string::npos);
}

TEST(Methods, Validation) {
  EXPECT_NO_THROW(eval::validate_methods({"ar", "demandnet-lstm-noskip"}));
  EXPECT_THROW(eval::validate_methods({"arima"}), InvalidArgument);
  EXPECT_TRUE(eval::is_demandnet("demandnet-gru"));
  EXPECT_FALSE(eval::is_demandnet("exp-smoothing"));
  const auto noskip = eval::method_config({}, "demandnet-lstm-noskip");
  EXPECT_EQ(noskip.forecaster_arch.demand_cell, predict::DemandCellMode::kNone);
  EXPECT_EQ(eval::method_config({}, "demandnet-gru").forecaster_arch.cell, nn::CellKind::kGru);
}

}  // namespace
}  // namespace demandnet
