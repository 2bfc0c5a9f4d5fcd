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

// End-to-end pipeline fitting and the two evaluation protocols.
//
// Method names: demandnet-lstm, demandnet-gru, demandnet-lstm-noskip (the
// LSTM forecaster without its demand cell), exp-smoothing, ar,
// seasonal-naive.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "demandnet/data/series.hpp"
#include "demandnet/effects/effect_model.hpp"
#include "demandnet/features/autoencoder.hpp"
#include "demandnet/features/spearman.hpp"
#include "demandnet/predict/forecaster.hpp"

namespace demandnet::eval {

inline const std::vector<int> kDefaultHorizons = {10, 20, 40, 80};

struct PipelineConfig {
  int window = 32;
  data::SplitFractions fractions;
  double static_band = 0.3;

  bool use_autoencoder = true;
  features::AutoencoderArch autoencoder_arch;
  features::AutoencoderTraining autoencoder;

  effects::EffectArch effect_arch;
  effects::EffectTraining effect;

  predict::ForecasterArch forecaster_arch;  // cell and demand cell set per method
  predict::ForecasterTraining forecaster;

  int kappa = 100;
  std::vector<double> dropout_candidates = {0.05, 0.1, 0.2, 0.35, 0.5};
  int dropout_windows = 8;  // validation windows scored per series
  predict::PolicyMode unseen_policy = predict::PolicyMode::kKnown;

  int ar_order = 7;
  int season = 7;
  int origin_stride = 1;
};

bool is_demandnet(const std::string& method);
// Throws InvalidArgument naming the valid methods.
void validate_methods(const std::vector<std::string>& methods);

// Static-feature selection, autoencoder and effect model shared by every
// forecaster trained for one seed.
struct SharedStages {
  features::CorrelationReport correlation;
  std::vector<std::string> static_names;  // retained
  std::optional<features::StackedAutoencoder> autoencoder;
  std::optional<features::AutoencoderResult> autoencoder_result;
  effects::EffectResult effect;
};

std::vector<predict::TrainingSeries> training_series(
    const std::vector<data::SeriesBundle>& bundles, const data::SplitFractions& fractions);

features::CorrelationReport select_static(const std::vector<predict::TrainingSeries>& series,
                                          double band);

// Autoencoder on every train-range window of the train-normalized series.
features::AutoencoderResult fit_autoencoder_stage(
    const std::vector<predict::TrainingSeries>& series, const PipelineConfig& config,
    uint64_t seed);

effects::EffectResult fit_effect_stage(const std::vector<predict::TrainingSeries>& series,
                                       const std::vector<std::string>& static_names,
                                       const PipelineConfig& config, uint64_t seed);

SharedStages fit_shared_stages(const std::vector<predict::TrainingSeries>& series,
                               const PipelineConfig& config, uint64_t seed);

// Copy of `config` whose forecaster cell and demand cell follow `method`.
PipelineConfig method_config(const PipelineConfig& config, const std::string& method);

// Trains config.forecaster_arch as given.
predict::ForecasterResult fit_forecaster(const std::vector<predict::TrainingSeries>& series,
                                         const SharedStages& shared,
                                         const PipelineConfig& config, uint64_t seed);

predict::ForecasterResult fit_forecaster(const std::vector<predict::TrainingSeries>& series,
                                         const SharedStages& shared,
                                         const PipelineConfig& config,
                                         const std::string& method, uint64_t seed);

// MC dropout probability for one normalized series, scored on up to
// config.dropout_windows origins spread over its validation range. Falls
// back to the first candidate when the range holds no usable origin.
predict::DropoutChoice choose_dropout(const predict::ForecasterModel& model,
                                      const data::SeriesBundle& normalized,
                                      const data::DatasetSplit& split,
                                      const PipelineConfig& config, predict::PolicyMode mode,
                                      uint64_t seed);

struct MetricSet {
  std::string method;
  int horizon = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double sd = 0.0;
  std::size_t n = 0;  // forecasts evaluated
  bool failed = false;
  std::string error;
};

struct SeedRun {
  uint64_t seed = 0;
  std::vector<MetricSet> cells;      // normalized scale
  std::vector<MetricSet> raw_cells;  // original units
  // Per-series cells keyed by series id, before averaging across series.
  std::map<std::string, std::vector<MetricSet>> series_cells;
  std::map<std::string, std::vector<MetricSet>> series_raw_cells;
  std::map<std::string, std::map<std::string, double>> chosen_p;  // method -> series -> p
  bool parameters_unchanged = true;
};

struct ExperimentReport {
  std::string protocol;  // split80 | unseen
  std::vector<std::string> methods;
  std::vector<int> horizons;
  std::vector<uint64_t> seeds;
  std::vector<std::string> series;  // evaluated series ids
  std::vector<SeedRun> runs;
  std::vector<MetricSet> cells;  // averaged over seeds
  std::vector<MetricSet> raw_cells;
  std::string config_snapshot;

  const MetricSet& cell(const std::string& method, int horizon) const;
  const MetricSet& seed_cell(std::size_t run, const std::string& method, int horizon) const;
};

ExperimentReport run_split80(const std::vector<data::SeriesBundle>& bundles,
                             const std::vector<std::string>& methods,
                             const std::vector<int>& horizons,
                             const std::vector<uint64_t>& seeds, const PipelineConfig& config);

ExperimentReport run_unseen(const std::vector<data::SeriesBundle>& bundles,
                            const std::set<std::string>& held_ids,
                            const std::vector<std::string>& methods,
                            const std::vector<int>& horizons,
                            const std::vector<uint64_t>& seeds, const PipelineConfig& config);

// `count` ids drawn without replacement with a seeded generator.
std::set<std::string> random_holdout(const std::vector<data::SeriesBundle>& bundles,
                                     std::size_t count, uint64_t seed);

// protocol,method,horizon,mae,rmse,sd,seeds
std::string report_csv(const ExperimentReport& report, bool raw = false);
std::string report_table(const ExperimentReport& report);

}  // namespace demandnet::eval
