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

// Multi-horizon recurrent forecaster.
//
//   h1 = RNN_1(window) * m1          (mask shared over time steps)
//   h2 = RNN_2(h1)[last] * m2
//   base = W [h2; extras] + b         (all H steps at once)
//   out_t = base_t + delta(pi_t)      (DemandCell, additive mode)
//
// extras are the normalized static features of the series followed by the
// autoencoder code of the window, when an autoencoder is attached.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/data/series.hpp"
#include "demandnet/effects/effect_model.hpp"
#include "demandnet/features/autoencoder.hpp"
#include "demandnet/nn/dense.hpp"
#include "demandnet/nn/recurrent.hpp"
#include "demandnet/nn/training.hpp"

namespace demandnet::predict {

enum class DemandCellMode { kAdditive, kMultiplicative, kNone };

std::string demand_cell_name(DemandCellMode mode);
DemandCellMode demand_cell_from_name(const std::string& name);

enum class PolicyMode { kKnown, kDummy };

struct ForecasterArch {
  nn::CellKind cell = nn::CellKind::kLstm;
  int hidden = 128;
  int layers = 2;
  int window = 32;
  int horizon = 80;
  int channels = 0;  // 1 + covariates; filled from data when 0
  DemandCellMode demand_cell = DemandCellMode::kAdditive;

  void validate() const;
};

// adjusted_t = base_t + delta(pi_t, reference) (additive) or
// base_t * exp(delta(pi_t, reference)) (multiplicative).
Vector demand_cell_adjust(const Vector& base, const Vector& policies,
                          const effects::EffectModel& effect, double reference = 0.0,
                          DemandCellMode mode = DemandCellMode::kAdditive);

// Everything a forecast may read: history, future policies and extras.
struct ForecastInput {
  Matrix window;    // tau x channels, normalized
  Vector policies;  // future policy levels
  Vector extras;
};

struct ForecastDistribution {
  Matrix samples;  // kappa x H
  Vector mean;
  Vector sd;
  double p = 0.0;
  int kappa = 0;
};

// Mean and population SD of each column.
ForecastDistribution summarize(Matrix samples, double p);

// (1/kappa) sum_k (y_k - truth)^2 per step.
Vector variance_vs_truth(const ForecastDistribution& dist, const Vector& truth);

class ForecasterModel {
 public:
  ForecasterModel() = default;
  ForecasterModel(const ForecasterArch& arch, int extras, uint64_t seed);

  const ForecasterArch& arch() const { return arch_; }
  int extras_size() const { return extras_; }

  // Column batch of inputs; masks holds one hidden x batch matrix per
  // recurrent layer (an empty matrix disables dropout for that layer).
  struct Batch {
    std::vector<const Matrix*> windows;
    Matrix policies;  // horizon x batch
    Matrix extras;    // extras x batch
  };

  // DemandCell-adjusted outputs, horizon x batch.
  Matrix forward(const Batch& batch, const std::vector<Matrix>& masks) const;
  double loss(const Batch& batch, const Matrix& labels, const std::vector<Matrix>& masks,
              double lambda) const;
  double loss_and_grad(const Batch& batch, const Matrix& labels,
                       const std::vector<Matrix>& masks, double lambda);

  nn::ParamList params();
  uint64_t parameter_hash() const;

  // Components used to assemble inputs and adjust outputs.
  std::optional<effects::EffectModel> effect;
  std::optional<features::StackedAutoencoder> autoencoder;
  double policy_reference = 0.0;
  std::vector<std::string> static_names;
  Vector static_mean;
  Vector static_sd;
  // Mean policy level by calendar day across the training series.
  int64_t dummy_start_day = 0;
  std::vector<double> dummy_policy;
  std::vector<double> dropout_candidates = {0.05, 0.1, 0.2, 0.35, 0.5};
  // Optimizer and RNG state at the end of training.
  std::string optimizer_state;
  std::string rng_state;

  // Builds the input for a forecast issued at `origin` (first predicted row)
  // of an already normalized series. Policies past the end of the series
  // repeat its last level; dummy mode reads the stored trajectory instead.
  ForecastInput make_input(const data::SeriesBundle& normalized, std::size_t origin,
                           PolicyMode mode = PolicyMode::kKnown) const;
  Vector static_extras(const data::SeriesBundle& bundle) const;
  std::vector<double> dummy_policies(int64_t first_day, std::size_t count) const;

  std::string save() const;
  static ForecasterModel load(const std::string& bytes);

 private:
  struct Forward;
  Forward run(const Batch& batch, const std::vector<Matrix>& masks, bool keep_trace) const;
  Matrix deltas(const Matrix& policies) const;

  ForecasterArch arch_;
  int extras_ = 0;
  std::vector<nn::RecurrentCell> layers_;
  nn::DenseLayer readout_;
};

struct ForecasterTraining {
  nn::TrainConfig train;
  double dropout = 0.1;  // training-time dropout probability

  ForecasterTraining() {
    train.optimizer = nn::OptimizerKind::kAdam;
    train.learning_rate = 1e-3;
    train.patience = 10;
  }
};

struct ForecasterResult {
  ForecasterModel model;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_epoch = 0;
};

// Training material for one series: the raw bundle and its split. Windows
// whose labels lie in the train (validation) range form the training
// (validation) set; statistics come from the train range.
struct TrainingSeries {
  data::SeriesBundle bundle;
  data::DatasetSplit split;
};

ForecasterResult train_forecaster(const std::vector<TrainingSeries>& series,
                                  const ForecasterTraining& config, ForecasterArch arch,
                                  std::optional<effects::EffectModel> effect,
                                  std::optional<features::StackedAutoencoder> autoencoder,
                                  const std::vector<std::string>& static_names);

// kappa stochastic passes with fresh masks; pass k draws its masks from
// stream k, so the result depends only on (model, input, kappa, p, seed).
ForecastDistribution mc_forecast(const ForecasterModel& model, const ForecastInput& input,
                                 int kappa, double p, uint64_t seed);

// Gaussian negative log-likelihood of the truths under (mean, sd + 1e-6)
// averaged over windows and steps, for each candidate; the argmin wins,
// ties go to the smaller probability.
struct DropoutChoice {
  double p = 0.0;
  std::vector<double> candidates;
  std::vector<double> scores;
};

DropoutChoice optimize_dropout(const ForecasterModel& model,
                               const std::vector<ForecastInput>& inputs,
                               const std::vector<Vector>& truths,
                               std::vector<double> candidates, int kappa, uint64_t seed);

struct UnseenForecast {
  ForecastDistribution distribution;  // normalized units
  data::NormStats stats;
};

// Forecast for a series the model never trained on. The series is
// normalized with statistics of rows [0, history_end); parameters are
// read only.
UnseenForecast forecast_unseen(const ForecasterModel& model, const data::SeriesBundle& raw,
                               std::size_t history_end, std::size_t origin, PolicyMode mode,
                               int kappa, double p, uint64_t seed);

// Deterministic (p = 0) prediction.
Vector point_forecast(const ForecasterModel& model, const ForecastInput& input);

std::string forecast_csv_header();
// var_vs_truth is filled for the steps covered by `truth`, which may be
// shorter than the horizon; later steps leave it blank.
std::string forecast_csv_rows(const std::string& series_id, const ForecastDistribution& dist,
                              const Vector* truth);

}  // namespace demandnet::predict
