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

// Penalized multilayer regression over covariates, its marginal-effect
// curves and the policy delta consumed by the forecaster.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/data/series.hpp"
#include "demandnet/nn/dense.hpp"
#include "demandnet/nn/training.hpp"

namespace demandnet::effects {

struct EffectArch {
  std::vector<int> hidden = {32, 32};
  nn::Activation hidden_activation = nn::Activation::kSigmoid;
};

// Least-squares polynomial in the shifted and scaled variable
// s = (x - center) / spread. coefficients[k] multiplies s^k.
struct Polynomial {
  std::vector<double> coefficients;
  double center = 0.0;
  double spread = 1.0;
  double max_residual = 0.0;

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double operator()(double x) const;
};

struct MarginalCurve {
  std::string feature;
  std::vector<double> grid;
  std::vector<double> values;
  std::optional<Polynomial> polynomial;
  // Some grid point lies more than 20% of the training range outside it.
  bool extrapolated = false;
};

class EffectModel {
 public:
  EffectModel() = default;
  EffectModel(std::vector<std::string> feature_names, const EffectArch& arch,
              uint64_t seed);

  const std::vector<std::string>& feature_names() const { return names_; }
  std::size_t input_size() const { return names_.size(); }
  const EffectArch& arch() const { return arch_; }

  // Raw-unit training statistics; inputs are z-scored with mean / sd.
  const Vector& feature_mean() const { return mean_; }
  const Vector& feature_sd() const { return sd_; }
  const Vector& feature_min() const { return min_; }
  const Vector& feature_max() const { return max_; }
  void set_feature_stats(const Matrix& raw_rows);

  int feature_index(const std::string& name) const;  // -1 when absent

  // rows x features in raw units -> one prediction per row.
  Vector predict(const Matrix& raw_rows) const;
  double predict_one(const Vector& raw) const;

  // MSE of the rows plus lambda * sum of squared weights.
  double loss(const Matrix& raw_rows, const Vector& target, double lambda) const;
  // Same value; accumulates gradients (caller zeroes them).
  double loss_and_grad(const Matrix& raw_rows, const Vector& target, double lambda);

  nn::ParamList params();

  // Policy feature used by policy_delta and its optional fitted polynomial.
  std::string policy_feature;
  std::optional<Polynomial> policy_polynomial;

  std::string save() const;
  static EffectModel load(const std::string& bytes);

 private:
  Matrix standardize(const Matrix& raw_rows) const;  // features x rows

  std::vector<std::string> names_;
  EffectArch arch_;
  std::vector<nn::DenseLayer> layers_;
  Vector mean_;
  Vector sd_;
  Vector min_;
  Vector max_;
};

struct EffectTraining {
  nn::TrainConfig train;
  int policy_degree = 3;     // negative disables the polynomial fit
  int policy_grid_points = 50;

  EffectTraining() {
    train.optimizer = nn::OptimizerKind::kSgd;
    train.learning_rate = 0.1;
  }
};

struct EffectResult {
  EffectModel model;
  std::vector<double> loss_history;  // [0] before training, then per epoch
  std::vector<std::string> warnings;
};

// Pooled regression rows: covariates of each row plus the series' static
// features, against the per-series normalized target.
struct EffectDataset {
  std::vector<std::string> names;
  Matrix rows;  // rows x features, raw units
  Vector target;
};

EffectDataset make_effect_dataset(const std::vector<data::SeriesBundle>& bundles,
                                  const std::vector<data::Range>& ranges,
                                  const std::vector<data::NormStats>& stats,
                                  const std::vector<std::string>& static_names);

EffectResult train_effect_model(const Matrix& features, const Vector& target,
                                const std::vector<std::string>& names,
                                const EffectTraining& config,
                                const EffectArch& arch = {},
                                const std::string& policy_feature = "policy");

// Curve of the model output as `feature` sweeps `grid` with every other
// input at its training mean.
MarginalCurve marginal_effect(const EffectModel& model, const std::string& feature,
                              const std::vector<double>& grid);

// Evenly spaced grid of n points on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int n);

Polynomial fit_polynomial(const std::vector<double>& x, const std::vector<double>& y,
                          int degree);
Polynomial fit_polynomial(const MarginalCurve& curve, int degree);

// Output on a 2-feature grid (rows follow grid_a, columns grid_b).
Matrix marginal_surface(const EffectModel& model, const std::string& feature_a,
                        const std::vector<double>& grid_a, const std::string& feature_b,
                        const std::vector<double>& grid_b);

// curve(pi) - curve(reference) on the policy curve, normalized target units.
double policy_delta(const EffectModel& model, double pi, double reference = 0.0);

std::string curve_csv(const MarginalCurve& curve);
// term,coefficient rows plus center, spread and max_residual.
std::string polynomial_csv(const Polynomial& poly);

}  // namespace demandnet::effects
