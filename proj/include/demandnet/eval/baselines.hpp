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

// Forecast metrics and the classical baselines.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "demandnet/common.hpp"

namespace demandnet::eval {

double mae(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);
// Population SD of the samples about their mean.
double pred_sd(std::span<const double> samples);

enum class SmoothingMode { kSimple, kHolt };

std::string smoothing_name(SmoothingMode mode);

// Simple: l_0 = x_0, l_t = a x_t + (1 - a) l_{t-1}; flat forecast at l_n.
// Holt: additionally b_0 = x_1 - x_0,
//   l_t = a x_t + (1 - a)(l_{t-1} + b_{t-1})
//   b_t = beta (l_t - l_{t-1}) + (1 - beta) b_{t-1}
// and the forecast h steps ahead is l_n + h b_n.
std::vector<double> exp_smoothing_forecast(std::span<const double> series, double alpha,
                                           int horizon, SmoothingMode mode = SmoothingMode::kSimple,
                                           double beta = 0.1);

struct SmoothingFit {
  SmoothingMode mode = SmoothingMode::kSimple;
  double alpha = 0.5;
  double beta = 0.0;
  double validation_mae = 0.0;
};

// Grid search over mode, alpha and beta minimizing the MAE of forecasts
// issued from every origin in [validation_begin, validation_end - horizon],
// each using only the rows before it. The horizon shrinks to the validation
// length when that is shorter.
SmoothingFit tune_exp_smoothing(std::span<const double> series, std::size_t validation_begin,
                                std::size_t validation_end, int horizon);

struct ArModel {
  int order = 1;
  bool differenced = true;
  double intercept = 0.0;
  std::vector<double> coefficients;  // phi_1 .. phi_p
  bool ridge = false;                // lag matrix was rank deficient
};

// Least squares with an unpenalized intercept on the (optionally first
// differenced) series. A rank-deficient centered lag matrix falls back to a
// ridge penalty of 1e-6.
ArModel fit_ar(std::span<const double> series, int order, bool difference = true);

// Iterated multi-step forecast continuing `history` with a fitted model.
std::vector<double> ar_predict(const ArModel& model, std::span<const double> history,
                               int horizon);

std::vector<double> ar_forecast(std::span<const double> series, int order, int horizon,
                                bool difference = true);

// Repeats the value observed `season` steps before each target step.
std::vector<double> seasonal_naive_forecast(std::span<const double> series, int horizon,
                                            int season = 7);

}  // namespace demandnet::eval
