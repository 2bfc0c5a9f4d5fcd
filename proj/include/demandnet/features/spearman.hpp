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

// Spearman rank correlation with average ranks for ties, and the static
// feature filter built on it.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/data/series.hpp"

namespace demandnet::features {

// Ascending ranks 1..n; tied values share the mean of the positions they
// occupy. Throws InvalidArgument on NaN or empty input.
std::vector<double> rank_with_ties(std::span<const double> values);

// Pearson correlation of the tie-averaged ranks. Throws
// UndefinedCorrelation when either input is constant.
double spearman(std::span<const double> a, std::span<const double> b);

struct CorrelationReport {
  std::vector<std::string> names;
  Matrix pairwise;                         // features x features
  std::vector<double> target_correlation;  // per feature
  std::vector<bool> retained;
  double band = 0.3;

  std::vector<std::string> retained_names() const;
};

// Keeps a feature iff |r_S(feature, target_stat)| >= band. `profiles` is
// series x features. A constant feature correlates 0 with everything.
CorrelationReport filter_static(const std::vector<std::string>& names,
                                const Matrix& profiles,
                                std::span<const double> target_stat,
                                double band = 0.3);

// First index whose policy level is positive, or the series length.
std::size_t shock_onset(const data::SeriesBundle& bundle);

// Mean target after the shock onset divided by the mean before it, both
// restricted to `range`. Throws InsufficientDataError when either side is
// empty or the pre-onset mean is zero.
double shock_response(const data::SeriesBundle& bundle, data::Range range);

// Heatmap-ready CSV: header row of names, then one row per feature.
std::string correlation_matrix_csv(const CorrelationReport& report);

}  // namespace demandnet::features
