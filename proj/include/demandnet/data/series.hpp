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

// Series containers, ingestion, normalization, windowing and splitting.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "demandnet/common.hpp"

namespace demandnet::data {

// Half-open index range [begin, end).
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool operator==(const Range&) const = default;
};

// One location's target series, its covariate panel and static profile.
struct SeriesBundle {
  std::string id;
  int64_t start_day = 0;  // days since 1970-01-01 of row 0
  std::vector<double> target;
  Matrix covariates;  // T x M
  std::vector<std::string> covariate_names;
  int policy_index = -1;  // column of `covariates` holding the policy level
  std::vector<std::string> static_names;
  std::vector<double> static_values;

  std::size_t length() const { return target.size(); }
  std::size_t covariate_count() const {
    return static_cast<std::size_t>(covariates.cols());
  }
  std::vector<double> policy() const;

  // Throws on any broken invariant (shape, finiteness, policy range).
  void validate() const;
};

// Per-channel z-score statistics. Channel 0 is the target, channel 1 + j is
// covariate j. The policy channel is passed through unchanged so that
// normalized bundles keep policy levels in [0, 1].
struct NormStats {
  std::vector<double> location;
  std::vector<double> scale;
  std::vector<bool> constant;
  int passthrough_channel = -1;

  std::size_t channels() const { return location.size(); }
  double normalize(std::size_t channel, double value) const {
    return (value - location[channel]) / scale[channel];
  }
  double denormalize(std::size_t channel, double value) const {
    return value * scale[channel] + location[channel];
  }
};

struct SupervisedSample {
  Matrix window;           // tau x (1 + M), column 0 = target
  Vector future_policies;  // H
  Vector label;            // H future targets
  std::size_t origin = 0;  // index of the first label row
};

struct DatasetSplit {
  Range train;
  Range validation;
  Range test;
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

// Column mapping for CSV ingestion. An empty covariate list selects every
// column after the target, in file order.
struct CsvSchema {
  std::string id_column = "series_id";
  std::string date_column = "date";
  std::string target_column = "target";
  std::vector<std::string> covariate_columns;
  std::string policy_column = "policy";
  std::optional<std::string> static_path;
};

// ISO-8601 (YYYY-MM-DD) <-> days since epoch.
int64_t parse_date(const std::string& text);
std::string format_date(int64_t day);

std::vector<SeriesBundle> load_dataset(const std::string& path,
                                       const CsvSchema& schema);

void write_dataset(const std::string& path,
                   const std::vector<SeriesBundle>& bundles);
void write_static(const std::string& path,
                  const std::vector<SeriesBundle>& bundles);

NormStats fit_norm_stats(const SeriesBundle& bundle, Range fit_range);
NormStats fit_norm_stats(const SeriesBundle& bundle,
                         const DatasetSplit& split);

SeriesBundle normalize(const SeriesBundle& bundle, const NormStats& stats);
SeriesBundle denormalize(const SeriesBundle& bundle, const NormStats& stats);

// Every window of length tau followed by a label of length horizon, stride 1.
std::vector<SupervisedSample> make_windows(const SeriesBundle& bundle,
                                           std::size_t tau,
                                           std::size_t horizon);

// Windows whose whole label lies in `labels`. History rows may precede
// `labels.begin`.
std::vector<SupervisedSample> windows_with_labels_in(
    const SeriesBundle& bundle, std::size_t tau, std::size_t horizon,
    Range labels);

// Single window ending just before `origin`; policies past the end of the
// series repeat the last observed level, labels past the end are absent
// (label is shortened).
SupervisedSample window_at(const SeriesBundle& bundle, std::size_t tau,
                           std::size_t horizon, std::size_t origin);

DatasetSplit split_time(std::size_t length, const SplitFractions& fractions);
DatasetSplit split_time(const SeriesBundle& bundle,
                        const SplitFractions& fractions);

std::pair<std::vector<SeriesBundle>, std::vector<SeriesBundle>> holdout_series(
    const std::vector<SeriesBundle>& bundles,
    const std::set<std::string>& held_ids);

}  // namespace demandnet::data
