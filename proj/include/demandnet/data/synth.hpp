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

// Seeded generator of policy-shocked daily demand series.
//
// Each series is a positive base process (level, linear trend, a weekly
// profile and Gaussian noise) multiplied by a suppression factor
//   g(pi) = 1 - depth * pi^exponent
// driven by the policy level pi in [0, 1]. Covariates are a log-cases proxy
// that rises after the shock onset, a mobility proxy that falls with the
// policy, and the policy itself.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "demandnet/data/series.hpp"

namespace demandnet::data {

enum class PolicyKind {
  kNone,      // pi = 0 everywhere
  kStep,      // pi = level from the onset on
  kEpisodes,  // piecewise-constant random levels after the onset
};

struct PolicySchedule {
  PolicyKind kind = PolicyKind::kEpisodes;
  double level = 1.0;                        // kStep
  double mean_dwell = 18.0;                  // kEpisodes, days per episode
  std::vector<double> levels = {0.0, 0.25, 0.5, 0.75, 1.0};  // kEpisodes
};

struct SynthConfig {
  int series_count = 8;
  int length = 1000;
  double base_level = 100.0;
  double season_amp = 0.15;   // weekly amplitude, fraction of level
  double trend = 2e-4;        // per-day drift, fraction of level
  double noise_sd = 0.03;     // fraction of level
  int shock_onset = 600;
  PolicySchedule policy_schedule;
  double suppression_exponent = 1.5;
  double suppression_depth = 0.6;
  // Per-series depth multiplier is 1 + depth_jitter * (tourism_share - 0.5).
  double depth_jitter = 0.5;
  std::string start_date = "2018-01-01";

  void validate() const;
};

// Suppression factor 1 - depth * pi^exponent.
double suppression(double policy, double depth, double exponent);

std::vector<SeriesBundle> synth_generate(const SynthConfig& config,
                                         uint64_t seed);

void to_json(nlohmann::json& j, const SynthConfig& config);
// Rejects unknown keys; missing keys keep their defaults.
void from_json(const nlohmann::json& j, SynthConfig& config);

}  // namespace demandnet::data
