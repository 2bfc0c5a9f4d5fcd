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

// Run configuration for the command-line tool.
//
// Resolution order, lowest to highest precedence: built-in defaults, the
// JSON config file, `--set section.key=value` overrides, then the dedicated
// `--seed` and `--out` flags. Every key is validated against the defaults
// tree; an unknown key is rejected with the closest valid key.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "demandnet/data/series.hpp"
#include "demandnet/data/synth.hpp"
#include "demandnet/eval/experiment.hpp"

namespace demandnet::cli {

struct RunConfig {
  uint64_t seed = 0;

  // paths
  std::string data_path;       // empty: <out>/synth.csv written by `synth`
  std::string static_path;     // empty: <out>/synth_static.csv when data_path is empty
  std::string out_dir = "out";
  std::string checkpoint_dir;  // empty: out_dir

  data::SynthConfig synth;
  data::CsvSchema schema;
  std::vector<int> horizons = eval::kDefaultHorizons;
  eval::PipelineConfig pipeline;

  // effects-curve
  std::vector<std::string> curve_features;  // empty: every model input
  int curve_points = 50;
  std::vector<std::string> surface_features;  // empty or exactly two
  int surface_points = 20;

  // forecast
  long long forecast_origin = -1;  // -1: first test row
  double forecast_dropout = -1.0;  // < 0: chosen on the validation range
  std::vector<std::string> forecast_series;  // empty: all

  // evaluate
  std::vector<std::string> protocols = {"split80", "unseen"};
  std::vector<std::string> methods = {"demandnet-lstm", "demandnet-gru",
                                      "demandnet-lstm-noskip", "exp-smoothing", "ar",
                                      "seasonal-naive"};
  std::vector<uint64_t> seeds;        // empty: {seed}
  std::vector<std::string> held_out;  // empty: holdout_count ids drawn with `seed`
  int holdout_count = 4;

  std::string resolved_checkpoint_dir() const {
    return checkpoint_dir.empty() ? out_dir : checkpoint_dir;
  }
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
// Strict: unknown keys and type mismatches raise ConfigError.
RunConfig from_json(const nlohmann::json& j);

// Dotted paths of every leaf of the defaults tree.
std::vector<std::string> config_keys();
std::size_t edit_distance(const std::string& a, const std::string& b);
std::string nearest_key(const std::string& key);

struct ConfigSources {
  std::optional<std::string> file;
  std::vector<std::string> overrides;  // key=value; value parsed as JSON, else string
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
};

RunConfig resolve_config(const ConfigSources& sources);

// Pretty JSON of every resolved field; feeding it back as --config replays
// the run.
std::string effective_config_json(const RunConfig& config);

}  // namespace demandnet::cli
