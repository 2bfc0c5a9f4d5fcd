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

// Pipeline subcommands. Every artifact lands in the output directory
// (checkpoints in the checkpoint directory) through a temporary file and a
// rename, next to `<command>.config.json` holding the resolved configuration.
//
//   synth            synth.csv, synth_static.csv
//   ingest           dataset.csv, dataset_static.csv, ingest_summary.csv
//   select-features  correlation_matrix.csv, static_correlation.csv,
//                    retained_features.txt, encoded_features.csv,
//                    autoencoder_loss.csv, autoencoder.ckpt
//   train-effects    effect_model.ckpt, effect_loss.csv
//   effects-curve    curve_<feature>.csv, policy_polynomial.csv, surface.csv
//   train            forecaster.ckpt, train_history.csv
//   forecast         forecast.csv, forecast_raw.csv
//   evaluate         report_<protocol>.csv, report_<protocol>_raw.csv,
//                    report_<protocol>.txt, dropout_<protocol>.csv

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "demandnet/cli/config.hpp"

namespace demandnet::cli {

const std::vector<std::string>& command_names();

// Paths of the artifacts written, in write order.
std::vector<std::string> run_command(const std::string& command, const RunConfig& config,
                                     std::ostream& log);

std::vector<std::string> cmd_synth(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_ingest(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_select_features(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_train_effects(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_effects_curve(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_train(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_forecast(const RunConfig& config, std::ostream& log);
std::vector<std::string> cmd_evaluate(const RunConfig& config, std::ostream& log);

}  // namespace demandnet::cli
