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

// Stacked recurrent autoencoder for dynamic features.
//
// Encoder: recurrent layers (widths e.g. 64, 32) read the window; a linear
// dense bottleneck maps the last hidden state to u (size h).
// Decoder: a tanh dense expansion of u seeds the hidden state of the first
// decoder layer, which runs for the window length on zero inputs; decoder
// widths mirror the encoder; a linear readout emits every channel per step.

#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/data/series.hpp"
#include "demandnet/nn/dense.hpp"
#include "demandnet/nn/recurrent.hpp"
#include "demandnet/nn/training.hpp"

namespace demandnet::features {

struct AutoencoderArch {
  nn::CellKind cell = nn::CellKind::kLstm;
  std::vector<int> encoder_widths = {64, 32};
  int bottleneck = 8;
  int channels = 0;  // per-step features of the window
  int length = 0;    // window length

  void validate() const;
};

struct AutoencoderTraining {
  nn::TrainConfig train;
  // Stop once validation MSE < threshold_fraction * input variance. A
  // non-finite value disables the threshold (the epoch budget decides).
  double threshold_fraction = 0.2;
  double validation_fraction = 0.1;
  // Random subset of windows used for training + validation; 0 uses all.
  int max_windows = 0;
};

class StackedAutoencoder {
 public:
  StackedAutoencoder() = default;
  StackedAutoencoder(const AutoencoderArch& arch, uint64_t seed);

  const AutoencoderArch& arch() const { return arch_; }

  // window: length x channels.
  Vector encode(const Matrix& window) const;
  // Codes of a batch of windows, one column each.
  Matrix encode_batch(std::span<const Matrix* const> windows) const;
  Matrix decode(const Vector& u) const;
  Matrix reconstruct(const Matrix& window) const;

  // Mean squared reconstruction error over the batch (no penalty term).
  double reconstruction_mse(std::span<const Matrix> windows) const;

  // Mean squared reconstruction error of the batch plus the weight penalty;
  // accumulates gradients into the parameters (caller zeroes them).
  double loss_and_grad(std::span<const Matrix* const> windows, double lambda);
  double loss(std::span<const Matrix* const> windows, double lambda) const;

  nn::ParamList params();

  std::string save() const;
  static StackedAutoencoder load(const std::string& bytes);

 private:
  struct Forward;
  Forward run(std::span<const Matrix* const> windows, bool keep_trace) const;

  AutoencoderArch arch_;
  std::vector<nn::RecurrentCell> encoder_;
  nn::DenseLayer bottleneck_;
  nn::DenseLayer expand_;
  std::vector<nn::RecurrentCell> decoder_;
  nn::DenseLayer readout_;
};

struct AutoencoderResult {
  StackedAutoencoder model;
  std::vector<double> train_loss;      // mean minibatch loss per epoch
  std::vector<double> validation_mse;  // per epoch
  int epochs_run = 0;
  bool reached_threshold = false;
  double input_variance = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
};

AutoencoderResult train_autoencoder(const std::vector<Matrix>& windows,
                                    const AutoencoderTraining& config,
                                    AutoencoderArch arch);
AutoencoderResult train_autoencoder(
    const std::vector<data::SupervisedSample>& samples,
    const AutoencoderTraining& config, AutoencoderArch arch);

// Population variance of every entry of every window.
double window_variance(std::span<const Matrix> windows);

}  // namespace demandnet::features
