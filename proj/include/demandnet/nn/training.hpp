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

// Losses, optimizers, dropout masks and the finite-difference gradient check.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/nn/param.hpp"

namespace demandnet::nn {

class BinaryWriter;
class BinaryReader;

enum class OptimizerKind { kSgd, kAdam };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);

// Defaults are the published hyperparameters (batch 128, learning rate 1e-5,
// weight decay 1e-6, 100 epochs, plain gradient descent).
struct TrainConfig {
  double learning_rate = 1e-5;
  double weight_decay = 1e-6;
  int batch_size = 128;
  int epochs = 100;
  uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  // Random subset of training samples visited per epoch; 0 visits all.
  int samples_per_epoch = 0;
  // Stop after this many epochs without validation improvement; 0 disables.
  int patience = 0;

  void validate() const;
};

// Shuffled visiting order for one epoch; truncated to samples_per_epoch when
// that is positive and smaller than n.
std::vector<std::size_t> epoch_order(std::size_t n, int samples_per_epoch, Rng& rng);

// (1/n) sum (truth - pred)^2 + lambda * sum w^2.
double penalized_loss(std::span<const double> pred, std::span<const double> truth,
                      std::span<const double> weights, double lambda);
double penalized_loss(std::span<const double> pred, std::span<const double> truth,
                      std::span<Param* const> params, double lambda);

// w <- w - eta * grad for every parameter. Throws NumericError naming the
// first parameter with a non-finite gradient, before touching any value.
void sgd_step(std::span<Param* const> params, double eta);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, AdamSettings adam = {});

  void step(std::span<Param* const> params);

  OptimizerKind kind() const { return kind_; }
  int64_t step_count() const { return steps_; }

  void save(BinaryWriter& out) const;
  void load(BinaryReader& in);

 private:
  OptimizerKind kind_;
  double learning_rate_;
  AdamSettings adam_;
  int64_t steps_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// Inverted-dropout mask: entries are 0 or 1/(1-p). p = 0 gives exact ones.
struct DropoutMask {
  Vector scale;
  double p = 0.0;

  Vector apply(const Vector& x) const;
};

DropoutMask sample_dropout_mask(std::size_t size, double p, Rng& rng);

// Column-batch mask; column k is drawn from its own stream Rng(seed, streams[k]).
Matrix sample_dropout_columns(std::size_t size, double p, uint64_t seed,
                              std::span<const uint64_t> streams);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst_entry;
};

// Compares analytic gradients (filled by `compute_grads`, which must zero and
// accumulate grads) with central differences (f(w+e) - f(w-e)) / 2e over a
// random subset of at most `max_entries_per_param` entries per parameter.
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(std::span<Param* const> params,
                           const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           double epsilon, std::size_t max_entries_per_param,
                           uint64_t seed);

}  // namespace demandnet::nn
