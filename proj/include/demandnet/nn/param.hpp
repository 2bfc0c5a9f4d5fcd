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

#pragma once

#include <span>
#include <string>
#include <vector>

#include "demandnet/common.hpp"

namespace demandnet::nn {

// A trainable tensor and its accumulated gradient. `decay` marks weights that
// enter the L2 penalty; biases carry decay = false.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool decay = true;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols, bool d)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        decay(d) {}
};

using ParamList = std::vector<Param*>;

void zero_grads(std::span<Param* const> params);

// lambda * sum of squared decayed weights.
double weight_penalty(std::span<Param* const> params, double lambda);

// Adds d/dw of weight_penalty to every decayed gradient.
void add_weight_penalty_grad(std::span<Param* const> params, double lambda);

std::size_t parameter_count(std::span<Param* const> params);

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void init_uniform(Matrix& m, int fan_in, int fan_out, Rng& rng);

// FNV-1a over the raw bytes of every parameter value.
uint64_t parameter_hash(std::span<Param* const> params);

}  // namespace demandnet::nn
