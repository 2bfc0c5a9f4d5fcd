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

#include "demandnet/nn/param.hpp"

#include <cmath>
#include <cstring>

namespace demandnet::nn {

void zero_grads(std::span<Param* const> params) {
  for (Param* p : params) p->grad.setZero();
}

double weight_penalty(std::span<Param* const> params, double lambda) {
  if (lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (const Param* p : params) {
    if (p->decay) sum += p->value.squaredNorm();
  }
  return lambda * sum;
}

void add_weight_penalty_grad(std::span<Param* const> params, double lambda) {
  if (lambda == 0.0) return;
  for (Param* p : params) {
    if (p->decay) p->grad += (2.0 * lambda) * p->value;
  }
}

std::size_t parameter_count(std::span<Param* const> params) {
  std::size_t n = 0;
  for (const Param* p : params) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void init_uniform(Matrix& m, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform(-limit, limit);
    }
  }
}

uint64_t parameter_hash(std::span<Param* const> params) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Param* p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
    const std::size_t n = static_cast<std::size_t>(p->value.size()) * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace demandnet::nn
