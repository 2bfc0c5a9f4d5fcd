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

#include <string>

#include "demandnet/common.hpp"
#include "demandnet/nn/param.hpp"

namespace demandnet::nn {

enum class Activation { kSigmoid, kTanh, kIdentity };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

double sigmoid(double x);

// Elementwise activation.
Matrix activate(Activation a, const Matrix& z);
// Derivative expressed through the activation output y = a(z).
Matrix activation_grad_from_output(Activation a, const Matrix& y);

// y = act(W x + b). Inputs and outputs are column batches (features x batch).
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(int in, int out, Activation act, Rng& rng, const std::string& name);

  int in_size() const { return static_cast<int>(weight_.value.cols()); }
  int out_size() const { return static_cast<int>(weight_.value.rows()); }
  Activation activation() const { return act_; }

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }
  const Param& weight() const { return weight_; }
  const Param& bias() const { return bias_; }

  Matrix forward(const Matrix& x) const;
  Vector forward(const Vector& x) const;

  // Accumulates parameter gradients given the layer input, its output and the
  // gradient wrt the output; returns the gradient wrt the input.
  Matrix backward(const Matrix& x, const Matrix& y, const Matrix& dy);

  void collect(ParamList& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  Param weight_;
  Param bias_;
  Activation act_ = Activation::kIdentity;
};

}  // namespace demandnet::nn
