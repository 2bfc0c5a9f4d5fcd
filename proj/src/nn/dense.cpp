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

#include "demandnet/nn/dense.hpp"

#include <cmath>

namespace demandnet::nn {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidArgument("unknown activation '" + name + "'");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix activate(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kIdentity:
      return z;
  }
  return z;
}

Matrix activation_grad_from_output(Activation a, const Matrix& y) {
  switch (a) {
    case Activation::kSigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
    case Activation::kTanh:
      return (1.0 - y.array().square()).matrix();
    case Activation::kIdentity:
      return Matrix::Ones(y.rows(), y.cols());
  }
  return Matrix::Ones(y.rows(), y.cols());
}

DenseLayer::DenseLayer(int in, int out, Activation act, Rng& rng,
                       const std::string& name)
    : weight_(name + ".w", out, in, true),
      bias_(name + ".b", out, 1, false),
      act_(act) {
  init_uniform(weight_.value, in, out, rng);
}

Matrix DenseLayer::forward(const Matrix& x) const {
  if (x.rows() != weight_.value.cols()) {
    throw DimensionMismatch("dense layer '" + weight_.name + "' expects " +
                            std::to_string(weight_.value.cols()) +
                            " inputs, got " + std::to_string(x.rows()));
  }
  Matrix z = weight_.value * x;
  z.colwise() += bias_.value.col(0);
  return activate(act_, z);
}

Vector DenseLayer::forward(const Vector& x) const {
  return forward(Matrix(x)).col(0);
}

Matrix DenseLayer::backward(const Matrix& x, const Matrix& y, const Matrix& dy) {
  Matrix dz = dy;
  if (act_ != Activation::kIdentity) {
    dz.array() *= activation_grad_from_output(act_, y).array();
  }
  weight_.grad.noalias() += dz * x.transpose();
  bias_.grad.col(0) += dz.rowwise().sum();
  return weight_.value.transpose() * dz;
}

}  // namespace demandnet::nn
