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

#include "demandnet/nn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "demandnet/nn/checkpoint.hpp"

namespace demandnet::nn {
namespace {

void check_finite_grads(std::span<Param* const> params) {
  for (const Param* p : params) {
    if (!p->grad.allFinite()) {
      Eigen::Index bad = 0;
      for (Eigen::Index i = 0; i < p->grad.size(); ++i) {
        if (!std::isfinite(p->grad.data()[i])) {
          bad = i;
          break;
        }
      }
      throw NumericError("non-finite gradient in '" + p->name + "' at flat index " +
                         std::to_string(bad) + " (value " +
                         std::to_string(p->grad.data()[bad]) + ")");
    }
  }
}

}  // namespace

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw InvalidArgument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (samples_per_epoch < 0) throw InvalidArgument("samples_per_epoch must be >= 0");
  if (patience < 0) throw InvalidArgument("patience must be >= 0");
}

std::vector<std::size_t> epoch_order(std::size_t n, int samples_per_epoch, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  if (samples_per_epoch > 0 && static_cast<std::size_t>(samples_per_epoch) < n) {
    order.resize(static_cast<std::size_t>(samples_per_epoch));
  }
  return order;
}

double penalized_loss(std::span<const double> pred, std::span<const double> truth,
                      std::span<const double> weights, double lambda) {
  if (pred.size() != truth.size()) {
    throw DimensionMismatch("loss: prediction length " + std::to_string(pred.size()) +
                            " != truth length " + std::to_string(truth.size()));
  }
  if (pred.empty()) throw InvalidArgument("loss: empty input");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = truth[i] - pred[i];
    sse += d * d;
  }
  double penalty = 0.0;
  for (const double w : weights) penalty += w * w;
  return sse / static_cast<double>(pred.size()) + lambda * penalty;
}

double penalized_loss(std::span<const double> pred, std::span<const double> truth,
                      std::span<Param* const> params, double lambda) {
  return penalized_loss(pred, truth, std::span<const double>{}, 0.0) +
         weight_penalty(params, lambda);
}

void sgd_step(std::span<Param* const> params, double eta) {
  check_finite_grads(params);
  for (Param* p : params) p->value -= eta * p->grad;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, AdamSettings adam)
    : kind_(kind), learning_rate_(learning_rate), adam_(adam) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
}

void Optimizer::step(std::span<Param* const> params) {
  if (kind_ == OptimizerKind::kSgd) {
    sgd_step(params, learning_rate_);
    ++steps_;
    return;
  }
  check_finite_grads(params);
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const Param* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(adam_.beta1, t);
  const double c2 = 1.0 - std::pow(adam_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param* p = params[k];
    m_[k] = adam_.beta1 * m_[k] + (1.0 - adam_.beta1) * p->grad;
    v_[k] = adam_.beta2 * v_[k] + (1.0 - adam_.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= learning_rate_ * (m_[k].array() / c1) /
                        ((v_[k].array() / c2).sqrt() + adam_.epsilon);
  }
}

void Optimizer::save(BinaryWriter& out) const {
  out.u8(kind_ == OptimizerKind::kSgd ? 0 : 1);
  out.f64(learning_rate_);
  out.f64(adam_.beta1);
  out.f64(adam_.beta2);
  out.f64(adam_.epsilon);
  out.i64(steps_);
  out.u64(m_.size());
  for (std::size_t k = 0; k < m_.size(); ++k) {
    out.matrix(m_[k]);
    out.matrix(v_[k]);
  }
}

void Optimizer::load(BinaryReader& in) {
  kind_ = in.u8() == 0 ? OptimizerKind::kSgd : OptimizerKind::kAdam;
  learning_rate_ = in.f64();
  adam_.beta1 = in.f64();
  adam_.beta2 = in.f64();
  adam_.epsilon = in.f64();
  steps_ = in.i64();
  const uint64_t n = in.u64();
  m_.clear();
  v_.clear();
  for (uint64_t k = 0; k < n; ++k) {
    m_.push_back(in.matrix());
    v_.push_back(in.matrix());
  }
}

Vector DropoutMask::apply(const Vector& x) const {
  if (x.size() != scale.size()) throw DimensionMismatch("dropout mask size");
  return (x.array() * scale.array()).matrix();
}

DropoutMask sample_dropout_mask(std::size_t size, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw InvalidArgument("dropout probability must lie in [0, 1)");
  }
  DropoutMask mask;
  mask.p = p;
  mask.scale = Vector::Ones(static_cast<Eigen::Index>(size));
  if (p == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.scale.size(); ++i) {
    mask.scale(i) = rng.uniform() < p ? 0.0 : keep_scale;
  }
  return mask;
}

Matrix sample_dropout_columns(std::size_t size, double p, uint64_t seed,
                              std::span<const uint64_t> streams) {
  Matrix out(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(streams.size()));
  for (std::size_t k = 0; k < streams.size(); ++k) {
    Rng rng(seed, streams[k]);
    out.col(static_cast<Eigen::Index>(k)) = sample_dropout_mask(size, p, rng).scale;
  }
  return out;
}

GradCheckResult grad_check(std::span<Param* const> params,
                           const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           double epsilon, std::size_t max_entries_per_param,
                           uint64_t seed) {
  compute_grads();
  std::vector<Matrix> analytic;
  for (const Param* p : params) analytic.push_back(p->grad);

  Rng rng(seed, 0);
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param* p = params[k];
    const auto n = static_cast<std::size_t>(p->value.size());
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n > max_entries_per_param) {
      std::shuffle(idx.begin(), idx.end(), rng.engine());
      idx.resize(max_entries_per_param);
    }
    for (const std::size_t i : idx) {
      double& w = p->value.data()[i];
      const double saved = w;
      w = saved + epsilon;
      const double plus = loss();
      w = saved - epsilon;
      const double minus = loss();
      w = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = analytic[k].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      ++result.entries_checked;
      if (rel > result.max_relative_error || result.worst_entry.empty()) {
        if (rel >= result.max_relative_error) {
          result.max_relative_error = rel;
          result.worst_entry = p->name + "[" + std::to_string(i) + "]";
        }
      }
    }
  }
  return result;
}

}  // namespace demandnet::nn
