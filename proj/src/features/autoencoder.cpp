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

#include "demandnet/features/autoencoder.hpp"

#include <algorithm>
#include <cmath>

#include "demandnet/nn/checkpoint.hpp"

namespace demandnet::features {

void AutoencoderArch::validate() const {
  if (encoder_widths.empty()) {
    throw InvalidArgument("autoencoder needs at least one recurrent layer");
  }
  for (const int w : encoder_widths) {
    if (w < 1) throw InvalidArgument("autoencoder layer width must be >= 1");
  }
  if (bottleneck < 1) throw InvalidArgument("bottleneck size must be >= 1");
  const int narrowest = *std::min_element(encoder_widths.begin(), encoder_widths.end());
  if (bottleneck >= narrowest) {
    throw InvalidArgument("bottleneck size " + std::to_string(bottleneck) +
                          " must be smaller than every recurrent width (min " +
                          std::to_string(narrowest) + ")");
  }
  if (channels < 1) throw InvalidArgument("autoencoder channel count must be >= 1");
  if (length < 1) throw InvalidArgument("autoencoder window length must be >= 1");
}

struct StackedAutoencoder::Forward {
  std::vector<nn::Sequence> enc_inputs;  // per layer
  std::vector<nn::RecurrentCell::Trace> enc_traces;
  Matrix last;  // final encoder hidden state
  Matrix u;
  Matrix seed;  // expanded initial hidden state of decoder layer 0
  std::vector<nn::RecurrentCell::Trace> dec_traces;
  Matrix top;     // decoder top outputs, width x (length * batch), step-major
  Matrix output;  // channels x (length * batch)
  Matrix target;  // same layout as output
};

StackedAutoencoder::StackedAutoencoder(const AutoencoderArch& arch, uint64_t seed)
    : arch_(arch) {
  arch_.validate();
  Rng rng(seed, 0x5ae);
  int in = arch_.channels;
  for (std::size_t l = 0; l < arch_.encoder_widths.size(); ++l) {
    encoder_.emplace_back(arch_.cell, in, arch_.encoder_widths[l], rng,
                          "enc" + std::to_string(l));
    in = arch_.encoder_widths[l];
  }
  bottleneck_ = nn::DenseLayer(in, arch_.bottleneck, nn::Activation::kIdentity, rng,
                               "bottleneck");
  std::vector<int> dec(arch_.encoder_widths.rbegin(), arch_.encoder_widths.rend());
  expand_ = nn::DenseLayer(arch_.bottleneck, dec.front(), nn::Activation::kTanh, rng,
                           "expand");
  in = 0;
  for (std::size_t l = 0; l < dec.size(); ++l) {
    decoder_.emplace_back(arch_.cell, in, dec[l], rng, "dec" + std::to_string(l));
    in = dec[l];
  }
  readout_ = nn::DenseLayer(in, arch_.channels, nn::Activation::kIdentity, rng,
                            "readout");
}

nn::ParamList StackedAutoencoder::params() {
  nn::ParamList out;
  for (auto& c : encoder_) c.collect(out);
  bottleneck_.collect(out);
  expand_.collect(out);
  for (auto& c : decoder_) c.collect(out);
  readout_.collect(out);
  return out;
}

StackedAutoencoder::Forward StackedAutoencoder::run(
    std::span<const Matrix* const> windows, bool keep_trace) const {
  if (encoder_.empty()) throw InvalidArgument("autoencoder is not initialised");
  const auto batch = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index tau = arch_.length;
  const Eigen::Index ch = arch_.channels;
  Forward f;
  nn::Sequence xs(static_cast<std::size_t>(tau), Matrix(ch, batch));
  f.target.resize(ch, tau * batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Matrix& w = *windows[static_cast<std::size_t>(b)];
    if (w.rows() != tau || w.cols() != ch) {
      throw DimensionMismatch("autoencoder expects windows of " + std::to_string(tau) +
                              "x" + std::to_string(ch) + ", got " +
                              std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    }
    for (Eigen::Index t = 0; t < tau; ++t) {
      xs[static_cast<std::size_t>(t)].col(b) = w.row(t).transpose();
      f.target.col(t * batch + b) = w.row(t).transpose();
    }
  }

  f.enc_traces.resize(encoder_.size());
  nn::Sequence seq = std::move(xs);
  for (std::size_t l = 0; l < encoder_.size(); ++l) {
    nn::Sequence next = encoder_[l].forward(seq, encoder_[l].zero_state(batch),
                                            keep_trace ? &f.enc_traces[l] : nullptr);
    if (keep_trace) f.enc_inputs.push_back(std::move(seq));
    seq = std::move(next);
  }
  f.last = seq.back();
  f.u = bottleneck_.forward(f.last);
  f.seed = expand_.forward(f.u);

  f.dec_traces.resize(decoder_.size());
  seq.assign(static_cast<std::size_t>(tau), Matrix(0, batch));
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    nn::CellState init = decoder_[l].zero_state(batch);
    if (l == 0) init.h = f.seed;
    seq = decoder_[l].forward(seq, init, keep_trace ? &f.dec_traces[l] : nullptr);
  }
  f.top.resize(decoder_.back().hidden_size(), tau * batch);
  for (Eigen::Index t = 0; t < tau; ++t) {
    f.top.middleCols(t * batch, batch) = seq[static_cast<std::size_t>(t)];
  }
  f.output = readout_.forward(f.top);
  return f;
}

Vector StackedAutoencoder::encode(const Matrix& window) const {
  const Matrix* ptr = &window;
  return run(std::span<const Matrix* const>(&ptr, 1), false).u.col(0);
}

Matrix StackedAutoencoder::encode_batch(std::span<const Matrix* const> windows) const {
  if (windows.empty()) return Matrix(arch_.bottleneck, 0);
  return run(windows, false).u;
}

Matrix StackedAutoencoder::decode(const Vector& u) const {
  if (u.size() != arch_.bottleneck) {
    throw DimensionMismatch("decode expects a code of size " +
                            std::to_string(arch_.bottleneck));
  }
  nn::CellState init = decoder_.front().zero_state(1);
  init.h = expand_.forward(Matrix(u));
  nn::Sequence seq(static_cast<std::size_t>(arch_.length), Matrix(0, 1));
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    if (l > 0) init = decoder_[l].zero_state(1);
    seq = decoder_[l].forward(seq, init);
  }
  Matrix out(arch_.length, arch_.channels);
  for (int t = 0; t < arch_.length; ++t) {
    out.row(t) = readout_.forward(seq[static_cast<std::size_t>(t)]).col(0).transpose();
  }
  return out;
}

Matrix StackedAutoencoder::reconstruct(const Matrix& window) const {
  return decode(encode(window));
}

double StackedAutoencoder::reconstruction_mse(std::span<const Matrix> windows) const {
  if (windows.empty()) throw InvalidArgument("reconstruction_mse: no windows");
  std::vector<const Matrix*> ptrs;
  for (const Matrix& w : windows) ptrs.push_back(&w);
  return loss(ptrs, 0.0);
}

double StackedAutoencoder::loss(std::span<const Matrix* const> windows,
                                double lambda) const {
  const Forward f = run(windows, false);
  const double mse = (f.output - f.target).squaredNorm() /
                     static_cast<double>(f.output.size());
  auto self = const_cast<StackedAutoencoder*>(this);
  return mse + nn::weight_penalty(self->params(), lambda);
}

double StackedAutoencoder::loss_and_grad(std::span<const Matrix* const> windows,
                                         double lambda) {
  Forward f = run(windows, true);
  const auto batch = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index tau = arch_.length;
  const Matrix diff = f.output - f.target;
  const double n = static_cast<double>(diff.size());
  const double mse = diff.squaredNorm() / n;

  const Matrix d_top = readout_.backward(f.top, f.output, (2.0 / n) * diff);
  nn::Sequence dhs(static_cast<std::size_t>(tau));
  for (Eigen::Index t = 0; t < tau; ++t) {
    dhs[static_cast<std::size_t>(t)] = d_top.middleCols(t * batch, batch);
  }
  nn::CellState d_init;
  for (std::size_t l = decoder_.size(); l-- > 0;) {
    dhs = decoder_[l].backward(f.dec_traces[l], dhs, l == 0 ? &d_init : nullptr);
  }
  const Matrix du = expand_.backward(f.u, f.seed, d_init.h);
  const Matrix d_last = bottleneck_.backward(f.last, f.u, du);

  dhs.assign(static_cast<std::size_t>(tau), Matrix());
  dhs.back() = d_last;
  for (std::size_t l = encoder_.size(); l-- > 0;) {
    dhs = encoder_[l].backward(f.enc_traces[l], dhs);
  }

  nn::ParamList ps = params();
  nn::add_weight_penalty_grad(ps, lambda);
  return mse + nn::weight_penalty(ps, lambda);
}

std::string StackedAutoencoder::save() const {
  nn::BinaryWriter out;
  out.header("autoencoder");
  out.str(nn::cell_name(arch_.cell));
  out.u64(arch_.encoder_widths.size());
  for (const int w : arch_.encoder_widths) out.i64(w);
  out.i64(arch_.bottleneck);
  out.i64(arch_.channels);
  out.i64(arch_.length);
  auto self = const_cast<StackedAutoencoder*>(this);
  nn::write_params(out, self->params());
  return out.bytes();
}

StackedAutoencoder StackedAutoencoder::load(const std::string& bytes) {
  nn::BinaryReader in(bytes);
  in.header("autoencoder");
  AutoencoderArch arch;
  arch.cell = nn::cell_from_name(in.str());
  const uint64_t layers = in.u64();
  if (layers > 64) throw ParseError("autoencoder checkpoint: implausible layer count");
  arch.encoder_widths.clear();
  for (uint64_t l = 0; l < layers; ++l) {
    arch.encoder_widths.push_back(static_cast<int>(in.i64()));
  }
  arch.bottleneck = static_cast<int>(in.i64());
  arch.channels = static_cast<int>(in.i64());
  arch.length = static_cast<int>(in.i64());
  StackedAutoencoder model(arch, 0);
  nn::read_params(in, model.params());
  if (!in.done()) throw ParseError("autoencoder checkpoint: trailing bytes");
  return model;
}

double window_variance(std::span<const Matrix> windows) {
  double sum = 0.0;
  double count = 0.0;
  for (const Matrix& w : windows) {
    sum += w.sum();
    count += static_cast<double>(w.size());
  }
  if (count == 0.0) throw InvalidArgument("window_variance: no entries");
  const double mean = sum / count;
  double ss = 0.0;
  for (const Matrix& w : windows) ss += (w.array() - mean).square().sum();
  return ss / count;
}

AutoencoderResult train_autoencoder(const std::vector<Matrix>& all_windows,
                                    const AutoencoderTraining& config,
                                    AutoencoderArch arch) {
  config.train.validate();
  if (all_windows.empty()) throw InsufficientDataError("autoencoder: no windows");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0)) {
    throw InvalidArgument("autoencoder validation fraction must lie in (0, 1)");
  }
  if (arch.channels == 0) arch.channels = static_cast<int>(all_windows.front().cols());
  if (arch.length == 0) arch.length = static_cast<int>(all_windows.front().rows());
  arch.validate();

  Rng rng(config.train.seed, 0xae01);
  std::vector<std::size_t> pick(all_windows.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  std::shuffle(pick.begin(), pick.end(), rng.engine());
  if (config.max_windows > 0 && static_cast<std::size_t>(config.max_windows) < pick.size()) {
    pick.resize(static_cast<std::size_t>(config.max_windows));
  }
  if (pick.size() < 2) throw InsufficientDataError("autoencoder: need at least 2 windows");
  auto n_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(pick.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, pick.size() - 1);
  std::vector<Matrix> validation;
  std::vector<const Matrix*> train;
  for (std::size_t i = 0; i < pick.size(); ++i) {
    if (i < n_val) {
      validation.push_back(all_windows[pick[i]]);
    } else {
      train.push_back(&all_windows[pick[i]]);
    }
  }

  AutoencoderResult result;
  result.model = StackedAutoencoder(arch, config.train.seed);
  result.input_variance = window_variance(validation);
  if (std::isfinite(config.threshold_fraction)) {
    result.threshold = config.threshold_fraction * result.input_variance;
  }

  nn::ParamList ps = result.model.params();
  nn::Optimizer opt(config.train.optimizer, config.train.learning_rate);
  std::string last_good = result.model.save();
  const auto batch = static_cast<std::size_t>(config.train.batch_size);
  std::vector<const Matrix*> mb;
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    const auto order = nn::epoch_order(train.size(), config.train.samples_per_epoch, rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      mb.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) {
        mb.push_back(train[order[k]]);
      }
      nn::zero_grads(ps);
      const double l = result.model.loss_and_grad(mb, config.train.weight_decay);
      if (!std::isfinite(l)) {
        throw DivergenceError("autoencoder loss became non-finite in epoch " +
                                  std::to_string(epoch + 1),
                              last_good);
      }
      try {
        opt.step(ps);
      } catch (const NumericError& e) {
        throw DivergenceError(std::string("autoencoder diverged: ") + e.what(), last_good);
      }
      total += l;
      ++batches;
    }
    const double val = result.model.reconstruction_mse(validation);
    if (!std::isfinite(val)) {
      throw DivergenceError("autoencoder validation error became non-finite in epoch " +
                                std::to_string(epoch + 1),
                            last_good);
    }
    last_good = result.model.save();
    result.train_loss.push_back(total / static_cast<double>(batches));
    result.validation_mse.push_back(val);
    result.epochs_run = epoch + 1;
    if (std::isfinite(result.threshold) && val < result.threshold) {
      result.reached_threshold = true;
      break;
    }
  }
  return result;
}

AutoencoderResult train_autoencoder(const std::vector<data::SupervisedSample>& samples,
                                    const AutoencoderTraining& config,
                                    AutoencoderArch arch) {
  std::vector<Matrix> windows;
  windows.reserve(samples.size());
  for (const auto& s : samples) windows.push_back(s.window);
  return train_autoencoder(windows, config, std::move(arch));
}

}  // namespace demandnet::features
