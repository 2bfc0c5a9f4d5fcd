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

#include "demandnet/predict/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "demandnet/io.hpp"
#include "demandnet/nn/checkpoint.hpp"

namespace demandnet::predict {
namespace {

constexpr double kSdFloor = 1e-6;
constexpr std::size_t kEvalChunk = 512;

Matrix bernoulli_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform() < p ? 0.0 : keep;
  }
  return m;
}

struct Sample {
  const Matrix* window;
  Vector policies;
  Vector label;
  Vector extras;
};

struct SampleSet {
  std::vector<Matrix> windows;  // owned storage, referenced by samples
  std::vector<Sample> samples;
};

ForecasterModel::Batch make_batch(const std::vector<Sample>& samples,
                                  std::span<const std::size_t> idx, Matrix* labels) {
  ForecasterModel::Batch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  const Eigen::Index h = samples[idx[0]].policies.size();
  const Eigen::Index e = samples[idx[0]].extras.size();
  b.policies.resize(h, n);
  b.extras.resize(e, n);
  if (labels) labels->resize(h, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Sample& s = samples[idx[static_cast<std::size_t>(k)]];
    b.windows.push_back(s.window);
    b.policies.col(k) = s.policies;
    b.extras.col(k) = s.extras;
    if (labels) labels->col(k) = s.label;
  }
  return b;
}

double mean_loss(const ForecasterModel& model, const std::vector<Sample>& samples) {
  double total = 0.0;
  double count = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < samples.size(); start += kEvalChunk) {
    idx.clear();
    for (std::size_t k = start; k < std::min(samples.size(), start + kEvalChunk); ++k) {
      idx.push_back(k);
    }
    Matrix labels;
    const auto batch = make_batch(samples, idx, &labels);
    const Matrix out = model.forward(batch, {});
    total += (out - labels).squaredNorm();
    count += static_cast<double>(labels.size());
  }
  return total / count;
}

void save_values(nn::ParamList& ps, std::vector<Matrix>& out) {
  out.clear();
  for (const nn::Param* p : ps) out.push_back(p->value);
}

void load_values(nn::ParamList& ps, const std::vector<Matrix>& in) {
  for (std::size_t k = 0; k < ps.size(); ++k) ps[k]->value = in[k];
}

}  // namespace

std::string demand_cell_name(DemandCellMode mode) {
  switch (mode) {
    case DemandCellMode::kAdditive:
      return "additive";
    case DemandCellMode::kMultiplicative:
      return "multiplicative";
    case DemandCellMode::kNone:
      return "none";
  }
  return "none";
}

DemandCellMode demand_cell_from_name(const std::string& name) {
  if (name == "additive") return DemandCellMode::kAdditive;
  if (name == "multiplicative") return DemandCellMode::kMultiplicative;
  if (name == "none") return DemandCellMode::kNone;
  throw InvalidArgument("unknown demand cell mode '" + name +
                        "' (expected additive, multiplicative or none)");
}

void ForecasterArch::validate() const {
  if (hidden < 1) throw InvalidArgument("forecaster hidden size must be >= 1");
  if (layers < 1) throw InvalidArgument("forecaster needs at least one recurrent layer");
  if (window < 1) throw InvalidArgument("window length must be >= 1");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (channels < 1) throw InvalidArgument("forecaster channel count must be >= 1");
}

Vector demand_cell_adjust(const Vector& base, const Vector& policies,
                          const effects::EffectModel& effect, double reference,
                          DemandCellMode mode) {
  if (base.size() != policies.size()) {
    throw DimensionMismatch("demand cell: base path length " + std::to_string(base.size()) +
                            " != policy length " + std::to_string(policies.size()));
  }
  if (mode == DemandCellMode::kNone) return base;
  Vector out = base;
  for (Eigen::Index t = 0; t < base.size(); ++t) {
    const double d = effects::policy_delta(effect, policies(t), reference);
    out(t) = mode == DemandCellMode::kAdditive ? base(t) + d : base(t) * std::exp(d);
  }
  return out;
}

ForecastDistribution summarize(Matrix samples, double p) {
  if (samples.rows() < 1) throw InvalidArgument("forecast distribution needs >= 1 sample");
  ForecastDistribution d;
  const Eigen::Index k = samples.rows();
  const Eigen::Index h = samples.cols();
  d.mean.resize(h);
  d.sd.resize(h);
  for (Eigen::Index j = 0; j < h; ++j) {
    const double x0 = samples(0, j);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) acc += samples(i, j) - x0;
    d.mean(j) = x0 + acc / static_cast<double>(k);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double e = samples(i, j) - d.mean(j);
      ss += e * e;
    }
    d.sd(j) = std::sqrt(ss / static_cast<double>(k));
  }
  d.samples = std::move(samples);
  d.p = p;
  d.kappa = static_cast<int>(k);
  return d;
}

Vector variance_vs_truth(const ForecastDistribution& dist, const Vector& truth) {
  if (truth.size() != dist.samples.cols()) {
    throw DimensionMismatch("variance_vs_truth: truth length " +
                            std::to_string(truth.size()) + " != horizon " +
                            std::to_string(dist.samples.cols()));
  }
  Vector out(truth.size());
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    out(j) = (dist.samples.col(j).array() - truth(j)).square().mean();
  }
  return out;
}

struct ForecasterModel::Forward {
  std::vector<nn::Sequence> inputs;  // per layer (masked outputs of the layer below)
  std::vector<nn::RecurrentCell::Trace> traces;
  Matrix z;  // [masked last hidden; extras]
  Matrix base;
  Matrix delta;
  Matrix out;
};

ForecasterModel::ForecasterModel(const ForecasterArch& arch, int extras, uint64_t seed)
    : arch_(arch), extras_(extras) {
  arch_.validate();
  if (extras < 0) throw InvalidArgument("extras size must be >= 0");
  Rng rng(seed, 0xf0c);
  int in = arch_.channels;
  for (int l = 0; l < arch_.layers; ++l) {
    layers_.emplace_back(arch_.cell, in, arch_.hidden, rng, "rnn" + std::to_string(l));
    in = arch_.hidden;
  }
  readout_ = nn::DenseLayer(arch_.hidden + extras, arch_.horizon, nn::Activation::kIdentity,
                            rng, "readout");
}

nn::ParamList ForecasterModel::params() {
  nn::ParamList out;
  for (auto& c : layers_) c.collect(out);
  readout_.collect(out);
  return out;
}

uint64_t ForecasterModel::parameter_hash() const {
  auto self = const_cast<ForecasterModel*>(this);
  nn::ParamList ps = self->params();
  if (self->effect) {
    for (nn::Param* p : self->effect->params()) ps.push_back(p);
  }
  if (self->autoencoder) {
    for (nn::Param* p : self->autoencoder->params()) ps.push_back(p);
  }
  return nn::parameter_hash(ps);
}

Matrix ForecasterModel::deltas(const Matrix& policies) const {
  Matrix d = Matrix::Zero(policies.rows(), policies.cols());
  if (arch_.demand_cell == DemandCellMode::kNone) return d;
  if (!effect) throw InvalidArgument("demand cell requires an effect model");
  for (Eigen::Index j = 0; j < policies.cols(); ++j) {
    for (Eigen::Index i = 0; i < policies.rows(); ++i) {
      d(i, j) = effects::policy_delta(*effect, policies(i, j), policy_reference);
    }
  }
  return d;
}

ForecasterModel::Forward ForecasterModel::run(const Batch& batch,
                                              const std::vector<Matrix>& masks,
                                              bool keep_trace) const {
  if (layers_.empty()) throw InvalidArgument("forecaster is not initialised");
  const auto n = static_cast<Eigen::Index>(batch.windows.size());
  if (n == 0) throw InvalidArgument("forecaster: empty batch");
  if (batch.policies.rows() != arch_.horizon || batch.policies.cols() != n) {
    throw DimensionMismatch("forecaster: policies must be " + std::to_string(arch_.horizon) +
                            " x batch");
  }
  if (batch.extras.rows() != extras_ || batch.extras.cols() != n) {
    throw DimensionMismatch("forecaster: extras must be " + std::to_string(extras_) +
                            " x batch, got " + std::to_string(batch.extras.rows()));
  }
  if (!masks.empty() && masks.size() != layers_.size()) {
    throw DimensionMismatch("forecaster: one dropout mask per recurrent layer");
  }
  const Eigen::Index tau = arch_.window;
  nn::Sequence seq(static_cast<std::size_t>(tau), Matrix(arch_.channels, n));
  for (Eigen::Index b = 0; b < n; ++b) {
    const Matrix& w = *batch.windows[static_cast<std::size_t>(b)];
    if (w.rows() != tau || w.cols() != arch_.channels) {
      throw DimensionMismatch("forecaster expects windows of " + std::to_string(tau) + "x" +
                              std::to_string(arch_.channels) + ", got " +
                              std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    }
    for (Eigen::Index t = 0; t < tau; ++t) {
      seq[static_cast<std::size_t>(t)].col(b) = w.row(t).transpose();
    }
  }
  Forward f;
  f.traces.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    nn::Sequence hs = layers_[l].forward(seq, layers_[l].zero_state(n),
                                         keep_trace ? &f.traces[l] : nullptr);
    const bool masked = !masks.empty() && masks[l].size() != 0;
    const bool last = l + 1 == layers_.size();
    if (masked && !last) {
      for (auto& h : hs) h.array() *= masks[l].array();
    }
    if (keep_trace) f.inputs.push_back(std::move(seq));
    seq = std::move(hs);
  }
  Matrix top = seq.back();
  if (!masks.empty() && masks.back().size() != 0) top.array() *= masks.back().array();
  f.z.resize(arch_.hidden + extras_, n);
  f.z.topRows(arch_.hidden) = top;
  if (extras_ > 0) f.z.bottomRows(extras_) = batch.extras;
  f.base = readout_.forward(f.z);
  f.delta = deltas(batch.policies);
  switch (arch_.demand_cell) {
    case DemandCellMode::kAdditive:
      f.out = f.base + f.delta;
      break;
    case DemandCellMode::kMultiplicative:
      f.out = (f.base.array() * f.delta.array().exp()).matrix();
      break;
    case DemandCellMode::kNone:
      f.out = f.base;
      break;
  }
  return f;
}

Matrix ForecasterModel::forward(const Batch& batch, const std::vector<Matrix>& masks) const {
  return run(batch, masks, false).out;
}

double ForecasterModel::loss(const Batch& batch, const Matrix& labels,
                             const std::vector<Matrix>& masks, double lambda) const {
  const Matrix out = forward(batch, masks);
  if (labels.rows() != out.rows() || labels.cols() != out.cols()) {
    throw DimensionMismatch("forecaster loss: label shape");
  }
  auto self = const_cast<ForecasterModel*>(this);
  return (out - labels).squaredNorm() / static_cast<double>(labels.size()) +
         nn::weight_penalty(self->params(), lambda);
}

double ForecasterModel::loss_and_grad(const Batch& batch, const Matrix& labels,
                                      const std::vector<Matrix>& masks, double lambda) {
  Forward f = run(batch, masks, true);
  if (labels.rows() != f.out.rows() || labels.cols() != f.out.cols()) {
    throw DimensionMismatch("forecaster loss: label shape");
  }
  const double n = static_cast<double>(labels.size());
  const Matrix diff = f.out - labels;
  Matrix dbase = (2.0 / n) * diff;
  if (arch_.demand_cell == DemandCellMode::kMultiplicative) {
    dbase.array() *= f.delta.array().exp();
  }
  const Matrix dz = readout_.backward(f.z, f.base, dbase);
  Matrix dtop = dz.topRows(arch_.hidden);
  if (!masks.empty() && masks.back().size() != 0) dtop.array() *= masks.back().array();
  nn::Sequence dhs(static_cast<std::size_t>(arch_.window));
  dhs.back() = std::move(dtop);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    dhs = layers_[l].backward(f.traces[l], dhs);
    if (l > 0 && !masks.empty() && masks[l - 1].size() != 0) {
      for (auto& d : dhs) d.array() *= masks[l - 1].array();
    }
  }
  nn::ParamList ps = params();
  nn::add_weight_penalty_grad(ps, lambda);
  return diff.squaredNorm() / n + nn::weight_penalty(ps, lambda);
}

Vector ForecasterModel::static_extras(const data::SeriesBundle& bundle) const {
  Vector out(static_cast<Eigen::Index>(static_names.size()));
  for (std::size_t j = 0; j < static_names.size(); ++j) {
    const auto it =
        std::find(bundle.static_names.begin(), bundle.static_names.end(), static_names[j]);
    if (it == bundle.static_names.end()) {
      throw SchemaError("series '" + bundle.id + "' lacks static feature '" +
                        static_names[j] + "'");
    }
    const double v =
        bundle.static_values[static_cast<std::size_t>(it - bundle.static_names.begin())];
    const auto jj = static_cast<Eigen::Index>(j);
    out(jj) = (v - static_mean(jj)) / static_sd(jj);
  }
  return out;
}

std::vector<double> ForecasterModel::dummy_policies(int64_t first_day,
                                                    std::size_t count) const {
  if (dummy_policy.empty()) throw InvalidArgument("model carries no dummy policy trajectory");
  std::vector<double> out(count);
  for (std::size_t h = 0; h < count; ++h) {
    const int64_t off = first_day + static_cast<int64_t>(h) - dummy_start_day;
    const int64_t last = static_cast<int64_t>(dummy_policy.size()) - 1;
    out[h] = dummy_policy[static_cast<std::size_t>(std::clamp<int64_t>(off, 0, last))];
  }
  return out;
}

ForecastInput ForecasterModel::make_input(const data::SeriesBundle& normalized,
                                          std::size_t origin, PolicyMode mode) const {
  const auto tau = static_cast<std::size_t>(arch_.window);
  if (origin < tau || origin > normalized.length()) {
    throw InsufficientDataError("series '" + normalized.id + "': origin " +
                                std::to_string(origin) + " needs " + std::to_string(tau) +
                                " history rows inside a series of length " +
                                std::to_string(normalized.length()));
  }
  const auto h = static_cast<std::size_t>(arch_.horizon);
  const data::SupervisedSample s = data::window_at(normalized, tau, h, origin);
  ForecastInput in;
  in.window = s.window;
  if (mode == PolicyMode::kKnown) {
    in.policies = s.future_policies;
  } else {
    const auto d = dummy_policies(normalized.start_day + static_cast<int64_t>(origin), h);
    in.policies = Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
  }
  const Vector st = static_extras(normalized);
  in.extras.resize(extras_);
  in.extras.head(st.size()) = st;
  if (autoencoder) {
    const Vector u = autoencoder->encode(in.window);
    in.extras.segment(st.size(), u.size()) = u;
  } else if (st.size() != extras_) {
    throw DimensionMismatch("forecaster extras size does not match its static features");
  }
  return in;
}

std::string ForecasterModel::save() const {
  nn::BinaryWriter out;
  out.header("forecaster");
  out.str(nn::cell_name(arch_.cell));
  out.i64(arch_.hidden);
  out.i64(arch_.layers);
  out.i64(arch_.window);
  out.i64(arch_.horizon);
  out.i64(arch_.channels);
  out.str(demand_cell_name(arch_.demand_cell));
  out.i64(extras_);
  auto self = const_cast<ForecasterModel*>(this);
  nn::write_params(out, self->params());
  out.u8(effect ? 1 : 0);
  if (effect) out.str(effect->save());
  out.u8(autoencoder ? 1 : 0);
  if (autoencoder) out.str(autoencoder->save());
  out.f64(policy_reference);
  out.u64(static_names.size());
  for (const auto& s : static_names) out.str(s);
  out.matrix(static_mean);
  out.matrix(static_sd);
  out.i64(dummy_start_day);
  out.doubles(dummy_policy);
  out.doubles(dropout_candidates);
  out.str(optimizer_state);
  out.str(rng_state);
  return out.bytes();
}

ForecasterModel ForecasterModel::load(const std::string& bytes) {
  nn::BinaryReader in(bytes);
  in.header("forecaster");
  ForecasterArch arch;
  arch.cell = nn::cell_from_name(in.str());
  arch.hidden = static_cast<int>(in.i64());
  arch.layers = static_cast<int>(in.i64());
  arch.window = static_cast<int>(in.i64());
  arch.horizon = static_cast<int>(in.i64());
  arch.channels = static_cast<int>(in.i64());
  arch.demand_cell = demand_cell_from_name(in.str());
  const int extras = static_cast<int>(in.i64());
  ForecasterModel model(arch, extras, 0);
  nn::read_params(in, model.params());
  if (in.u8() != 0) model.effect = effects::EffectModel::load(in.str());
  if (in.u8() != 0) model.autoencoder = features::StackedAutoencoder::load(in.str());
  model.policy_reference = in.f64();
  const uint64_t ns = in.u64();
  if (ns > 100000) throw ParseError("forecaster checkpoint: implausible static count");
  for (uint64_t i = 0; i < ns; ++i) model.static_names.push_back(in.str());
  model.static_mean = in.matrix();
  model.static_sd = in.matrix();
  model.dummy_start_day = in.i64();
  model.dummy_policy = in.doubles();
  model.dropout_candidates = in.doubles();
  model.optimizer_state = in.str();
  model.rng_state = in.str();
  if (!in.done()) throw ParseError("forecaster checkpoint: trailing bytes");
  return model;
}

ForecasterResult train_forecaster(const std::vector<TrainingSeries>& series,
                                  const ForecasterTraining& config, ForecasterArch arch,
                                  std::optional<effects::EffectModel> effect,
                                  std::optional<features::StackedAutoencoder> autoencoder,
                                  const std::vector<std::string>& static_names) {
  config.train.validate();
  if (series.empty()) throw InsufficientDataError("forecaster: no training series");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) {
    throw InvalidArgument("training dropout must lie in [0, 1)");
  }
  if (arch.channels == 0) {
    arch.channels = static_cast<int>(1 + series.front().bundle.covariate_count());
  }
  arch.validate();
  if (arch.demand_cell != DemandCellMode::kNone && !effect) {
    throw PrerequisiteError("forecaster with a demand cell needs a trained effect model");
  }
  const auto tau = static_cast<std::size_t>(arch.window);
  const auto horizon = static_cast<std::size_t>(arch.horizon);
  const int code = autoencoder ? autoencoder->arch().bottleneck : 0;
  if (autoencoder && (autoencoder->arch().length != arch.window ||
                      autoencoder->arch().channels != arch.channels)) {
    throw DimensionMismatch("autoencoder window shape differs from the forecaster window");
  }

  ForecasterResult result;
  ForecasterModel& model = result.model;
  model = ForecasterModel(arch, static_cast<int>(static_names.size()) + code,
                          config.train.seed);
  model.effect = std::move(effect);
  model.autoencoder = std::move(autoencoder);
  model.static_names = static_names;

  // Pooled static scaler.
  const auto ns = static_cast<Eigen::Index>(static_names.size());
  Matrix statics(static_cast<Eigen::Index>(series.size()), ns);
  for (std::size_t k = 0; k < series.size(); ++k) {
    model.static_mean = Vector::Zero(ns);
    model.static_sd = Vector::Ones(ns);
    statics.row(static_cast<Eigen::Index>(k)) = model.static_extras(series[k].bundle);
  }
  model.static_mean = statics.colwise().mean().transpose();
  model.static_sd = Vector::Ones(ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    const double sd =
        std::sqrt((statics.col(j).array() - model.static_mean(j)).square().mean());
    if (sd > 1e-12 * std::max(1.0, std::abs(model.static_mean(j)))) model.static_sd(j) = sd;
  }

  // Mean policy by calendar day over the training series.
  int64_t first = series.front().bundle.start_day;
  int64_t last = first;
  for (const auto& s : series) {
    first = std::min(first, s.bundle.start_day);
    last = std::max(last, s.bundle.start_day + static_cast<int64_t>(s.bundle.length()));
  }
  std::vector<double> sum(static_cast<std::size_t>(last - first), 0.0);
  std::vector<double> cnt(sum.size(), 0.0);
  for (const auto& s : series) {
    const auto pol = s.bundle.policy();
    for (std::size_t t = 0; t < pol.size(); ++t) {
      const auto d = static_cast<std::size_t>(s.bundle.start_day - first) + t;
      sum[d] += pol[t];
      cnt[d] += 1.0;
    }
  }
  model.dummy_start_day = first;
  model.dummy_policy.resize(sum.size());
  double carry = 0.0;
  for (std::size_t d = 0; d < sum.size(); ++d) {
    if (cnt[d] > 0.0) carry = sum[d] / cnt[d];
    model.dummy_policy[d] = carry;
  }

  // Samples.
  SampleSet train_set;
  SampleSet val_set;
  std::vector<std::size_t> train_owner;
  std::vector<std::size_t> val_owner;
  std::vector<data::SupervisedSample> train_raw;
  std::vector<data::SupervisedSample> val_raw;
  std::vector<Vector> statics_per_series;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const data::NormStats stats = data::fit_norm_stats(s.bundle, s.split.train);
    const data::SeriesBundle norm = data::normalize(s.bundle, stats);
    statics_per_series.push_back(model.static_extras(norm));
    for (auto& w : data::windows_with_labels_in(norm, tau, horizon, s.split.train)) {
      train_raw.push_back(std::move(w));
      train_owner.push_back(k);
    }
    if (s.split.validation.size() >= horizon) {
      for (auto& w : data::windows_with_labels_in(norm, tau, horizon, s.split.validation)) {
        val_raw.push_back(std::move(w));
        val_owner.push_back(k);
      }
    }
  }
  if (train_raw.empty()) {
    throw InsufficientDataError("forecaster: no training windows (need " +
                                std::to_string(tau + horizon) + " rows in a train range)");
  }
  auto assemble = [&](std::vector<data::SupervisedSample>& raw,
                      const std::vector<std::size_t>& owner, SampleSet& set) {
    set.windows.reserve(raw.size());
    for (auto& r : raw) set.windows.push_back(std::move(r.window));
    Matrix codes;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      Sample s;
      s.window = &set.windows[i];
      s.policies = raw[i].future_policies;
      s.label = raw[i].label;
      s.extras.resize(model.extras_size());
      s.extras.head(ns) = statics_per_series[owner[i]];
      set.samples.push_back(std::move(s));
    }
    if (model.autoencoder) {
      for (std::size_t start = 0; start < raw.size(); start += kEvalChunk) {
        std::vector<const Matrix*> ptrs;
        for (std::size_t i = start; i < std::min(raw.size(), start + kEvalChunk); ++i) {
          ptrs.push_back(&set.windows[i]);
        }
        codes = model.autoencoder->encode_batch(ptrs);
        for (std::size_t i = 0; i < ptrs.size(); ++i) {
          set.samples[start + i].extras.tail(code) = codes.col(static_cast<Eigen::Index>(i));
        }
      }
    }
  };
  assemble(train_raw, train_owner, train_set);
  assemble(val_raw, val_owner, val_set);
  const std::vector<Sample>& train = train_set.samples;
  const std::vector<Sample>& val = val_set.samples;

  nn::ParamList ps = model.params();
  nn::Optimizer opt(config.train.optimizer, config.train.learning_rate);
  Rng rng(config.train.seed, 0xf0c1);
  const auto batch_size = static_cast<std::size_t>(config.train.batch_size);
  const double lambda = config.train.weight_decay;
  std::vector<Matrix> best;
  save_values(ps, best);
  double best_score = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::string last_good = model.save();
  std::vector<Matrix> masks(static_cast<std::size_t>(arch.layers));
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    const auto order = nn::epoch_order(train.size(), config.train.samples_per_epoch, rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      Matrix labels;
      const auto batch = make_batch(
          train, std::span<const std::size_t>(order.data() + start, stop - start), &labels);
      const auto cols = static_cast<Eigen::Index>(stop - start);
      for (auto& m : masks) {
        m = config.dropout > 0.0 ? bernoulli_mask(arch.hidden, cols, config.dropout, rng)
                                 : Matrix();
      }
      nn::zero_grads(ps);
      const double l = model.loss_and_grad(batch, labels, masks, lambda);
      if (!std::isfinite(l)) {
        throw DivergenceError("forecaster loss became non-finite in epoch " +
                                  std::to_string(epoch + 1),
                              last_good);
      }
      try {
        opt.step(ps);
      } catch (const NumericError& e) {
        throw DivergenceError(std::string("forecaster diverged: ") + e.what(), last_good);
      }
      total += l;
      ++batches;
    }
    const double train_loss = total / static_cast<double>(batches);
    const double score = val.empty() ? train_loss : mean_loss(model, val);
    if (!std::isfinite(score)) {
      throw DivergenceError("forecaster validation loss became non-finite in epoch " +
                                std::to_string(epoch + 1),
                            last_good);
    }
    result.train_loss.push_back(train_loss);
    result.validation_loss.push_back(score);
    last_good = model.save();
    if (score < best_score) {
      best_score = score;
      result.best_epoch = epoch + 1;
      save_values(ps, best);
      since_best = 0;
    } else if (config.train.patience > 0 && ++since_best >= config.train.patience) {
      break;
    }
  }
  load_values(ps, best);
  nn::BinaryWriter state;
  opt.save(state);
  model.optimizer_state = state.bytes();
  model.rng_state = rng.state();
  return result;
}

ForecastDistribution mc_forecast(const ForecasterModel& model, const ForecastInput& input,
                                 int kappa, double p, uint64_t seed) {
  if (kappa < 1) throw InvalidArgument("kappa must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("dropout probability must lie in [0, 1)");
  const auto& arch = model.arch();
  if (input.policies.size() != arch.horizon) {
    throw DimensionMismatch("forecast input carries " + std::to_string(input.policies.size()) +
                            " policies, model horizon is " + std::to_string(arch.horizon));
  }
  // Identical passes are computed once so that their spread is exactly zero.
  const int passes = p == 0.0 ? 1 : kappa;
  ForecasterModel::Batch batch;
  batch.windows.assign(static_cast<std::size_t>(passes), &input.window);
  batch.policies = input.policies.replicate(1, passes);
  batch.extras = input.extras.replicate(1, passes);
  std::vector<Matrix> masks;
  if (p > 0.0) {
    std::vector<uint64_t> streams(static_cast<std::size_t>(passes));
    std::iota(streams.begin(), streams.end(), 0);
    for (int l = 0; l < arch.layers; ++l) {
      masks.push_back(nn::sample_dropout_columns(static_cast<std::size_t>(arch.hidden), p,
                                                 mix_seed(seed, static_cast<uint64_t>(l) + 1),
                                                 streams));
    }
  }
  const Matrix out = model.forward(batch, masks);  // horizon x passes
  Matrix samples(kappa, arch.horizon);
  for (int k = 0; k < kappa; ++k) samples.row(k) = out.col(passes == 1 ? 0 : k).transpose();
  return summarize(std::move(samples), p);
}

Vector point_forecast(const ForecasterModel& model, const ForecastInput& input) {
  return mc_forecast(model, input, 1, 0.0, 0).mean;
}

DropoutChoice optimize_dropout(const ForecasterModel& model,
                               const std::vector<ForecastInput>& inputs,
                               const std::vector<Vector>& truths,
                               std::vector<double> candidates, int kappa, uint64_t seed) {
  if (candidates.empty()) throw InvalidArgument("optimize_dropout: no candidates");
  if (inputs.empty()) throw InvalidArgument("optimize_dropout: empty validation set");
  if (inputs.size() != truths.size()) {
    throw DimensionMismatch("optimize_dropout: inputs / truths count");
  }
  for (const double p : candidates) {
    if (!(p >= 0.0 && p <= 0.9)) throw InvalidArgument("dropout candidates must lie in [0, 0.9]");
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  DropoutChoice choice;
  choice.candidates = candidates;
  if (candidates.size() == 1) {
    choice.p = candidates.front();
    choice.scores.push_back(0.0);
    return choice;
  }
  double best = std::numeric_limits<double>::infinity();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (const double p : candidates) {
    double nll = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const ForecastDistribution d =
          mc_forecast(model, inputs[i], kappa, p, mix_seed(seed, i));
      const Vector& y = truths[i];
      const Eigen::Index h = std::min<Eigen::Index>(y.size(), d.mean.size());
      for (Eigen::Index t = 0; t < h; ++t) {
        const double s = d.sd(t) + kSdFloor;
        const double e = y(t) - d.mean(t);
        nll += 0.5 * (log2pi + 2.0 * std::log(s)) + e * e / (2.0 * s * s);
        count += 1.0;
      }
    }
    const double score = count > 0.0 ? nll / count : 0.0;
    choice.scores.push_back(score);
    if (score < best) {
      best = score;
      choice.p = p;
    }
  }
  return choice;
}

UnseenForecast forecast_unseen(const ForecasterModel& model, const data::SeriesBundle& raw,
                               std::size_t history_end, std::size_t origin, PolicyMode mode,
                               int kappa, double p, uint64_t seed) {
  const auto tau = static_cast<std::size_t>(model.arch().window);
  if (raw.length() < tau) {
    throw InsufficientDataError("unseen series '" + raw.id + "' has " +
                                std::to_string(raw.length()) + " rows, window needs " +
                                std::to_string(tau));
  }
  if (history_end == 0 || history_end > raw.length()) {
    throw InvalidArgument("unseen forecast: history end outside the series");
  }
  UnseenForecast out;
  out.stats = data::fit_norm_stats(raw, data::Range{0, history_end});
  const data::SeriesBundle norm = data::normalize(raw, out.stats);
  out.distribution = mc_forecast(model, model.make_input(norm, origin, mode), kappa, p, seed);
  return out;
}

std::string forecast_csv_header() {
  return "series_id,step,mean,sd,var_vs_truth,p_used,kappa\n";
}

std::string forecast_csv_rows(const std::string& series_id, const ForecastDistribution& dist,
                              const Vector* truth) {
  Vector vt;
  if (truth) {
    if (truth->size() > dist.samples.cols()) {
      throw DimensionMismatch("forecast_csv_rows: truth longer than the horizon");
    }
    ForecastDistribution head = dist;
    head.samples = dist.samples.leftCols(truth->size());
    vt = variance_vs_truth(head, *truth);
  }
  std::string out;
  for (Eigen::Index t = 0; t < dist.mean.size(); ++t) {
    out += series_id + "," + std::to_string(t + 1) + "," + io::format_double(dist.mean(t)) +
           "," + io::format_double(dist.sd(t)) + "," +
           (t < vt.size() ? io::format_double(vt(t)) : std::string()) + "," +
           io::format_double(dist.p) + "," + std::to_string(dist.kappa) + "\n";
  }
  return out;
}

}  // namespace demandnet::predict
