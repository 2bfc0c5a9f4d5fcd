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

#include "demandnet/effects/effect_model.hpp"

#include <algorithm>
#include <cmath>

#include "demandnet/io.hpp"
#include "demandnet/nn/checkpoint.hpp"

namespace demandnet::effects {

double Polynomial::operator()(double x) const {
  const double s = (x - center) / spread;
  double acc = 0.0;
  for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * s + coefficients[k];
  return acc;
}

EffectModel::EffectModel(std::vector<std::string> feature_names, const EffectArch& arch,
                         uint64_t seed)
    : names_(std::move(feature_names)), arch_(arch) {
  if (names_.empty()) throw InvalidArgument("effect model needs at least one feature");
  Rng rng(seed, 0xeff);
  int in = static_cast<int>(names_.size());
  for (std::size_t l = 0; l < arch_.hidden.size(); ++l) {
    if (arch_.hidden[l] < 1) throw InvalidArgument("hidden layer width must be >= 1");
    layers_.emplace_back(in, arch_.hidden[l], arch_.hidden_activation, rng,
                         "effect" + std::to_string(l));
    in = arch_.hidden[l];
  }
  layers_.emplace_back(in, 1, nn::Activation::kIdentity, rng, "effect_out");
  const auto n = static_cast<Eigen::Index>(names_.size());
  mean_ = Vector::Zero(n);
  sd_ = Vector::Ones(n);
  min_ = Vector::Zero(n);
  max_ = Vector::Zero(n);
}

void EffectModel::set_feature_stats(const Matrix& raw_rows) {
  if (raw_rows.cols() != static_cast<Eigen::Index>(names_.size())) {
    throw DimensionMismatch("effect model feature count");
  }
  if (raw_rows.rows() == 0) throw InsufficientDataError("effect model: no rows");
  mean_ = raw_rows.colwise().mean().transpose();
  min_ = raw_rows.colwise().minCoeff().transpose();
  max_ = raw_rows.colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < raw_rows.cols(); ++j) {
    const double sd = std::sqrt((raw_rows.col(j).array() - mean_(j)).square().mean());
    sd_(j) = sd > 1e-12 * std::max(1.0, std::abs(mean_(j))) ? sd : 1.0;
  }
}

int EffectModel::feature_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

Matrix EffectModel::standardize(const Matrix& raw_rows) const {
  if (raw_rows.cols() != static_cast<Eigen::Index>(names_.size())) {
    throw DimensionMismatch("effect model expects " + std::to_string(names_.size()) +
                            " features, got " + std::to_string(raw_rows.cols()));
  }
  Matrix x = raw_rows.transpose();
  x.colwise() -= mean_;
  x.array().colwise() /= sd_.array();
  return x;
}

Vector EffectModel::predict(const Matrix& raw_rows) const {
  Matrix a = standardize(raw_rows);
  for (const auto& layer : layers_) a = layer.forward(a);
  return a.row(0).transpose();
}

double EffectModel::predict_one(const Vector& raw) const {
  return predict(raw.transpose())(0);
}

double EffectModel::loss(const Matrix& raw_rows, const Vector& target,
                         double lambda) const {
  if (target.size() != raw_rows.rows()) throw DimensionMismatch("effect loss: target length");
  const Vector pred = predict(raw_rows);
  auto self = const_cast<EffectModel*>(this);
  return (pred - target).squaredNorm() / static_cast<double>(target.size()) +
         nn::weight_penalty(self->params(), lambda);
}

double EffectModel::loss_and_grad(const Matrix& raw_rows, const Vector& target,
                                  double lambda) {
  if (target.size() != raw_rows.rows()) throw DimensionMismatch("effect loss: target length");
  std::vector<Matrix> acts;
  acts.push_back(standardize(raw_rows));
  for (const auto& layer : layers_) acts.push_back(layer.forward(acts.back()));
  const double n = static_cast<double>(target.size());
  const Matrix diff = acts.back() - target.transpose();
  Matrix d = (2.0 / n) * diff;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    d = layers_[l].backward(acts[l], acts[l + 1], d);
  }
  nn::ParamList ps = params();
  nn::add_weight_penalty_grad(ps, lambda);
  return diff.squaredNorm() / n + nn::weight_penalty(ps, lambda);
}

nn::ParamList EffectModel::params() {
  nn::ParamList out;
  for (auto& layer : layers_) layer.collect(out);
  return out;
}

std::string EffectModel::save() const {
  nn::BinaryWriter out;
  out.header("effect_model");
  out.u64(names_.size());
  for (const auto& n : names_) out.str(n);
  out.u64(arch_.hidden.size());
  for (const int h : arch_.hidden) out.i64(h);
  out.str(nn::activation_name(arch_.hidden_activation));
  out.matrix(mean_);
  out.matrix(sd_);
  out.matrix(min_);
  out.matrix(max_);
  out.str(policy_feature);
  out.u8(policy_polynomial ? 1 : 0);
  if (policy_polynomial) {
    out.doubles(policy_polynomial->coefficients);
    out.f64(policy_polynomial->center);
    out.f64(policy_polynomial->spread);
    out.f64(policy_polynomial->max_residual);
  }
  auto self = const_cast<EffectModel*>(this);
  nn::write_params(out, self->params());
  return out.bytes();
}

EffectModel EffectModel::load(const std::string& bytes) {
  nn::BinaryReader in(bytes);
  in.header("effect_model");
  const uint64_t n = in.u64();
  if (n > 100000) throw ParseError("effect checkpoint: implausible feature count");
  std::vector<std::string> names;
  for (uint64_t i = 0; i < n; ++i) names.push_back(in.str());
  EffectArch arch;
  arch.hidden.clear();
  const uint64_t layers = in.u64();
  if (layers > 64) throw ParseError("effect checkpoint: implausible layer count");
  for (uint64_t l = 0; l < layers; ++l) arch.hidden.push_back(static_cast<int>(in.i64()));
  arch.hidden_activation = nn::activation_from_name(in.str());
  EffectModel model(std::move(names), arch, 0);
  model.mean_ = in.matrix();
  model.sd_ = in.matrix();
  model.min_ = in.matrix();
  model.max_ = in.matrix();
  model.policy_feature = in.str();
  if (in.u8() != 0) {
    Polynomial poly;
    poly.coefficients = in.doubles();
    poly.center = in.f64();
    poly.spread = in.f64();
    poly.max_residual = in.f64();
    model.policy_polynomial = poly;
  }
  nn::read_params(in, model.params());
  if (!in.done()) throw ParseError("effect checkpoint: trailing bytes");
  return model;
}

EffectDataset make_effect_dataset(const std::vector<data::SeriesBundle>& bundles,
                                  const std::vector<data::Range>& ranges,
                                  const std::vector<data::NormStats>& stats,
                                  const std::vector<std::string>& static_names) {
  if (bundles.empty()) throw InsufficientDataError("effect dataset: no series");
  if (ranges.size() != bundles.size() || stats.size() != bundles.size()) {
    throw DimensionMismatch("effect dataset: ranges / stats per series");
  }
  EffectDataset ds;
  ds.names = bundles.front().covariate_names;
  for (const auto& s : static_names) ds.names.push_back(s);
  std::size_t rows = 0;
  for (std::size_t k = 0; k < bundles.size(); ++k) {
    if (bundles[k].covariate_names != bundles.front().covariate_names) {
      throw SchemaError("effect dataset: series '" + bundles[k].id +
                        "' has a different covariate set");
    }
    rows += ranges[k].size();
  }
  const auto m = static_cast<Eigen::Index>(bundles.front().covariate_count());
  ds.rows.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ds.names.size()));
  ds.target.resize(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < bundles.size(); ++k) {
    const auto& b = bundles[k];
    std::vector<double> statics;
    for (const auto& s : static_names) {
      const auto it = std::find(b.static_names.begin(), b.static_names.end(), s);
      if (it == b.static_names.end()) {
        throw SchemaError("series '" + b.id + "' lacks static feature '" + s + "'");
      }
      statics.push_back(b.static_values[static_cast<std::size_t>(it - b.static_names.begin())]);
    }
    for (std::size_t t = ranges[k].begin; t < ranges[k].end; ++t, ++r) {
      ds.rows.row(r).head(m) = b.covariates.row(static_cast<Eigen::Index>(t));
      for (std::size_t j = 0; j < statics.size(); ++j) {
        ds.rows(r, m + static_cast<Eigen::Index>(j)) = statics[j];
      }
      ds.target(r) = stats[k].normalize(0, b.target[t]);
    }
  }
  return ds;
}

EffectResult train_effect_model(const Matrix& features, const Vector& target,
                                const std::vector<std::string>& names,
                                const EffectTraining& config, const EffectArch& arch,
                                const std::string& policy_feature) {
  config.train.validate();
  if (features.rows() == 0) throw InsufficientDataError("effect model: no training rows");
  if (features.rows() != target.size()) {
    throw DimensionMismatch("effect model: feature rows != target length");
  }
  EffectResult result;
  result.model = EffectModel(names, arch, config.train.seed);
  result.model.set_feature_stats(features);
  nn::ParamList ps = result.model.params();
  const std::size_t pcount = nn::parameter_count(ps);
  if (static_cast<std::size_t>(features.rows()) < 10 * pcount) {
    result.warnings.push_back("effect model: " + std::to_string(features.rows()) +
                              " rows for " + std::to_string(pcount) +
                              " parameters (fewer than 10 rows per parameter)");
  }
  const double lambda = config.train.weight_decay;
  result.loss_history.push_back(result.model.loss(features, target, lambda));

  Rng rng(config.train.seed, 0xeff1);
  nn::Optimizer opt(config.train.optimizer, config.train.learning_rate);
  const auto batch = static_cast<std::size_t>(config.train.batch_size);
  Matrix xb;
  Vector yb;
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    const auto order = nn::epoch_order(static_cast<std::size_t>(features.rows()),
                                       config.train.samples_per_epoch, rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      xb.resize(static_cast<Eigen::Index>(stop - start), features.cols());
      yb.resize(static_cast<Eigen::Index>(stop - start));
      for (std::size_t k = start; k < stop; ++k) {
        const auto r = static_cast<Eigen::Index>(k - start);
        xb.row(r) = features.row(static_cast<Eigen::Index>(order[k]));
        yb(r) = target(static_cast<Eigen::Index>(order[k]));
      }
      nn::zero_grads(ps);
      const double l = result.model.loss_and_grad(xb, yb, lambda);
      if (!std::isfinite(l)) {
        throw NumericError("effect model loss became non-finite in epoch " +
                           std::to_string(epoch + 1) + " (batch starting at " +
                           std::to_string(start) + ", learning rate " +
                           io::format_double(config.train.learning_rate) + ")");
      }
      opt.step(ps);
    }
    const double full = result.model.loss(features, target, lambda);
    if (!std::isfinite(full)) {
      throw NumericError("effect model loss became non-finite after epoch " +
                         std::to_string(epoch + 1) + " (learning rate " +
                         io::format_double(config.train.learning_rate) + ")");
    }
    result.loss_history.push_back(full);
  }

  result.model.policy_feature = policy_feature;
  if (config.policy_degree >= 0 && result.model.feature_index(policy_feature) >= 0) {
    const MarginalCurve curve = marginal_effect(
        result.model, policy_feature, linear_grid(0.0, 1.0, config.policy_grid_points));
    result.model.policy_polynomial = fit_polynomial(curve, config.policy_degree);
  }
  return result;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1) throw InvalidArgument("grid needs at least one point");
  if (n == 1) return {lo};
  if (!(hi > lo)) throw InvalidArgument("grid upper bound must exceed lower bound");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  g.back() = hi;
  return g;
}

MarginalCurve marginal_effect(const EffectModel& model, const std::string& feature,
                              const std::vector<double>& grid) {
  const int j = model.feature_index(feature);
  if (j < 0) throw InvalidArgument("unknown feature '" + feature + "'");
  if (grid.empty()) throw InvalidArgument("marginal effect: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw InvalidArgument("marginal effect: grid must be strictly increasing");
    }
  }
  MarginalCurve curve;
  curve.feature = feature;
  curve.grid = grid;
  Matrix rows(static_cast<Eigen::Index>(grid.size()),
              static_cast<Eigen::Index>(model.input_size()));
  rows.rowwise() = model.feature_mean().transpose();
  for (std::size_t i = 0; i < grid.size(); ++i) rows(static_cast<Eigen::Index>(i), j) = grid[i];
  const Vector out = model.predict(rows);
  curve.values.assign(out.data(), out.data() + out.size());
  const double lo = model.feature_min()(j);
  const double hi = model.feature_max()(j);
  const double slack = 0.2 * (hi - lo);
  curve.extrapolated = grid.front() < lo - slack || grid.back() > hi + slack;
  return curve;
}

Polynomial fit_polynomial(const std::vector<double>& x, const std::vector<double>& y,
                          int degree) {
  if (degree < 0) throw InvalidArgument("polynomial degree must be >= 0");
  if (x.size() != y.size()) throw DimensionMismatch("polynomial fit: x / y lengths");
  if (static_cast<std::size_t>(degree) >= x.size()) {
    throw InvalidArgument("polynomial degree " + std::to_string(degree) +
                          " needs more than " + std::to_string(x.size()) + " points");
  }
  Polynomial poly;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  poly.center = 0.5 * (*lo + *hi);
  poly.spread = *hi > *lo ? 0.5 * (*hi - *lo) : 1.0;
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix v(n, degree + 1);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = (x[static_cast<std::size_t>(i)] - poly.center) / poly.spread;
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(i, k) = p;
      p *= s;
    }
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Vector c = v.colPivHouseholderQr().solve(rhs);
  poly.coefficients.assign(c.data(), c.data() + c.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    poly.max_residual = std::max(poly.max_residual, std::abs(poly(x[i]) - y[i]));
  }
  return poly;
}

Polynomial fit_polynomial(const MarginalCurve& curve, int degree) {
  return fit_polynomial(curve.grid, curve.values, degree);
}

Matrix marginal_surface(const EffectModel& model, const std::string& feature_a,
                        const std::vector<double>& grid_a, const std::string& feature_b,
                        const std::vector<double>& grid_b) {
  const int a = model.feature_index(feature_a);
  const int b = model.feature_index(feature_b);
  if (a < 0) throw InvalidArgument("unknown feature '" + feature_a + "'");
  if (b < 0) throw InvalidArgument("unknown feature '" + feature_b + "'");
  if (a == b) throw InvalidArgument("surface needs two distinct features");
  Matrix out(static_cast<Eigen::Index>(grid_a.size()), static_cast<Eigen::Index>(grid_b.size()));
  Matrix rows(static_cast<Eigen::Index>(grid_b.size()),
              static_cast<Eigen::Index>(model.input_size()));
  for (std::size_t i = 0; i < grid_a.size(); ++i) {
    rows.rowwise() = model.feature_mean().transpose();
    rows.col(a).setConstant(grid_a[i]);
    for (std::size_t k = 0; k < grid_b.size(); ++k) {
      rows(static_cast<Eigen::Index>(k), b) = grid_b[k];
    }
    out.row(static_cast<Eigen::Index>(i)) = model.predict(rows).transpose();
  }
  return out;
}

double policy_delta(const EffectModel& model, double pi, double reference) {
  if (!(pi >= 0.0 && pi <= 1.0) || !(reference >= 0.0 && reference <= 1.0)) {
    throw RangeError("policy level outside [0, 1]");
  }
  if (pi == reference) return 0.0;
  if (model.policy_polynomial) {
    const Polynomial& p = *model.policy_polynomial;
    return p(pi) - p(reference);
  }
  const int j = model.feature_index(model.policy_feature);
  if (j < 0) {
    throw InvalidArgument("effect model has no policy feature '" + model.policy_feature + "'");
  }
  Matrix rows(2, static_cast<Eigen::Index>(model.input_size()));
  rows.rowwise() = model.feature_mean().transpose();
  rows(0, j) = pi;
  rows(1, j) = reference;
  const Vector out = model.predict(rows);
  return out(0) - out(1);
}

std::string curve_csv(const MarginalCurve& curve) {
  std::string out = "feature_value,predicted_target\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out += io::format_double(curve.grid[i]) + "," + io::format_double(curve.values[i]) + "\n";
  }
  return out;
}

std::string polynomial_csv(const Polynomial& poly) {
  std::string out = "term,value\n";
  for (std::size_t k = 0; k < poly.coefficients.size(); ++k) {
    out += "c" + std::to_string(k) + "," + io::format_double(poly.coefficients[k]) + "\n";
  }
  out += "center," + io::format_double(poly.center) + "\n";
  out += "spread," + io::format_double(poly.spread) + "\n";
  out += "max_residual," + io::format_double(poly.max_residual) + "\n";
  return out;
}

}  // namespace demandnet::effects
