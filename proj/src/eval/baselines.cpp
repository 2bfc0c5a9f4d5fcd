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

#include "demandnet/eval/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace demandnet::eval {
namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw DimensionMismatch("metric: prediction length " + std::to_string(pred.size()) +
                            " != truth length " + std::to_string(truth.size()));
  }
  if (pred.empty()) throw InvalidArgument("metric: empty input");
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(truth[i] - pred[i]);
  return s / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = truth[i] - pred[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double pred_sd(std::span<const double> samples) {
  if (samples.empty()) throw InvalidArgument("pred_sd: no samples");
  double mean = 0.0;
  for (const double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (const double v : samples) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(samples.size()));
}

std::string smoothing_name(SmoothingMode mode) {
  return mode == SmoothingMode::kSimple ? "simple" : "holt";
}

std::vector<double> exp_smoothing_forecast(std::span<const double> series, double alpha,
                                           int horizon, SmoothingMode mode, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (mode == SmoothingMode::kHolt && !(beta > 0.0 && beta <= 1.0)) {
    throw InvalidArgument("beta must lie in (0, 1]");
  }
  if (series.size() < 2) throw InsufficientDataError("exponential smoothing needs >= 2 points");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  double level = series[0];
  double trend = mode == SmoothingMode::kHolt ? series[1] - series[0] : 0.0;
  for (std::size_t t = 1; t < series.size(); ++t) {
    if (mode == SmoothingMode::kSimple) {
      level = alpha * series[t] + (1.0 - alpha) * level;
    } else {
      const double prev = level;
      level = alpha * series[t] + (1.0 - alpha) * (level + trend);
      trend = beta * (level - prev) + (1.0 - beta) * trend;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    out[static_cast<std::size_t>(h)] = level + static_cast<double>(h + 1) * trend;
  }
  return out;
}

SmoothingFit tune_exp_smoothing(std::span<const double> series, std::size_t validation_begin,
                                std::size_t validation_end, int horizon) {
  if (validation_end > series.size() || validation_begin < 2 ||
      validation_end <= validation_begin) {
    throw InvalidArgument("exponential smoothing tuning: bad validation range");
  }
  const auto h = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(horizon), validation_end - validation_begin));
  const std::vector<double> alphas = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<double> betas = {0.02, 0.05, 0.1, 0.2, 0.3};
  SmoothingFit best;
  best.validation_mae = std::numeric_limits<double>::infinity();
  auto score = [&](SmoothingMode mode, double alpha, double beta) {
    // Levels are updated incrementally along the series.
    double level = series[0];
    double trend = mode == SmoothingMode::kHolt ? series[1] - series[0] : 0.0;
    double total = 0.0;
    double count = 0.0;
    for (std::size_t t = 1; t + h <= validation_end; ++t) {
      if (t >= validation_begin) {
        for (std::size_t k = 0; k < h; ++k) {
          const double f = level + static_cast<double>(k + 1) * trend;
          total += std::abs(series[t + k] - f);
          count += 1.0;
        }
      }
      if (mode == SmoothingMode::kSimple) {
        level = alpha * series[t] + (1.0 - alpha) * level;
      } else {
        const double prev = level;
        level = alpha * series[t] + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev) + (1.0 - beta) * trend;
      }
    }
    return total / count;
  };
  for (const double a : alphas) {
    const double s = score(SmoothingMode::kSimple, a, 0.0);
    if (s < best.validation_mae) best = {SmoothingMode::kSimple, a, 0.0, s};
  }
  for (const double a : alphas) {
    for (const double b : betas) {
      const double s = score(SmoothingMode::kHolt, a, b);
      if (s < best.validation_mae) best = {SmoothingMode::kHolt, a, b, s};
    }
  }
  return best;
}

ArModel fit_ar(std::span<const double> series, int order, bool difference) {
  if (order < 1) throw InvalidArgument("AR order must be >= 1");
  std::vector<double> y(series.begin(), series.end());
  if (difference) {
    if (y.size() < 2) throw InsufficientDataError("AR: series too short to difference");
    for (std::size_t t = y.size() - 1; t > 0; --t) y[t] -= y[t - 1];
    y.erase(y.begin());
  }
  const auto p = static_cast<std::size_t>(order);
  if (y.size() < 2 * p + 1) {
    throw InsufficientDataError("AR(" + std::to_string(order) + ") needs at least " +
                                std::to_string(2 * p + 1 + (difference ? 1 : 0)) + " points");
  }
  const auto rows = static_cast<Eigen::Index>(y.size() - p);
  Matrix x(rows, order);
  Vector target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = p + static_cast<std::size_t>(r);
    target(r) = y[t];
    for (int i = 0; i < order; ++i) x(r, i) = y[t - 1 - static_cast<std::size_t>(i)];
  }
  const double magnitude = std::max(1.0, x.cwiseAbs().maxCoeff());
  const Vector x_mean = x.colwise().mean().transpose();
  const double y_mean = target.mean();
  x.rowwise() -= x_mean.transpose();
  target.array() -= y_mean;

  ArModel model;
  model.order = order;
  model.differenced = difference;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  Vector phi;
  if (x.cwiseAbs().maxCoeff() <= 1e-9 * magnitude || qr.rank() < order) {
    model.ridge = true;
    const Matrix gram = x.transpose() * x + 1e-6 * Matrix::Identity(order, order);
    phi = gram.ldlt().solve(x.transpose() * target);
  } else {
    phi = qr.solve(target);
  }
  model.coefficients.assign(phi.data(), phi.data() + phi.size());
  model.intercept = y_mean - x_mean.dot(phi);
  return model;
}

std::vector<double> ar_predict(const ArModel& model, std::span<const double> history,
                               int horizon) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  const auto p = static_cast<std::size_t>(model.order);
  std::vector<double> y(history.begin(), history.end());
  if (model.differenced) {
    if (y.size() < p + 1) throw InsufficientDataError("AR: history shorter than order");
    for (std::size_t t = y.size() - 1; t > 0; --t) y[t] -= y[t - 1];
    y.erase(y.begin());
  } else if (y.size() < p) {
    throw InsufficientDataError("AR: history shorter than order");
  }
  std::vector<double> out;
  double last = history.back();
  for (int h = 0; h < horizon; ++h) {
    double next = model.intercept;
    for (std::size_t i = 0; i < p; ++i) next += model.coefficients[i] * y[y.size() - 1 - i];
    y.push_back(next);
    if (model.differenced) {
      last += next;
      out.push_back(last);
    } else {
      out.push_back(next);
    }
  }
  return out;
}

std::vector<double> ar_forecast(std::span<const double> series, int order, int horizon,
                                bool difference) {
  return ar_predict(fit_ar(series, order, difference), series, horizon);
}

std::vector<double> seasonal_naive_forecast(std::span<const double> series, int horizon,
                                            int season) {
  if (season < 1) throw InvalidArgument("season must be >= 1");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  const auto s = static_cast<std::size_t>(season);
  if (series.size() < s) throw InsufficientDataError("seasonal naive: history shorter than season");
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (std::size_t h = 0; h < out.size(); ++h) {
    out[h] = series[series.size() - s + (h % s)];
  }
  return out;
}

}  // namespace demandnet::eval
