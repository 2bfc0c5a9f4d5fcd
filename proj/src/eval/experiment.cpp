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

#include "demandnet/eval/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "demandnet/eval/baselines.hpp"
#include "demandnet/io.hpp"

namespace demandnet::eval {
namespace {

const std::vector<std::string> kMethods = {"demandnet-lstm", "demandnet-gru",
                                           "demandnet-lstm-noskip", "exp-smoothing", "ar",
                                           "seasonal-naive"};

struct Accumulator {
  double mae = 0.0;
  double rmse = 0.0;
  double sd = 0.0;
  std::size_t n = 0;

  void add(double a, double r, double s) {
    mae += a;
    rmse += r;
    sd += s;
    ++n;
  }
};

// Per-horizon sums over origins of one series, normalized and raw scale.
struct SeriesScores {
  std::vector<Accumulator> norm;
  std::vector<Accumulator> raw;
  double chosen_p = 0.0;
};

struct EvalTarget {
  const data::SeriesBundle* raw = nullptr;
  data::DatasetSplit split;
  std::size_t stats_end = 0;  // statistics come from rows [0, stats_end)
};

std::vector<std::size_t> test_origins(const data::DatasetSplit& split, int min_h,
                                      std::size_t tau, int stride) {
  std::vector<std::size_t> out;
  const std::size_t begin = std::max(split.test.begin, tau);
  for (std::size_t o = begin; o + static_cast<std::size_t>(min_h) <= split.test.end;
       o += static_cast<std::size_t>(stride)) {
    out.push_back(o);
  }
  if (out.empty()) {
    throw InsufficientDataError("test range [" + std::to_string(split.test.begin) + ", " +
                                std::to_string(split.test.end) +
                                ") holds no forecast origin for horizon " +
                                std::to_string(min_h));
  }
  return out;
}

void score_path(SeriesScores& scores, const std::vector<int>& horizons, std::size_t origin,
                std::span<const double> pred, std::span<const double> sd,
                const data::SeriesBundle& norm, const data::NormStats& stats,
                std::size_t test_end) {
  for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
    const auto h = static_cast<std::size_t>(horizons[hi]);
    if (origin + h > test_end) continue;
    std::vector<double> p(pred.begin(), pred.begin() + static_cast<std::ptrdiff_t>(h));
    std::vector<double> t(norm.target.begin() + static_cast<std::ptrdiff_t>(origin),
                          norm.target.begin() + static_cast<std::ptrdiff_t>(origin + h));
    double sd_mean = 0.0;
    for (std::size_t k = 0; k < h; ++k) sd_mean += sd.empty() ? 0.0 : sd[k];
    sd_mean /= static_cast<double>(h);
    scores.norm[hi].add(mae(p, t), rmse(p, t), sd_mean);
    for (auto& v : p) v = stats.denormalize(0, v);
    for (auto& v : t) v = stats.denormalize(0, v);
    scores.raw[hi].add(mae(p, t), rmse(p, t), sd_mean * stats.scale[0]);
  }
}

SeriesScores evaluate_series(const std::string& method, const EvalTarget& target,
                             const std::vector<int>& horizons, const PipelineConfig& config,
                             const predict::ForecasterModel* model, bool unseen,
                             uint64_t seed) {
  const data::SeriesBundle& raw = *target.raw;
  const data::NormStats stats = data::fit_norm_stats(raw, data::Range{0, target.stats_end});
  const data::SeriesBundle norm = data::normalize(raw, stats);
  const int max_h = *std::max_element(horizons.begin(), horizons.end());
  const int min_h = *std::min_element(horizons.begin(), horizons.end());
  const auto tau = static_cast<std::size_t>(config.window);
  const auto origins = test_origins(target.split, min_h, tau, config.origin_stride);
  const std::size_t test_end = target.split.test.end;

  SeriesScores scores;
  scores.norm.resize(horizons.size());
  scores.raw.resize(horizons.size());
  const std::vector<double>& x = norm.target;

  if (is_demandnet(method)) {
    const double p = choose_dropout(*model, norm, target.split, config,
                                    unseen ? config.unseen_policy : predict::PolicyMode::kKnown,
                                    seed)
                         .p;
    scores.chosen_p = p;
    for (const std::size_t o : origins) {
      predict::ForecastDistribution d;
      const uint64_t s = mix_seed(seed, o);
      if (unseen) {
        d = predict::forecast_unseen(*model, raw, target.stats_end, o, config.unseen_policy,
                                     config.kappa, p, s)
                .distribution;
      } else {
        d = predict::mc_forecast(*model, model->make_input(norm, o), config.kappa, p, s);
      }
      score_path(scores, horizons, o, std::span<const double>(d.mean.data(), d.mean.size()),
                 std::span<const double>(d.sd.data(), d.sd.size()), norm, stats, test_end);
    }
    return scores;
  }

  if (method == "exp-smoothing") {
    const data::Range val = target.split.validation;
    const SmoothingFit fit = tune_exp_smoothing(
        std::span<const double>(x.data(), val.end), val.begin, val.end, max_h);
    for (const std::size_t o : origins) {
      const auto f = exp_smoothing_forecast(std::span<const double>(x.data(), o), fit.alpha,
                                            max_h, fit.mode, fit.mode == SmoothingMode::kHolt
                                                                 ? fit.beta
                                                                 : 0.1);
      score_path(scores, horizons, o, f, {}, norm, stats, test_end);
    }
  } else if (method == "ar") {
    const ArModel fit =
        fit_ar(std::span<const double>(x.data(), target.split.test.begin), config.ar_order);
    for (const std::size_t o : origins) {
      const auto f = ar_predict(fit, std::span<const double>(x.data(), o), max_h);
      score_path(scores, horizons, o, f, {}, norm, stats, test_end);
    }
  } else if (method == "seasonal-naive") {
    for (const std::size_t o : origins) {
      const auto f =
          seasonal_naive_forecast(std::span<const double>(x.data(), o), max_h, config.season);
      score_path(scores, horizons, o, f, {}, norm, stats, test_end);
    }
  } else {
    throw InvalidArgument("unknown method '" + method + "'");
  }
  return scores;
}

void add_cells(SeedRun& run, const std::string& method, const std::vector<int>& horizons,
               const std::vector<SeriesScores>& per_series, const std::vector<std::string>& ids) {
  for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
    for (int scale = 0; scale < 2; ++scale) {
      MetricSet m;
      m.method = method;
      m.horizon = horizons[hi];
      double count = 0.0;
      for (std::size_t si = 0; si < per_series.size(); ++si) {
        const auto& s = per_series[si];
        const Accumulator& a = scale == 0 ? s.norm[hi] : s.raw[hi];
        if (a.n == 0) continue;
        const double n = static_cast<double>(a.n);
        MetricSet one;
        one.method = method;
        one.horizon = horizons[hi];
        one.mae = a.mae / n;
        one.rmse = a.rmse / n;
        one.sd = a.sd / n;
        one.n = a.n;
        (scale == 0 ? run.series_cells : run.series_raw_cells)[ids[si]].push_back(one);
        m.mae += a.mae / n;
        m.rmse += a.rmse / n;
        m.sd += a.sd / n;
        m.n += a.n;
        count += 1.0;
      }
      if (count == 0.0) {
        m.failed = true;
        m.error = "no forecast origin";
      } else {
        m.mae /= count;
        m.rmse /= count;
        m.sd /= count;
      }
      (scale == 0 ? run.cells : run.raw_cells).push_back(m);
    }
  }
}

void add_failed(SeedRun& run, const std::string& method, const std::vector<int>& horizons,
                const std::string& error) {
  for (const int h : horizons) {
    MetricSet m;
    m.method = method;
    m.horizon = h;
    m.failed = true;
    m.error = error;
    run.cells.push_back(m);
    run.raw_cells.push_back(m);
  }
}

const MetricSet* find_cell(const std::vector<MetricSet>& cells, const std::string& method,
                           int horizon) {
  for (const auto& c : cells) {
    if (c.method == method && c.horizon == horizon) return &c;
  }
  return nullptr;
}

void average_runs(ExperimentReport& report) {
  for (int scale = 0; scale < 2; ++scale) {
    auto& out = scale == 0 ? report.cells : report.raw_cells;
    out.clear();
    for (const auto& method : report.methods) {
      for (const int h : report.horizons) {
        MetricSet m;
        m.method = method;
        m.horizon = h;
        double count = 0.0;
        for (const auto& run : report.runs) {
          const MetricSet* c = find_cell(scale == 0 ? run.cells : run.raw_cells, method, h);
          if (c == nullptr || c->failed) {
            m.failed = true;
            if (c) m.error = c->error;
            continue;
          }
          m.mae += c->mae;
          m.rmse += c->rmse;
          m.sd += c->sd;
          m.n += c->n;
          count += 1.0;
        }
        if (count > 0.0 && !m.failed) {
          m.mae /= count;
          m.rmse /= count;
          m.sd /= count;
        }
        out.push_back(m);
      }
    }
  }
}

PipelineConfig with_horizon(PipelineConfig config, const std::vector<int>& horizons) {
  if (horizons.empty()) throw InvalidArgument("no horizons requested");
  for (const int h : horizons) {
    if (h < 1) throw InvalidArgument("horizons must be >= 1");
  }
  config.forecaster_arch.horizon = *std::max_element(horizons.begin(), horizons.end());
  config.forecaster_arch.window = config.window;
  return config;
}

struct FittedMethods {
  std::map<std::string, predict::ForecasterModel> models;
  std::map<std::string, std::string> errors;
};

FittedMethods fit_methods(const std::vector<predict::TrainingSeries>& series,
                          const std::vector<std::string>& methods, const PipelineConfig& config,
                          uint64_t seed) {
  FittedMethods out;
  bool any = false;
  for (const auto& m : methods) any = any || is_demandnet(m);
  if (!any) return out;
  std::optional<SharedStages> shared;
  try {
    shared = fit_shared_stages(series, config, seed);
  } catch (const Error& e) {
    for (const auto& m : methods) {
      if (is_demandnet(m)) out.errors[m] = e.what();
    }
    return out;
  }
  for (const auto& m : methods) {
    if (!is_demandnet(m)) continue;
    try {
      out.models.emplace(m, fit_forecaster(series, *shared, config, m, seed).model);
    } catch (const Error& e) {
      out.errors[m] = e.what();
    }
  }
  return out;
}

}  // namespace

bool is_demandnet(const std::string& method) { return method.rfind("demandnet-", 0) == 0; }

void validate_methods(const std::vector<std::string>& methods) {
  if (methods.empty()) throw InvalidArgument("no methods requested");
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      std::string valid;
      for (const auto& k : kMethods) valid += (valid.empty() ? "" : ", ") + k;
      throw InvalidArgument("unknown method '" + m + "' (valid: " + valid + ")");
    }
  }
}

std::vector<predict::TrainingSeries> training_series(
    const std::vector<data::SeriesBundle>& bundles, const data::SplitFractions& fractions) {
  std::vector<predict::TrainingSeries> out;
  for (const auto& b : bundles) out.push_back({b, data::split_time(b, fractions)});
  return out;
}

features::CorrelationReport select_static(const std::vector<predict::TrainingSeries>& series,
                                          double band) {
  if (series.empty()) throw InsufficientDataError("static selection: no series");
  const auto& names = series.front().bundle.static_names;
  Matrix profiles(static_cast<Eigen::Index>(series.size()),
                  static_cast<Eigen::Index>(names.size()));
  std::vector<double> response;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& b = series[k].bundle;
    if (b.static_names != names) {
      throw SchemaError("series '" + b.id + "' has a different static feature set");
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
      profiles(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = b.static_values[j];
    }
    response.push_back(features::shock_response(b, series[k].split.train));
  }
  return features::filter_static(names, profiles, response, band);
}

SharedStages fit_shared_stages(const std::vector<predict::TrainingSeries>& series,
                               const PipelineConfig& config, uint64_t seed) {
  if (series.empty()) throw InsufficientDataError("pipeline: no training series");
  SharedStages out;
  if (!series.front().bundle.static_names.empty()) {
    out.correlation = select_static(series, config.static_band);
    out.static_names = out.correlation.retained_names();
  }

  if (config.use_autoencoder) {
    out.autoencoder_result = fit_autoencoder_stage(series, config, seed);
    out.autoencoder = out.autoencoder_result->model;
  }
  out.effect = fit_effect_stage(series, out.static_names, config, seed);
  return out;
}

features::AutoencoderResult fit_autoencoder_stage(
    const std::vector<predict::TrainingSeries>& series, const PipelineConfig& config,
    uint64_t seed) {
  if (series.empty()) throw InsufficientDataError("autoencoder: no training series");
  std::vector<Matrix> windows;
  const auto tau = static_cast<std::size_t>(config.window);
  for (const auto& s : series) {
    const data::SeriesBundle norm =
        data::normalize(s.bundle, data::fit_norm_stats(s.bundle, s.split.train));
    for (auto& w : data::windows_with_labels_in(norm, tau, 1, s.split.train)) {
      windows.push_back(std::move(w.window));
    }
  }
  features::AutoencoderArch arch = config.autoencoder_arch;
  arch.length = config.window;
  arch.channels = static_cast<int>(1 + series.front().bundle.covariate_count());
  features::AutoencoderTraining training = config.autoencoder;
  training.train.seed = seed;
  return features::train_autoencoder(windows, training, arch);
}

effects::EffectResult fit_effect_stage(const std::vector<predict::TrainingSeries>& series,
                                       const std::vector<std::string>& static_names,
                                       const PipelineConfig& config, uint64_t seed) {
  if (series.empty()) throw InsufficientDataError("effect model: no training series");
  std::vector<data::Range> ranges;
  std::vector<data::NormStats> stats;
  std::vector<data::SeriesBundle> bundles;
  for (const auto& s : series) {
    ranges.push_back(s.split.train);
    stats.push_back(data::fit_norm_stats(s.bundle, s.split.train));
    bundles.push_back(s.bundle);
  }
  const effects::EffectDataset ds =
      effects::make_effect_dataset(bundles, ranges, stats, static_names);
  effects::EffectTraining effect = config.effect;
  effect.train.seed = seed;
  const int policy = series.front().bundle.policy_index;
  const std::string policy_name =
      policy >= 0 ? series.front().bundle.covariate_names[static_cast<std::size_t>(policy)]
                  : std::string("policy");
  return effects::train_effect_model(ds.rows, ds.target, ds.names, effect, config.effect_arch,
                                     policy_name);
}

PipelineConfig method_config(const PipelineConfig& config, const std::string& method) {
  PipelineConfig out = config;
  if (method == "demandnet-lstm") {
    out.forecaster_arch.cell = nn::CellKind::kLstm;
  } else if (method == "demandnet-gru") {
    out.forecaster_arch.cell = nn::CellKind::kGru;
  } else if (method == "demandnet-lstm-noskip") {
    out.forecaster_arch.cell = nn::CellKind::kLstm;
    out.forecaster_arch.demand_cell = predict::DemandCellMode::kNone;
  } else {
    throw InvalidArgument("'" + method + "' is not a forecaster method");
  }
  return out;
}

predict::ForecasterResult fit_forecaster(const std::vector<predict::TrainingSeries>& series,
                                         const SharedStages& shared,
                                         const PipelineConfig& config, uint64_t seed) {
  predict::ForecasterArch arch = config.forecaster_arch;
  arch.window = config.window;
  predict::ForecasterTraining training = config.forecaster;
  training.train.seed = seed;
  auto result = predict::train_forecaster(series, training, arch, shared.effect.model,
                                          shared.autoencoder, shared.static_names);
  result.model.dropout_candidates = config.dropout_candidates;
  return result;
}

predict::DropoutChoice choose_dropout(const predict::ForecasterModel& model,
                                      const data::SeriesBundle& normalized,
                                      const data::DatasetSplit& split,
                                      const PipelineConfig& config, predict::PolicyMode mode,
                                      uint64_t seed) {
  if (config.dropout_candidates.empty()) throw InvalidArgument("no dropout candidates");
  const data::Range val = split.validation;
  const auto tau = static_cast<std::size_t>(config.window);
  const std::size_t horizon = static_cast<std::size_t>(model.arch().horizon);
  std::vector<predict::ForecastInput> inputs;
  std::vector<Vector> truths;
  const std::size_t first = std::max(val.begin, tau);
  if (val.end > first && config.dropout_windows > 0) {
    const std::size_t span = val.end - first;
    const auto count =
        std::min<std::size_t>(static_cast<std::size_t>(config.dropout_windows), span);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t o = first + i * span / count;
      inputs.push_back(model.make_input(normalized, o, mode));
      const std::size_t len = std::min(horizon, val.end - o);
      truths.push_back(Eigen::Map<const Vector>(normalized.target.data() + o,
                                                static_cast<Eigen::Index>(len)));
    }
  }
  if (inputs.empty()) {
    predict::DropoutChoice fallback;
    fallback.p = config.dropout_candidates.front();
    fallback.candidates = config.dropout_candidates;
    return fallback;
  }
  return predict::optimize_dropout(model, inputs, truths, config.dropout_candidates,
                                   config.kappa, mix_seed(seed, 0xd0));
}

predict::ForecasterResult fit_forecaster(const std::vector<predict::TrainingSeries>& series,
                                         const SharedStages& shared,
                                         const PipelineConfig& config,
                                         const std::string& method, uint64_t seed) {
  return fit_forecaster(series, shared, method_config(config, method), seed);
}

const MetricSet& ExperimentReport::cell(const std::string& method, int horizon) const {
  const MetricSet* c = find_cell(cells, method, horizon);
  if (!c) throw InvalidArgument("report has no cell " + method + "@" + std::to_string(horizon));
  return *c;
}

const MetricSet& ExperimentReport::seed_cell(std::size_t run, const std::string& method,
                                             int horizon) const {
  const MetricSet* c = find_cell(runs.at(run).cells, method, horizon);
  if (!c) throw InvalidArgument("run has no cell " + method + "@" + std::to_string(horizon));
  return *c;
}

ExperimentReport run_split80(const std::vector<data::SeriesBundle>& bundles,
                             const std::vector<std::string>& methods,
                             const std::vector<int>& horizons,
                             const std::vector<uint64_t>& seeds,
                             const PipelineConfig& base_config) {
  validate_methods(methods);
  if (seeds.empty()) throw InvalidArgument("no seeds requested");
  if (bundles.empty()) throw InsufficientDataError("no series to evaluate");
  const PipelineConfig config = with_horizon(base_config, horizons);
  ExperimentReport report;
  report.protocol = "split80";
  report.methods = methods;
  report.horizons = horizons;
  report.seeds = seeds;
  for (const auto& b : bundles) report.series.push_back(b.id);
  const auto series = training_series(bundles, config.fractions);
  for (const auto& s : series) {
    if (s.split.test.size() < static_cast<std::size_t>(
                                   *std::min_element(horizons.begin(), horizons.end()))) {
      throw InsufficientDataError("series '" + s.bundle.id + "': test range of " +
                                  std::to_string(s.split.test.size()) +
                                  " rows is shorter than the smallest horizon");
    }
  }
  for (const uint64_t seed : seeds) {
    SeedRun run;
    run.seed = seed;
    const FittedMethods fitted = fit_methods(series, methods, config, seed);
    for (const auto& method : methods) {
      if (fitted.errors.count(method)) {
        add_failed(run, method, horizons, fitted.errors.at(method));
        continue;
      }
      const predict::ForecasterModel* model =
          is_demandnet(method) ? &fitted.models.at(method) : nullptr;
      std::vector<SeriesScores> per_series;
      try {
        for (const auto& s : series) {
          EvalTarget t{&s.bundle, s.split, s.split.train.end};
          per_series.push_back(evaluate_series(method, t, horizons, config, model, false, seed));
          if (model) run.chosen_p[method][s.bundle.id] = per_series.back().chosen_p;
        }
      } catch (const Error& e) {
        add_failed(run, method, horizons, e.what());
        continue;
      }
      add_cells(run, method, horizons, per_series, report.series);
    }
    report.runs.push_back(std::move(run));
  }
  average_runs(report);
  return report;
}

ExperimentReport run_unseen(const std::vector<data::SeriesBundle>& bundles,
                            const std::set<std::string>& held_ids,
                            const std::vector<std::string>& methods,
                            const std::vector<int>& horizons,
                            const std::vector<uint64_t>& seeds,
                            const PipelineConfig& base_config) {
  validate_methods(methods);
  if (seeds.empty()) throw InvalidArgument("no seeds requested");
  const PipelineConfig config = with_horizon(base_config, horizons);
  const auto [train_bundles, unseen] = data::holdout_series(bundles, held_ids);
  ExperimentReport report;
  report.protocol = "unseen";
  report.methods = methods;
  report.horizons = horizons;
  report.seeds = seeds;
  for (const auto& b : unseen) report.series.push_back(b.id);
  const auto series = training_series(train_bundles, config.fractions);
  std::vector<EvalTarget> targets;
  for (const auto& b : unseen) {
    const data::DatasetSplit split = data::split_time(b, config.fractions);
    targets.push_back({&b, split, split.test.begin});
  }
  for (const uint64_t seed : seeds) {
    SeedRun run;
    run.seed = seed;
    const FittedMethods fitted = fit_methods(series, methods, config, seed);
    for (const auto& method : methods) {
      if (fitted.errors.count(method)) {
        add_failed(run, method, horizons, fitted.errors.at(method));
        continue;
      }
      const predict::ForecasterModel* model =
          is_demandnet(method) ? &fitted.models.at(method) : nullptr;
      const uint64_t before = model ? model->parameter_hash() : 0;
      std::vector<SeriesScores> per_series;
      try {
        for (const auto& t : targets) {
          per_series.push_back(evaluate_series(method, t, horizons, config, model, true, seed));
          if (model) run.chosen_p[method][t.raw->id] = per_series.back().chosen_p;
        }
      } catch (const Error& e) {
        add_failed(run, method, horizons, e.what());
        continue;
      }
      if (model && model->parameter_hash() != before) run.parameters_unchanged = false;
      add_cells(run, method, horizons, per_series, report.series);
    }
    report.runs.push_back(std::move(run));
  }
  average_runs(report);
  return report;
}

std::set<std::string> random_holdout(const std::vector<data::SeriesBundle>& bundles,
                                     std::size_t count, uint64_t seed) {
  if (count == 0 || count >= bundles.size()) {
    throw InvalidArgument("holdout count must lie in [1, " +
                          std::to_string(bundles.size() > 0 ? bundles.size() - 1 : 0) + "]");
  }
  std::vector<std::string> ids;
  for (const auto& b : bundles) ids.push_back(b.id);
  Rng rng(seed, 0x401d);
  std::shuffle(ids.begin(), ids.end(), rng.engine());
  return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::string report_csv(const ExperimentReport& report, bool raw) {
  std::string seeds;
  for (const uint64_t s : report.seeds) seeds += (seeds.empty() ? "" : ";") + std::to_string(s);
  std::string out = "protocol,method,horizon,mae,rmse,sd,seeds\n";
  for (const auto& c : raw ? report.raw_cells : report.cells) {
    out += report.protocol + "," + c.method + "," + std::to_string(c.horizon) + ",";
    if (c.failed) {
      out += "failed,failed,failed,";
    } else {
      out += io::format_double(c.mae) + "," + io::format_double(c.rmse) + "," +
             io::format_double(c.sd) + ",";
    }
    out += seeds + "\n";
  }
  return out;
}

std::string report_table(const ExperimentReport& report) {
  std::string out;
  char buf[64];
  out += "Protocol: " + report.protocol + "\n";
  std::snprintf(buf, sizeof(buf), "%-24s %-6s", "Method", "Metric");
  out += buf;
  for (const int h : report.horizons) {
    std::snprintf(buf, sizeof(buf), " %10d", h);
    out += buf;
  }
  out += "\n";
  out += std::string(31 + 11 * report.horizons.size(), '-') + "\n";
  for (const auto& method : report.methods) {
    for (int metric = 0; metric < 3; ++metric) {
      const char* label = metric == 0 ? "MAE" : metric == 1 ? "RMSE" : "SD";
      std::snprintf(buf, sizeof(buf), "%-24s %-6s", metric == 0 ? method.c_str() : "", label);
      out += buf;
      for (const int h : report.horizons) {
        const MetricSet& c = report.cell(method, h);
        if (c.failed) {
          std::snprintf(buf, sizeof(buf), " %10s", "failed");
        } else {
          const double v = metric == 0 ? c.mae : metric == 1 ? c.rmse : c.sd;
          std::snprintf(buf, sizeof(buf), " %10.4f", v);
        }
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace demandnet::eval
