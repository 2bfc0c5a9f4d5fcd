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

#include "demandnet/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "demandnet/data/synth.hpp"
#include "demandnet/effects/effect_model.hpp"
#include "demandnet/eval/experiment.hpp"
#include "demandnet/features/autoencoder.hpp"
#include "demandnet/features/spearman.hpp"
#include "demandnet/io.hpp"
#include "demandnet/predict/forecaster.hpp"

namespace demandnet::cli {
namespace {

namespace fs = std::filesystem;

struct Artifacts {
  std::vector<std::string> paths;

  void write(const std::string& path, const std::string& content) {
    io::atomic_write(path, content);
    paths.push_back(path);
  }
};

std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out_dir) / name).string();
}

std::string ckpt_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.resolved_checkpoint_dir()) / name).string();
}

void prepare(const RunConfig& c, const std::string& command, Artifacts& out) {
  fs::create_directories(c.out_dir);
  fs::create_directories(c.resolved_checkpoint_dir());
  out.write(out_path(c, command + ".config.json"), effective_config_json(c));
}

void require(const std::string& path, const std::string& command, const std::string& what) {
  if (!fs::exists(path)) {
    throw PrerequisiteError(what + " '" + path + "' not found; run `" + command + "` first");
  }
}

std::vector<data::SeriesBundle> load_ingested(const RunConfig& c) {
  const std::string path = out_path(c, "dataset.csv");
  require(path, "ingest", "ingested dataset");
  data::CsvSchema schema = c.schema;
  schema.covariate_columns.clear();
  const std::string sidecar = out_path(c, "dataset_static.csv");
  schema.static_path = fs::exists(sidecar) ? std::optional<std::string>(sidecar) : std::nullopt;
  return data::load_dataset(path, schema);
}

std::vector<std::string> load_retained(const RunConfig& c) {
  const std::string path = out_path(c, "retained_features.txt");
  require(path, "select-features", "retained feature list");
  std::vector<std::string> names;
  const std::string text = io::read_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const std::string line = text.substr(start, end == std::string::npos ? end : end - start);
    if (!line.empty()) names.push_back(line);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return names;
}

std::optional<features::StackedAutoencoder> load_autoencoder(const RunConfig& c) {
  if (!c.pipeline.use_autoencoder) return std::nullopt;
  const std::string path = ckpt_path(c, "autoencoder.ckpt");
  require(path, "select-features", "autoencoder checkpoint");
  return features::StackedAutoencoder::load(io::read_file(path));
}

effects::EffectModel load_effect(const RunConfig& c) {
  const std::string path = ckpt_path(c, "effect_model.ckpt");
  require(path, "train-effects", "effect model checkpoint");
  return effects::EffectModel::load(io::read_file(path));
}

predict::ForecasterModel load_forecaster(const RunConfig& c) {
  const std::string path = ckpt_path(c, "forecaster.ckpt");
  require(path, "train", "forecaster checkpoint");
  return predict::ForecasterModel::load(io::read_file(path));
}

std::string loss_csv(const std::string& header, const std::vector<double>& a,
                     const std::vector<double>* b = nullptr) {
  std::string out = header + "\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    out += std::to_string(i) + "," + io::format_double(a[i]);
    if (b) out += "," + (i < b->size() ? io::format_double((*b)[i]) : std::string());
    out += "\n";
  }
  return out;
}

std::string file_token(const std::string& name) {
  std::string out;
  for (const char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
    out += ok ? ch : '_';
  }
  return out;
}

std::vector<uint64_t> eval_seeds(const RunConfig& c) {
  return c.seeds.empty() ? std::vector<uint64_t>{c.seed} : c.seeds;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"synth", "ingest", "select-features",
                                                 "train-effects", "effects-curve", "train",
                                                 "forecast", "evaluate"};
  return names;
}

std::vector<std::string> run_command(const std::string& command, const RunConfig& config,
                                     std::ostream& log) {
  if (command == "synth") return cmd_synth(config, log);
  if (command == "ingest") return cmd_ingest(config, log);
  if (command == "select-features") return cmd_select_features(config, log);
  if (command == "train-effects") return cmd_train_effects(config, log);
  if (command == "effects-curve") return cmd_effects_curve(config, log);
  if (command == "train") return cmd_train(config, log);
  if (command == "forecast") return cmd_forecast(config, log);
  if (command == "evaluate") return cmd_evaluate(config, log);
  throw InvalidArgument("unknown command '" + command + "'");
}

std::vector<std::string> cmd_synth(const RunConfig& c, std::ostream& log) {
  Artifacts out;
  prepare(c, "synth", out);
  const auto bundles = data::synth_generate(c.synth, c.seed);
  data::write_dataset(out_path(c, "synth.csv"), bundles);
  out.paths.push_back(out_path(c, "synth.csv"));
  data::write_static(out_path(c, "synth_static.csv"), bundles);
  out.paths.push_back(out_path(c, "synth_static.csv"));
  log << "synth: " << bundles.size() << " series x " << c.synth.length << " days\n";
  return out.paths;
}

std::vector<std::string> cmd_ingest(const RunConfig& c, std::ostream& log) {
  Artifacts out;
  data::CsvSchema schema = c.schema;
  std::string path = c.data_path;
  if (path.empty()) {
    path = out_path(c, "synth.csv");
    require(path, "synth", "input data (paths.data is unset)");
    if (c.static_path.empty() && fs::exists(out_path(c, "synth_static.csv"))) {
      schema.static_path = out_path(c, "synth_static.csv");
    }
  } else if (!fs::exists(path)) {
    throw PrerequisiteError("input data '" + path + "' not found; check paths.data");
  }
  if (!c.static_path.empty()) schema.static_path = c.static_path;
  prepare(c, "ingest", out);
  const auto bundles = data::load_dataset(path, schema);
  data::write_dataset(out_path(c, "dataset.csv"), bundles);
  out.paths.push_back(out_path(c, "dataset.csv"));
  data::write_static(out_path(c, "dataset_static.csv"), bundles);
  out.paths.push_back(out_path(c, "dataset_static.csv"));
  std::string summary = "series_id,rows,start,end,train_end,validation_end\n";
  for (const auto& b : bundles) {
    const auto split = data::split_time(b, c.pipeline.fractions);
    summary += b.id + "," + std::to_string(b.length()) + "," + data::format_date(b.start_day) +
               "," + data::format_date(b.start_day + static_cast<int64_t>(b.length()) - 1) +
               "," + std::to_string(split.train.end) + "," +
               std::to_string(split.validation.end) + "\n";
  }
  out.write(out_path(c, "ingest_summary.csv"), summary);
  log << "ingest: " << bundles.size() << " series from " << path << "\n";
  return out.paths;
}

std::vector<std::string> cmd_select_features(const RunConfig& c, std::ostream& log) {
  const auto bundles = load_ingested(c);
  Artifacts out;
  prepare(c, "select-features", out);
  const auto series = eval::training_series(bundles, c.pipeline.fractions);

  std::vector<std::string> retained;
  if (!bundles.front().static_names.empty()) {
    const auto report = eval::select_static(series, c.pipeline.static_band);
    out.write(out_path(c, "correlation_matrix.csv"), features::correlation_matrix_csv(report));
    std::string table = "feature,target_correlation,retained\n";
    for (std::size_t i = 0; i < report.names.size(); ++i) {
      table += report.names[i] + "," + io::format_double(report.target_correlation[i]) + "," +
               (report.retained[i] ? "1" : "0") + "\n";
    }
    out.write(out_path(c, "static_correlation.csv"), table);
    retained = report.retained_names();
  }
  std::string list;
  for (const auto& n : retained) list += n + "\n";
  out.write(out_path(c, "retained_features.txt"), list);
  log << "select-features: retained " << retained.size() << " static feature(s)\n";

  if (c.pipeline.use_autoencoder) {
    const auto result = eval::fit_autoencoder_stage(series, c.pipeline, c.seed);
    out.write(ckpt_path(c, "autoencoder.ckpt"), result.model.save());
    out.write(out_path(c, "autoencoder_loss.csv"),
              loss_csv("epoch,train_loss,validation_mse", result.train_loss,
                       &result.validation_mse));
    const auto tau = static_cast<std::size_t>(c.pipeline.window);
    const int h = result.model.arch().bottleneck;
    std::string enc = "series_id,t";
    for (int k = 1; k <= h; ++k) enc += ",u_" + std::to_string(k);
    enc += "\n";
    for (const auto& s : series) {
      const auto norm =
          data::normalize(s.bundle, data::fit_norm_stats(s.bundle, s.split.train));
      std::vector<Matrix> windows;
      for (std::size_t t = tau - 1; t < norm.length(); ++t) {
        windows.push_back(data::window_at(norm, tau, 1, t + 1).window);
      }
      std::vector<const Matrix*> ptrs;
      for (const auto& w : windows) ptrs.push_back(&w);
      const Matrix codes = result.model.encode_batch(ptrs);
      for (std::size_t i = 0; i < windows.size(); ++i) {
        enc += s.bundle.id + "," + std::to_string(tau - 1 + i);
        for (int k = 0; k < h; ++k) {
          enc += "," + io::format_double(codes(k, static_cast<Eigen::Index>(i)));
        }
        enc += "\n";
      }
    }
    out.write(out_path(c, "encoded_features.csv"), enc);
    log << "select-features: autoencoder " << result.epochs_run << " epoch(s), validation MSE "
        << (result.validation_mse.empty() ? 0.0 : result.validation_mse.back())
        << " (input variance " << result.input_variance << ")\n";
  }
  return out.paths;
}

std::vector<std::string> cmd_train_effects(const RunConfig& c, std::ostream& log) {
  const auto bundles = load_ingested(c);
  const auto retained = load_retained(c);
  Artifacts out;
  prepare(c, "train-effects", out);
  const auto series = eval::training_series(bundles, c.pipeline.fractions);
  const auto result = eval::fit_effect_stage(series, retained, c.pipeline, c.seed);
  out.write(ckpt_path(c, "effect_model.ckpt"), result.model.save());
  out.write(out_path(c, "effect_loss.csv"), loss_csv("epoch,loss", result.loss_history));
  for (const auto& w : result.warnings) log << "train-effects: warning: " << w << "\n";
  log << "train-effects: final loss "
      << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << "\n";
  return out.paths;
}

std::vector<std::string> cmd_effects_curve(const RunConfig& c, std::ostream& log) {
  const auto model = load_effect(c);
  Artifacts out;
  prepare(c, "effects-curve", out);
  const auto& names = c.curve_features.empty() ? model.feature_names() : c.curve_features;
  auto grid_for = [&](const std::string& name, int points) {
    const int i = model.feature_index(name);
    if (i < 0) throw InvalidArgument("effect model has no feature '" + name + "'");
    if (name == model.policy_feature) return effects::linear_grid(0.0, 1.0, points);
    double lo = model.feature_min()(i);
    double hi = model.feature_max()(i);
    if (!(hi > lo)) hi = lo + 1.0;
    return effects::linear_grid(lo, hi, points);
  };
  for (const auto& name : names) {
    const auto curve = effects::marginal_effect(model, name, grid_for(name, c.curve_points));
    out.write(out_path(c, "curve_" + file_token(name) + ".csv"), effects::curve_csv(curve));
  }
  if (model.policy_polynomial) {
    out.write(out_path(c, "policy_polynomial.csv"),
              effects::polynomial_csv(*model.policy_polynomial));
  }
  if (c.surface_features.size() == 2) {
    const auto& a = c.surface_features[0];
    const auto& b = c.surface_features[1];
    const auto ga = grid_for(a, c.surface_points);
    const auto gb = grid_for(b, c.surface_points);
    const Matrix surface = effects::marginal_surface(model, a, ga, b, gb);
    std::string csv = a + "," + b + ",predicted_target\n";
    for (std::size_t i = 0; i < ga.size(); ++i) {
      for (std::size_t j = 0; j < gb.size(); ++j) {
        csv += io::format_double(ga[i]) + "," + io::format_double(gb[j]) + "," +
               io::format_double(surface(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j))) +
               "\n";
      }
    }
    out.write(out_path(c, "surface.csv"), csv);
  }
  log << "effects-curve: " << names.size() << " curve(s)\n";
  return out.paths;
}

std::vector<std::string> cmd_train(const RunConfig& c, std::ostream& log) {
  const auto bundles = load_ingested(c);
  const auto retained = load_retained(c);
  auto autoencoder = load_autoencoder(c);
  eval::SharedStages shared;
  shared.effect.model = load_effect(c);
  shared.static_names = retained;
  shared.autoencoder = std::move(autoencoder);
  Artifacts out;
  prepare(c, "train", out);
  eval::PipelineConfig pipeline = c.pipeline;
  pipeline.forecaster_arch.horizon = *std::max_element(c.horizons.begin(), c.horizons.end());
  const auto series = eval::training_series(bundles, pipeline.fractions);
  const auto result = eval::fit_forecaster(series, shared, pipeline, c.seed);
  out.write(ckpt_path(c, "forecaster.ckpt"), result.model.save());
  out.write(out_path(c, "train_history.csv"),
            loss_csv("epoch,train_loss,validation_loss", result.train_loss,
                     &result.validation_loss));
  log << "train: " << result.train_loss.size() << " epoch(s), best epoch " << result.best_epoch
      << "\n";
  return out.paths;
}

std::vector<std::string> cmd_forecast(const RunConfig& c, std::ostream& log) {
  const auto bundles = load_ingested(c);
  const auto model = load_forecaster(c);
  Artifacts out;
  prepare(c, "forecast", out);
  std::set<std::string> wanted(c.forecast_series.begin(), c.forecast_series.end());
  for (const auto& id : wanted) {
    if (std::none_of(bundles.begin(), bundles.end(),
                     [&](const data::SeriesBundle& b) { return b.id == id; })) {
      throw InvalidArgument("forecast.series names unknown series '" + id + "'");
    }
  }
  const auto tau = static_cast<std::size_t>(model.arch().window);
  const auto horizon = static_cast<std::size_t>(model.arch().horizon);
  std::string csv = predict::forecast_csv_header();
  std::string raw_csv = "series_id,step,mean,sd,p_used,kappa\n";
  for (const auto& b : bundles) {
    if (!wanted.empty() && !wanted.count(b.id)) continue;
    const auto split = data::split_time(b, c.pipeline.fractions);
    const auto stats = data::fit_norm_stats(b, split.train);
    const auto norm = data::normalize(b, stats);
    const std::size_t origin =
        c.forecast_origin < 0 ? split.test.begin : static_cast<std::size_t>(c.forecast_origin);
    if (origin < tau || origin > b.length()) {
      throw RangeError("forecast origin " + std::to_string(origin) + " must lie in [" +
                       std::to_string(tau) + ", " + std::to_string(b.length()) + "]");
    }
    const double p =
        c.forecast_dropout >= 0.0
            ? c.forecast_dropout
            : eval::choose_dropout(model, norm, split, c.pipeline, predict::PolicyMode::kKnown,
                                   c.seed)
                  .p;
    const auto dist = predict::mc_forecast(model, model.make_input(norm, origin),
                                           c.pipeline.kappa, p, mix_seed(c.seed, origin));
    const std::size_t len = std::min(horizon, b.length() - origin);
    const Vector truth = Eigen::Map<const Vector>(norm.target.data() + origin,
                                                  static_cast<Eigen::Index>(len));
    csv += predict::forecast_csv_rows(b.id, dist, len > 0 ? &truth : nullptr);
    for (Eigen::Index t = 0; t < dist.mean.size(); ++t) {
      raw_csv += b.id + "," + std::to_string(t + 1) + "," +
                 io::format_double(stats.denormalize(0, dist.mean(t))) + "," +
                 io::format_double(dist.sd(t) * stats.scale[0]) + "," + io::format_double(p) +
                 "," + std::to_string(dist.kappa) + "\n";
    }
  }
  out.write(out_path(c, "forecast.csv"), csv);
  out.write(out_path(c, "forecast_raw.csv"), raw_csv);
  log << "forecast: written " << out_path(c, "forecast.csv") << "\n";
  return out.paths;
}

std::vector<std::string> cmd_evaluate(const RunConfig& c, std::ostream& log) {
  require(ckpt_path(c, "forecaster.ckpt"), "train", "forecaster checkpoint");
  const auto bundles = load_ingested(c);
  Artifacts out;
  prepare(c, "evaluate", out);
  const auto seeds = eval_seeds(c);
  for (const auto& protocol : c.protocols) {
    eval::ExperimentReport report;
    if (protocol == "split80") {
      report = eval::run_split80(bundles, c.methods, c.horizons, seeds, c.pipeline);
    } else {
      std::set<std::string> held(c.held_out.begin(), c.held_out.end());
      if (held.empty()) {
        held = eval::random_holdout(bundles, static_cast<std::size_t>(c.holdout_count), c.seed);
      }
      report = eval::run_unseen(bundles, held, c.methods, c.horizons, seeds, c.pipeline);
    }
    report.config_snapshot = effective_config_json(c);
    out.write(out_path(c, "report_" + protocol + ".csv"), eval::report_csv(report));
    out.write(out_path(c, "report_" + protocol + "_raw.csv"), eval::report_csv(report, true));
    out.write(out_path(c, "report_" + protocol + ".txt"), eval::report_table(report));
    std::string dropout = "method,seed,series_id,p\n";
    for (const auto& run : report.runs) {
      for (const auto& [method, per_series] : run.chosen_p) {
        for (const auto& [id, p] : per_series) {
          dropout += method + "," + std::to_string(run.seed) + "," + id + "," +
                     io::format_double(p) + "\n";
        }
      }
    }
    out.write(out_path(c, "dropout_" + protocol + ".csv"), dropout);
    for (const auto& run : report.runs) {
      if (!run.parameters_unchanged) {
        throw NumericError("model parameters changed during unseen evaluation (seed " +
                           std::to_string(run.seed) + ")");
      }
    }
    log << eval::report_table(report);
  }
  return out.paths;
}

}  // namespace demandnet::cli
