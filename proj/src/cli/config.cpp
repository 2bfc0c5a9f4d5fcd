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

#include "demandnet/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "demandnet/io.hpp"

namespace demandnet::cli {
namespace {

using nlohmann::json;

json train_json(const nn::TrainConfig& t) {
  return json{{"optimizer", nn::optimizer_name(t.optimizer)},
              {"learning_rate", t.learning_rate},
              {"weight_decay", t.weight_decay},
              {"batch_size", t.batch_size},
              {"epochs", t.epochs},
              {"samples_per_epoch", t.samples_per_epoch},
              {"patience", t.patience}};
}

// A JSON null stands for +infinity (JSON has no literal for it).
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void flatten(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& item : j.items()) {
    const std::string key = prefix.empty() ? item.key() : prefix + "." + item.key();
    if (item.value().is_object() && !item.value().empty()) {
      flatten(item.value(), key, out);
    } else {
      out.push_back(key);
    }
  }
}

bool known_key(const std::string& key, const std::vector<std::string>& keys) {
  for (const auto& k : keys) {
    if (k == key || k.rfind(key + ".", 0) == 0) return true;
  }
  return false;
}

void check_keys(const json& j) {
  const auto keys = config_keys();
  std::vector<std::string> present;
  flatten(j, "", present);
  for (const auto& k : present) {
    if (!known_key(k, keys)) {
      throw ConfigError("unknown config key '" + k + "'; did you mean '" + nearest_key(k) +
                        "'?");
    }
  }
}

void overlay(json& dst, const json& src) {
  for (const auto& item : src.items()) {
    if (item.value().is_object() && dst.contains(item.key()) &&
        dst[item.key()].is_object()) {
      overlay(dst[item.key()], item.value());
    } else {
      dst[item.key()] = item.value();
    }
  }
}

// Reads j[key] into `field` when present, naming the dotted key on a type
// mismatch.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  template <typename T>
  void get(const char* key, T& field) const {
    if (!j_.is_object() || !j_.contains(key)) return;
    try {
      j_.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + dotted(key) + "': " + e.what());
    }
  }

  void get_real(const char* key, double& field) const {
    if (j_.is_object() && j_.contains(key) && j_.at(key).is_null()) {
      field = std::numeric_limits<double>::infinity();
      return;
    }
    get(key, field);
  }

  template <typename T, typename Fn>
  void get_named(const char* key, T& field, Fn from_name) const {
    if (!j_.is_object() || !j_.contains(key)) return;
    std::string name;
    get(key, name);
    try {
      field = from_name(name);
    } catch (const Error& e) {
      throw ConfigError("config key '" + dotted(key) + "': " + e.what());
    }
  }

  Reader sub(const char* key) const {
    static const json empty = json::object();
    if (!j_.is_object() || !j_.contains(key)) return Reader(empty, dotted(key));
    return Reader(j_.at(key), dotted(key));
  }

  const json& raw() const { return j_; }
  std::string dotted(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

void read_train(const Reader& r, nn::TrainConfig& t) {
  r.get_named("optimizer", t.optimizer, nn::optimizer_from_name);
  r.get("learning_rate", t.learning_rate);
  r.get("weight_decay", t.weight_decay);
  r.get("batch_size", t.batch_size);
  r.get("epochs", t.epochs);
  r.get("samples_per_epoch", t.samples_per_epoch);
  r.get("patience", t.patience);
}

predict::PolicyMode policy_mode_from_name(const std::string& name) {
  if (name == "known") return predict::PolicyMode::kKnown;
  if (name == "dummy") return predict::PolicyMode::kDummy;
  throw ConfigError("unknown policy mode '" + name + "' (expected known or dummy)");
}

}  // namespace

void RunConfig::validate() const {
  synth.validate();
  if (horizons.empty()) throw ConfigError("data.horizons must not be empty");
  for (const int h : horizons) {
    if (h < 1) throw ConfigError("data.horizons entries must be >= 1");
  }
  if (pipeline.window < 1) throw ConfigError("data.window must be >= 1");
  if (pipeline.kappa < 1) throw ConfigError("mc.kappa must be >= 1");
  for (const double p : pipeline.dropout_candidates) {
    if (!(p >= 0.0 && p <= 0.9)) throw ConfigError("mc.dropout_candidates must lie in [0, 0.9]");
  }
  if (pipeline.dropout_candidates.empty()) {
    throw ConfigError("mc.dropout_candidates must not be empty");
  }
  if (!surface_features.empty() && surface_features.size() != 2) {
    throw ConfigError("effects.surface_features must name exactly two features");
  }
  if (curve_points < 2 || surface_points < 2) {
    throw ConfigError("effects curve and surface need at least 2 grid points");
  }
  if (forecast_dropout > 0.9) throw ConfigError("forecast.dropout must be <= 0.9");
  for (const auto& p : protocols) {
    if (p != "split80" && p != "unseen") {
      throw ConfigError("unknown protocol '" + p + "' (expected split80 or unseen)");
    }
  }
  try {
    eval::validate_methods(methods);
  } catch (const Error& e) {
    throw ConfigError(std::string("evaluate.methods: ") + e.what());
  }
  if (holdout_count < 1) throw ConfigError("evaluate.holdout_count must be >= 1");
  if (pipeline.origin_stride < 1) throw ConfigError("evaluate.origin_stride must be >= 1");
  pipeline.forecaster.train.validate();
  pipeline.autoencoder.train.validate();
  pipeline.effect.train.validate();
}

nlohmann::json to_json(const RunConfig& c) {
  json synth;
  data::to_json(synth, c.synth);
  const auto& p = c.pipeline;
  return json{
      {"seed", c.seed},
      {"paths",
       {{"data", c.data_path},
        {"static", c.static_path},
        {"out", c.out_dir},
        {"checkpoint", c.checkpoint_dir}}},
      {"synth", synth},
      {"data",
       {{"target_column", c.schema.target_column},
        {"policy_column", c.schema.policy_column},
        {"covariates", c.schema.covariate_columns},
        {"train_fraction", p.fractions.train},
        {"validation_fraction", p.fractions.validation},
        {"test_fraction", p.fractions.test},
        {"window", p.window},
        {"horizons", c.horizons}}},
      {"features",
       {{"static_band", p.static_band},
        {"use_autoencoder", p.use_autoencoder},
        {"cell", nn::cell_name(p.autoencoder_arch.cell)},
        {"encoder_widths", p.autoencoder_arch.encoder_widths},
        {"bottleneck", p.autoencoder_arch.bottleneck},
        {"threshold_fraction", number_or_null(p.autoencoder.threshold_fraction)},
        {"validation_fraction", p.autoencoder.validation_fraction},
        {"max_windows", p.autoencoder.max_windows},
        {"train", train_json(p.autoencoder.train)}}},
      {"effects",
       {{"hidden", p.effect_arch.hidden},
        {"activation", nn::activation_name(p.effect_arch.hidden_activation)},
        {"policy_degree", p.effect.policy_degree},
        {"policy_grid_points", p.effect.policy_grid_points},
        {"curve_features", c.curve_features},
        {"curve_points", c.curve_points},
        {"surface_features", c.surface_features},
        {"surface_points", c.surface_points},
        {"train", train_json(p.effect.train)}}},
      {"forecaster",
       {{"cell", nn::cell_name(p.forecaster_arch.cell)},
        {"hidden", p.forecaster_arch.hidden},
        {"layers", p.forecaster_arch.layers},
        {"demand_cell", predict::demand_cell_name(p.forecaster_arch.demand_cell)},
        {"dropout", p.forecaster.dropout},
        {"train", train_json(p.forecaster.train)}}},
      {"mc",
       {{"kappa", p.kappa},
        {"dropout_candidates", p.dropout_candidates},
        {"dropout_windows", p.dropout_windows},
        {"unseen_policy", p.unseen_policy == predict::PolicyMode::kKnown ? "known" : "dummy"}}},
      {"forecast",
       {{"origin", c.forecast_origin},
        {"dropout", c.forecast_dropout},
        {"series", c.forecast_series}}},
      {"evaluate",
       {{"protocols", c.protocols},
        {"methods", c.methods},
        {"seeds", c.seeds},
        {"held_out", c.held_out},
        {"holdout_count", c.holdout_count},
        {"ar_order", p.ar_order},
        {"season", p.season},
        {"origin_stride", p.origin_stride}}},
  };
}

RunConfig from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j);
  RunConfig c;
  const Reader root(j, "");
  root.get("seed", c.seed);

  const Reader paths = root.sub("paths");
  paths.get("data", c.data_path);
  paths.get("static", c.static_path);
  paths.get("out", c.out_dir);
  paths.get("checkpoint", c.checkpoint_dir);

  if (j.contains("synth")) {
    try {
      data::from_json(j.at("synth"), c.synth);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config section 'synth': ") + e.what());
    }
  }

  auto& p = c.pipeline;
  const Reader d = root.sub("data");
  d.get("target_column", c.schema.target_column);
  d.get("policy_column", c.schema.policy_column);
  d.get("covariates", c.schema.covariate_columns);
  d.get("train_fraction", p.fractions.train);
  d.get("validation_fraction", p.fractions.validation);
  d.get("test_fraction", p.fractions.test);
  d.get("window", p.window);
  d.get("horizons", c.horizons);

  const Reader f = root.sub("features");
  f.get("static_band", p.static_band);
  f.get("use_autoencoder", p.use_autoencoder);
  f.get_named("cell", p.autoencoder_arch.cell, nn::cell_from_name);
  f.get("encoder_widths", p.autoencoder_arch.encoder_widths);
  f.get("bottleneck", p.autoencoder_arch.bottleneck);
  f.get_real("threshold_fraction", p.autoencoder.threshold_fraction);
  f.get("validation_fraction", p.autoencoder.validation_fraction);
  f.get("max_windows", p.autoencoder.max_windows);
  read_train(f.sub("train"), p.autoencoder.train);

  const Reader e = root.sub("effects");
  e.get("hidden", p.effect_arch.hidden);
  e.get_named("activation", p.effect_arch.hidden_activation, nn::activation_from_name);
  e.get("policy_degree", p.effect.policy_degree);
  e.get("policy_grid_points", p.effect.policy_grid_points);
  e.get("curve_features", c.curve_features);
  e.get("curve_points", c.curve_points);
  e.get("surface_features", c.surface_features);
  e.get("surface_points", c.surface_points);
  read_train(e.sub("train"), p.effect.train);

  const Reader fc = root.sub("forecaster");
  fc.get_named("cell", p.forecaster_arch.cell, nn::cell_from_name);
  fc.get("hidden", p.forecaster_arch.hidden);
  fc.get("layers", p.forecaster_arch.layers);
  fc.get_named("demand_cell", p.forecaster_arch.demand_cell, predict::demand_cell_from_name);
  fc.get("dropout", p.forecaster.dropout);
  read_train(fc.sub("train"), p.forecaster.train);

  const Reader mc = root.sub("mc");
  mc.get("kappa", p.kappa);
  mc.get("dropout_candidates", p.dropout_candidates);
  mc.get("dropout_windows", p.dropout_windows);
  mc.get_named("unseen_policy", p.unseen_policy, policy_mode_from_name);

  const Reader fo = root.sub("forecast");
  fo.get("origin", c.forecast_origin);
  fo.get("dropout", c.forecast_dropout);
  fo.get("series", c.forecast_series);

  const Reader ev = root.sub("evaluate");
  ev.get("protocols", c.protocols);
  ev.get("methods", c.methods);
  ev.get("seeds", c.seeds);
  ev.get("held_out", c.held_out);
  ev.get("holdout_count", c.holdout_count);
  ev.get("ar_order", p.ar_order);
  ev.get("season", p.season);
  ev.get("origin_stride", p.origin_stride);

  p.forecaster_arch.window = p.window;
  c.validate();
  return c;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  flatten(to_json(RunConfig{}), "", keys);
  return keys;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& k : config_keys()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

RunConfig resolve_config(const ConfigSources& sources) {
  json merged = to_json(RunConfig{});
  if (sources.file) {
    json file;
    try {
      file = json::parse(io::read_file(*sources.file));
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + *sources.file + "' is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    check_keys(file);
    overlay(merged, file);
  }
  const auto keys = config_keys();
  for (const auto& item : sources.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + item + "' must have the form key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    if (!known_key(key, keys)) {
      throw ConfigError("unknown config key '" + key + "'; did you mean '" + nearest_key(key) +
                        "'?");
    }
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;
    }
    json* node = &merged;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  if (sources.seed) merged["seed"] = *sources.seed;
  if (sources.out_dir) merged["paths"]["out"] = *sources.out_dir;
  return from_json(merged);
}

std::string effective_config_json(const RunConfig& config) {
  return to_json(config).dump(2) + "\n";
}

}  // namespace demandnet::cli
