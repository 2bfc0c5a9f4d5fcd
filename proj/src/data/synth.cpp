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

#include "demandnet/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

namespace demandnet::data {
namespace {

// Independent RNG streams per series so that, e.g., switching the policy
// schedule never perturbs the base-process noise.
enum Stream : uint64_t {
  kProfileStream = 0,
  kNoiseStream = 1,
  kPolicyStream = 2,
  kCovariateStream = 3,
  kStreamsPerSeries = 4,
};

std::vector<double> policy_path(const SynthConfig& config, double stringency,
                                Rng& rng) {
  const auto length = static_cast<std::size_t>(config.length);
  const auto onset = static_cast<std::size_t>(config.shock_onset);
  std::vector<double> pi(length, 0.0);
  const PolicySchedule& schedule = config.policy_schedule;
  switch (schedule.kind) {
    case PolicyKind::kNone:
      break;
    case PolicyKind::kStep:
      for (std::size_t t = onset; t < length; ++t) pi[t] = schedule.level;
      break;
    case PolicyKind::kEpisodes: {
      const double top =
          *std::max_element(schedule.levels.begin(), schedule.levels.end());
      double level = std::clamp(top * stringency, 0.0, 1.0);
      std::size_t t = onset;
      while (t < length) {
        const double draw = -std::log(1.0 - rng.uniform()) * schedule.mean_dwell;
        const auto dwell =
            std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(draw)));
        for (std::size_t s = t; s < std::min(length, t + dwell); ++s) pi[s] = level;
        t += dwell;
        const double next = schedule.levels[rng.index(schedule.levels.size())];
        level = std::clamp(next * stringency, 0.0, 1.0);
      }
      break;
    }
  }
  return pi;
}

const char* kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kNone:
      return "none";
    case PolicyKind::kStep:
      return "step";
    case PolicyKind::kEpisodes:
      return "episodes";
  }
  return "episodes";
}

PolicyKind kind_from_name(const std::string& name) {
  if (name == "none") return PolicyKind::kNone;
  if (name == "step") return PolicyKind::kStep;
  if (name == "episodes") return PolicyKind::kEpisodes;
  throw ConfigError("unknown policy_schedule kind '" + name +
                    "' (expected none, step or episodes)");
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& keys,
                    const std::string& where) {
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (series_count < 1) throw InvalidArgument("series_count must be >= 1");
  if (length <= 0) throw InvalidArgument("length must be positive");
  if (noise_sd < 0.0) throw InvalidArgument("noise_sd must be >= 0");
  if (base_level <= 0.0) throw InvalidArgument("base_level must be positive");
  if (shock_onset < 0 || shock_onset > length) {
    throw InvalidArgument("shock_onset must lie in [0, length]");
  }
  if (suppression_depth < 0.0 || suppression_depth > 1.0) {
    throw InvalidArgument("suppression_depth must lie in [0, 1]");
  }
  if (suppression_exponent <= 0.0) {
    throw InvalidArgument("suppression_exponent must be positive");
  }
  if (depth_jitter < 0.0) throw InvalidArgument("depth_jitter must be >= 0");
  if (policy_schedule.level < 0.0 || policy_schedule.level > 1.0) {
    throw InvalidArgument("policy_schedule.level must lie in [0, 1]");
  }
  if (policy_schedule.mean_dwell < 1.0) {
    throw InvalidArgument("policy_schedule.mean_dwell must be >= 1");
  }
  if (policy_schedule.levels.empty()) {
    throw InvalidArgument("policy_schedule.levels must be non-empty");
  }
  for (const double l : policy_schedule.levels) {
    if (l < 0.0 || l > 1.0) {
      throw InvalidArgument("policy_schedule.levels must lie in [0, 1]");
    }
  }
  parse_date(start_date);
}

double suppression(double policy, double depth, double exponent) {
  return 1.0 - depth * std::pow(policy, exponent);
}

std::vector<SeriesBundle> synth_generate(const SynthConfig& config,
                                         uint64_t seed) {
  config.validate();
  const auto length = static_cast<std::size_t>(config.length);
  const auto onset = static_cast<std::size_t>(config.shock_onset);
  const int64_t start_day = parse_date(config.start_date);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<SeriesBundle> bundles;
  for (int k = 0; k < config.series_count; ++k) {
    const uint64_t base = static_cast<uint64_t>(k) * kStreamsPerSeries;
    Rng profile_rng(seed, base + kProfileStream);
    Rng noise_rng(seed, base + kNoiseStream);
    Rng policy_rng(seed, base + kPolicyStream);
    Rng cov_rng(seed, base + kCovariateStream);

    const double tourism_share = profile_rng.uniform();
    const double stringency = profile_rng.uniform(0.6, 1.0);
    const double population = std::exp(profile_rng.normal(15.0, 0.7));
    const double gdp = population * std::exp(profile_rng.normal(11.0, 0.15)) / 1e9;
    const double hospitals =
        std::round(population / 1e5 * profile_rng.uniform(1.0, 3.0));
    const double level = config.base_level * std::exp(profile_rng.normal(0.0, 0.25));
    const double trend = config.trend * profile_rng.uniform(0.5, 1.5);
    const double phase = profile_rng.uniform(0.0, 7.0);
    std::array<double, 7> weekly{};
    double peak = 0.0;
    for (int d = 0; d < 7; ++d) {
      weekly[d] = 0.7 * std::sin(two_pi * (d + phase) / 7.0) +
                  profile_rng.normal(0.0, 0.3);
      peak = std::max(peak, std::abs(weekly[d]));
    }
    for (double& w : weekly) w /= std::max(peak, 1e-12);
    const double depth = std::clamp(
        config.suppression_depth *
            (1.0 + config.depth_jitter * (tourism_share - 0.5)),
        0.0, 1.0);
    const double wave_phase = profile_rng.uniform(0.0, two_pi);

    const std::vector<double> pi = policy_path(config, stringency, policy_rng);

    SeriesBundle b;
    b.id = "S" + std::to_string(k + 1);
    b.start_day = start_day;
    b.covariate_names = {"log_cases", "mobility", "policy"};
    b.policy_index = 2;
    b.static_names = {"population", "gdp", "hospitals", "tourism_share",
                      "stringency"};
    b.static_values = {population, gdp, hospitals, tourism_share, stringency};
    b.target.resize(length);
    b.covariates.resize(static_cast<Eigen::Index>(length), 3);
    for (std::size_t t = 0; t < length; ++t) {
      const auto row = static_cast<Eigen::Index>(t);
      const double w = weekly[(t + static_cast<std::size_t>(start_day % 7)) % 7];
      const double base_value =
          level * (1.0 + trend * static_cast<double>(t) + config.season_amp * w) +
          noise_rng.normal(0.0, config.noise_sd * level);
      b.target[t] = base_value *
                    suppression(pi[t], depth, config.suppression_exponent);

      double cases = 0.0;
      const double cases_noise = cov_rng.normal(0.0, 0.15);
      if (t >= onset) {
        const double s = static_cast<double>(t - onset);
        cases = std::max(0.0, 4.0 * (1.0 - std::exp(-s / 25.0)) +
                                  0.6 * std::sin(two_pi * s / 70.0 + wave_phase) +
                                  cases_noise);
      }
      const double mobility =
          -0.35 * pi[t] + 0.05 * w + cov_rng.normal(0.0, 0.06);
      b.covariates(row, 0) = cases;
      b.covariates(row, 1) = mobility;
      b.covariates(row, 2) = pi[t];
    }
    b.validate();
    bundles.push_back(std::move(b));
  }
  return bundles;
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{
      {"series_count", c.series_count},
      {"length", c.length},
      {"base_level", c.base_level},
      {"season_amp", c.season_amp},
      {"trend", c.trend},
      {"noise_sd", c.noise_sd},
      {"shock_onset", c.shock_onset},
      {"policy_schedule",
       {{"kind", kind_name(c.policy_schedule.kind)},
        {"level", c.policy_schedule.level},
        {"mean_dwell", c.policy_schedule.mean_dwell},
        {"levels", c.policy_schedule.levels}}},
      {"suppression_exponent", c.suppression_exponent},
      {"suppression_depth", c.suppression_depth},
      {"depth_jitter", c.depth_jitter},
      {"start_date", c.start_date},
  };
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  if (!j.is_object()) throw ConfigError("synth config must be an object");
  reject_unknown(j,
                 {"series_count", "length", "base_level", "season_amp", "trend",
                  "noise_sd", "shock_onset", "policy_schedule",
                  "suppression_exponent", "suppression_depth", "depth_jitter",
                  "start_date"},
                 "synth config");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("series_count", c.series_count);
  get("length", c.length);
  get("base_level", c.base_level);
  get("season_amp", c.season_amp);
  get("trend", c.trend);
  get("noise_sd", c.noise_sd);
  get("shock_onset", c.shock_onset);
  get("suppression_exponent", c.suppression_exponent);
  get("suppression_depth", c.suppression_depth);
  get("depth_jitter", c.depth_jitter);
  get("start_date", c.start_date);
  if (j.contains("policy_schedule")) {
    const auto& p = j.at("policy_schedule");
    if (p.is_string()) {
      c.policy_schedule.kind = kind_from_name(p.get<std::string>());
    } else {
      reject_unknown(p, {"kind", "level", "mean_dwell", "levels"},
                     "policy_schedule");
      if (p.contains("kind")) {
        c.policy_schedule.kind = kind_from_name(p.at("kind").get<std::string>());
      }
      if (p.contains("level")) p.at("level").get_to(c.policy_schedule.level);
      if (p.contains("mean_dwell")) {
        p.at("mean_dwell").get_to(c.policy_schedule.mean_dwell);
      }
      if (p.contains("levels")) p.at("levels").get_to(c.policy_schedule.levels);
    }
  }
}

}  // namespace demandnet::data
