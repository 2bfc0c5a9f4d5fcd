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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "demandnet/cli/commands.hpp"
#include "demandnet/cli/config.hpp"
#include "test_util.hpp"

namespace demandnet {
namespace {

namespace fs = std::filesystem;
using cli::ConfigSources;

TEST(Config, DefaultsRoundTripThroughJson) {
  const cli::RunConfig def;
  const auto j = cli::to_json(def);
  EXPECT_EQ(cli::to_json(cli::from_json(j)), j);
  const auto keys = cli::config_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "mc.kappa"), keys.end());
  EXPECT_NE(std::find(keys.begin(), keys.end(), "forecaster.train.learning_rate"), keys.end());
}

TEST(Config, PrecedenceDefaultsFileSetFlags) {
  testing::TempDir dir;
  const auto file = testing::write_text(
      dir, "c.json", R"({"seed": 3, "mc": {"kappa": 50}, "paths": {"out": "from_file"},
                        "forecaster": {"hidden": 16}})");
  ConfigSources s;
  s.file = file;
  auto c = cli::resolve_config(s);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.pipeline.kappa, 50);
  EXPECT_EQ(c.out_dir, "from_file");
  EXPECT_EQ(c.pipeline.forecaster_arch.hidden, 16);
  EXPECT_EQ(c.pipeline.forecaster_arch.layers, 2);

  s.overrides = {"mc.kappa=7", "seed=4", "paths.out=from_set", "data.horizons=[5,10]",
                 "forecaster.cell=gru"};
  c = cli::resolve_config(s);
  EXPECT_EQ(c.pipeline.kappa, 7);
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.out_dir, "from_set");
  EXPECT_EQ(c.horizons, (std::vector<int>{5, 10}));

  s.seed = 11;
  s.out_dir = "from_flag";
  c = cli::resolve_config(s);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.out_dir, "from_flag");
  EXPECT_EQ(c.resolved_checkpoint_dir(), "from_flag");
}

TEST(Config, UnknownKeysNameTheNearestKey) {
  EXPECT_EQ(cli::edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(cli::nearest_key("mc.kapa"), "mc.kappa");
  ConfigSources s;
  s.overrides = {"mc.kapa=3"};
  try {
    cli::resolve_config(s);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mc.kappa"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::from_json(nlohmann::json::parse(R"({"forecastr": {}})")), ConfigError);
  s.overrides = {"mc.kappa=\"many\""};
  EXPECT_THROW(cli::resolve_config(s), ConfigError);
  s.overrides = {"mc.kappa"};
  EXPECT_THROW(cli::resolve_config(s), ConfigError);
  s.overrides = {"evaluate.protocols=[\"split70\"]"};
  EXPECT_THROW(cli::resolve_config(s), ConfigError);
}

TEST(Config, NullThresholdMeansUnbounded) {
  ConfigSources s;
  s.overrides = {"features.threshold_fraction=null"};
  const auto c = cli::resolve_config(s);
  EXPECT_TRUE(std::isinf(c.pipeline.autoencoder.threshold_fraction));
  const auto again = cli::from_json(nlohmann::json::parse(cli::effective_config_json(c)));
  EXPECT_TRUE(std::isinf(again.pipeline.autoencoder.threshold_fraction));
}

TEST(Config, EffectiveConfigReplays) {
  ConfigSources s;
  s.overrides = {"mc.kappa=9", "synth.length=321", "synth.shock_onset=200"};
  const auto c = cli::resolve_config(s);
  testing::TempDir dir;
  ConfigSources replay;
  replay.file = testing::write_text(dir, "eff.json", cli::effective_config_json(c));
  EXPECT_EQ(cli::effective_config_json(cli::resolve_config(replay)),
            cli::effective_config_json(c));
}

TEST(Commands, PrerequisitesNameTheMissingStep) {
  testing::TempDir dir;
  ConfigSources s;
  s.out_dir = dir.str();
  const auto c = cli::resolve_config(s);
  std::ostringstream log;
  const std::map<std::string, std::string> expect = {
      {"evaluate", "train"}, {"forecast", "ingest"}, {"ingest", "synth"},
      {"train-effects", "ingest"}, {"select-features", "ingest"}};
  for (const auto& [command, needed] : expect) {
    try {
      cli::run_command(command, c, log);
      ADD_FAILURE() << command << " ran without prerequisites";
    } catch (const PrerequisiteError& e) {
      EXPECT_NE(std::string(e.what()).find("`" + needed + "`"), std::string::npos)
          << command << ": " << e.what();
    }
  }
  EXPECT_THROW(cli::run_command("predict", c, log), Error);
}

// Binary-level checks.

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null") {
  const std::string cmd = std::string(DEMANDNET_CLI) + " " + args + " >" + stdout_path +
                          " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

const char* kTiny =
    " --config " DEMANDNET_SMOKE_CONFIG
    " --set synth.series_count=4 synth.length=200 synth.shock_onset=120"
    " 'data.horizons=[5,10]' features.max_windows=100 features.train.epochs=1"
    " effects.train.epochs=2 forecaster.hidden=6 forecaster.train.epochs=1"
    " forecaster.train.samples_per_epoch=64 mc.kappa=5 mc.dropout_windows=2"
    " 'evaluate.methods=[\"demandnet-lstm\",\"seasonal-naive\"]'";

TEST(Binary, ExitCodes) {
  testing::TempDir dir;
  EXPECT_EQ(run_cli("train --out " + dir.str()), 3);
  EXPECT_EQ(run_cli("synth --out " + dir.str() + " --set mc.kapa=3"), 2);
  EXPECT_EQ(run_cli("synth --out " + dir.str() + " --set mc.kappa=0"), 2);
  EXPECT_NE(run_cli("bogus"), 0);
  const std::string printed = dir.file("printed.json");
  EXPECT_EQ(run_cli("synth --print-config --seed 5 --set mc.kappa=3", printed), 0);
  const auto j = nlohmann::json::parse(std::ifstream(printed));
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["mc"]["kappa"], 3);
}

TEST(Binary, PipelineArtifactsAreByteIdenticalOnRerun) {
  testing::TempDir dir;
  const std::vector<std::string> steps = {"synth", "ingest", "select-features", "train-effects",
                                          "effects-curve", "train", "forecast", "evaluate"};
  const std::string args = std::string(kTiny) + " 'evaluate.protocols=[\"split80\"]' --out " +
                           dir.str();
  for (const auto& step : steps) ASSERT_EQ(run_cli(step + args), 0) << step;
  const auto first = snapshot(dir.str());
  for (const char* name :
       {"synth.csv", "dataset.csv", "correlation_matrix.csv", "retained_features.txt",
        "autoencoder.ckpt", "encoded_features.csv", "effect_model.ckpt", "policy_polynomial.csv",
        "curve_policy.csv", "forecaster.ckpt", "train_history.csv", "forecast.csv",
        "forecast_raw.csv", "report_split80.csv", "report_split80_raw.csv",
        "report_split80.txt", "dropout_split80.csv", "evaluate.config.json"}) {
    EXPECT_TRUE(first.count(name)) << name;
  }
  const std::string& forecast = first.at("forecast.csv");
  EXPECT_EQ(forecast.substr(0, forecast.find('\n')),
            "series_id,step,mean,sd,var_vs_truth,p_used,kappa");
  EXPECT_EQ(forecast.find("\n\n"), std::string::npos);
  for (const auto& [name, bytes] : first) {
    if (name.ends_with(".csv")) {
      EXPECT_EQ(bytes.find("\n\n"), std::string::npos) << name;
    }
  }
  const std::string& report = first.at("report_split80.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "protocol,method,horizon,mae,rmse,sd,seeds");
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 5);

  for (const auto& step : steps) ASSERT_EQ(run_cli(step + args), 0) << step;
  const auto second = snapshot(dir.str());
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, bytes] : first) EXPECT_EQ(bytes, second.at(name)) << name;
}

}  // namespace
}  // namespace demandnet
