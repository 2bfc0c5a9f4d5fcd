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

#include <iostream>

#include "CLI11.hpp"
#include "demandnet/cli/commands.hpp"
#include "demandnet/cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DemandNet demand forecasting pipeline"};
  app.require_subcommand(1, 1);

  demandnet::cli::ConfigSources sources;
  std::string config_file;
  uint64_t seed = 0;
  std::string out_dir;
  bool print_config = false;

  for (const auto& name : demandnet::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "JSON run configuration");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory (overrides paths.out)");
    sub->add_option("--set", sources.overrides, "Override a config key: section.key=value")
        ->take_all();
    sub->add_flag("--print-config", print_config, "Print the resolved config and exit");
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  if (!config_file.empty()) sources.file = config_file;
  if (sub->count("--seed") > 0) sources.seed = seed;
  if (!out_dir.empty()) sources.out_dir = out_dir;

  try {
    const auto config = demandnet::cli::resolve_config(sources);
    if (print_config) {
      std::cout << demandnet::cli::effective_config_json(config);
      return 0;
    }
    for (const auto& path : demandnet::cli::run_command(sub->get_name(), config, std::cerr)) {
      std::cout << path << "\n";
    }
  } catch (const demandnet::PrerequisiteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const demandnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
