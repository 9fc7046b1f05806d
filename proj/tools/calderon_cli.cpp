// Command-line front end: `calderon run <config>` and `calderon sweep <config>`.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "calderon/experiment.hpp"

namespace {

int execute(const std::string& path, bool sweep, const calderon::RunOptions& options) {
  calderon::ExperimentConfig config;
  try {
    config = calderon::load_config(path);
  } catch (const calderon::ConfigError& e) {
    nlohmann::json err = {{"error", "config"},
                          {"message", e.what()},
                          {"location", e.location()},
                          {"exit_code", calderon::kExitConfig}};
    std::cerr << err.dump(2) << '\n';
    return calderon::kExitConfig;
  }
  const calderon::RunResult result =
      sweep ? calderon::run_sweep(config, options) : calderon::run_experiment(config, options);

  const auto& m = result.manifest;
  if (m.contains("error"))
    std::cerr << m["error"].dump(2) << '\n';
  else
    std::cout << m["results"].dump(2) << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semilinear Calderon problem: forward solves, reconstruction, identity checks"};
  app.require_subcommand(1);

  std::string output_dir;
  int threads = 0;
  double tolerance_scale = 1.0;
  app.add_option("--output-dir", output_dir, "Directory for artifacts (overrides the config)");
  app.add_option("--threads", threads, "Worker threads for frequency sweeps")
      ->check(CLI::PositiveNumber);
  app.add_option("--tolerance-scale", tolerance_scale, "Multiplier on identity tolerances")
      ->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the pipeline named in the config");
  run->add_option("config", config_path, "JSON config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run the config's pipeline at several resolutions");
  sweep->add_option("config", config_path, "JSON config file")->required();
  // Global options are accepted after the subcommand as well.
  for (auto* sub : {run, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : calderon::kExitConfig;
  }

  calderon::RunOptions options;
  if (!output_dir.empty()) options.output_dir = output_dir;
  if (threads > 0) options.threads = threads;
  options.tolerance_scale = tolerance_scale;
  return execute(config_path, sweep->parsed(), options);
}
