// Configured batch experiments: parse a JSON config, run one pipeline, write
// CSV/JSON artifacts and a manifest.

#ifndef CALDERON_EXPERIMENT_HPP
#define CALDERON_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "calderon/domain.hpp"
#include "calderon/elliptic.hpp"
#include "calderon/potential.hpp"

namespace calderon {

// Exit statuses of the runner.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitIdentity = 4,
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string location, const std::string& message)
      : std::runtime_error(location.empty() ? message : location + ": " + message),
        location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

enum class Pipeline { forward, reconstruct, verify_full, verify_partial, verify_onepoint, sweep };

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& name);

struct ExperimentConfig {
  nlohmann::json raw;  // the parsed document, echoed into the manifest

  Shape shape = Shape::square;
  int resolution = 64;
  int m = 2;
  Pipeline pipeline = Pipeline::forward;
  Pipeline base_pipeline = Pipeline::verify_full;  // for sweeps
  std::vector<int> resolutions{32, 64, 128};

  PotentialSpec potential;
  PotentialSpec potential2;  // second potential of the verify pipelines
  double lp_exponent = 1.0;
  SolverConfig solver;

  // forward
  std::string boundary_data = "x1";
  double amplitude = 1e-3;

  // reconstruct
  double xi_max = 4.0;
  double xi_spacing = 1.0;
  std::optional<double> fd_step;
  double support_fraction = 0.01;

  // verify-*
  std::string data = "calderon";  // "calderon" | "ones"
  Eigen::Vector2d xi{1.0, 0.0};
  std::array<double, 2> patch{0.0, std::numbers::pi / 2.0};
  nlohmann::json measure;
  std::optional<double> tolerance;

  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int threads = 1;
};

// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);
// Also reports JSON syntax errors with line and column.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> threads;
  double tolerance_scale = 1.0;
};

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json manifest;
  // Scalar figure of merit of the run: solution error or residual (forward),
  // relative L2 error (reconstruct), relative residual (verify-*).
  double metric = 0.0;
};

// Runs the configured pipeline, writing artifacts and manifest.json (or
// error.json) into the output directory. Does not throw for solver or
// identity failures; those are reported through exit_code.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Runs the base pipeline at each of config.resolutions and writes
// convergence.csv (resolution, error, order).
RunResult run_sweep(const ExperimentConfig& config, const RunOptions& options = {});

// log2 ratios of successive errors; "exact" when both are at rounding level.
std::vector<std::string> observed_orders(const std::vector<double>& errors);

}  // namespace calderon

#endif  // CALDERON_EXPERIMENT_HPP
