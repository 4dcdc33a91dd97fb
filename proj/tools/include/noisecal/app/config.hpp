#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noisecal/noisegen.hpp"
#include "noisecal/trainer.hpp"

namespace noisecal::app {

using numkit::Matrix;
using numkit::Vector;

struct ClassSpec {
  Vector mean;
  Matrix cov;
};

/// Either a simplex shorthand (k, d, separation) or explicit classes.
struct ScenarioConfig {
  int k = 2;
  int d = 8;
  std::size_t n = 10000;
  std::size_t n_test = 5000;
  double separation = 2.5;
  std::vector<double> priors;      // empty: uniform
  std::vector<ClassSpec> classes;  // empty: simplex shorthand
  double validation_fraction = 0.1;
};

/// Class-dependent transition overlaid on PMD noise. `kind` is
/// "symmetric", "asymmetric" or "matrix" (explicit rows).
struct ClassNoiseConfig {
  std::string kind = "symmetric";
  double epsilon = 0.0;
  std::vector<std::pair<int, int>> pairs;
  std::optional<Matrix> matrix;
};

struct NoiseConfig {
  noisegen::PmdType pmd_type = noisegen::PmdType::None;
  double target_level = 0.0;
  std::optional<double> scale_factor;
  std::optional<ClassNoiseConfig> class_matrix;
  std::optional<noisegen::PmdConstants> pmd_constants;
};

struct SweepConfig {
  /// mean_based, cov_based, correction_only, standard.
  std::vector<std::string> methods{"mean_based", "cov_based"};
  std::vector<double> alpha_grid{0.2};
  std::vector<double> lambda_grid{0.15};
  std::vector<std::uint64_t> seeds{0};
  /// Empty: the top-level noise block is the only noise setting.
  std::vector<NoiseConfig> noise_grid;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  NoiseConfig noise;
  trainer::TrainConfig train;
  SweepConfig sweep;
  std::string output_dir = "out";

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Parses and validates; unknown keys anywhere raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every field is written, so parse(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

noisegen::MixtureOracle build_oracle(const ScenarioConfig& scenario);

/// Resolved class transition matrix, if configured.
std::optional<Matrix> build_class_matrix(const NoiseConfig& noise, int k);

/// "I@0.35", "none", "II@0.7+sym0.2", ...
std::string noise_label(const NoiseConfig& noise);

/// Sweep method name -> training config for one cell.
trainer::TrainConfig cell_train_config(const trainer::TrainConfig& base, const std::string& method, double alpha,
                                       double lambda, std::uint64_t seed);

}  // namespace noisecal::app
