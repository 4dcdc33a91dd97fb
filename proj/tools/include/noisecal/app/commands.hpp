#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noisecal/app/config.hpp"
#include "noisecal/noisegen.hpp"
#include "noisecal/robustmean.hpp"

namespace noisecal::app {

namespace fs = std::filesystem;

/// One generated split set. Features of every split come from the oracle;
/// the validation split is the tail of the noisy training draw.
struct GeneratedData {
  Matrix train_features;
  std::vector<int> train_clean;
  std::vector<int> train_noisy;
  Matrix val_features;
  std::vector<int> val_clean;
  std::vector<int> val_noisy;
  Matrix test_features;
  std::vector<int> test_labels;

  noisegen::ScaleResolution scale;
  /// Over the full generated noisy set, before the validation hold-out.
  double achieved_noise_rate = 0.0;
  double pmd_rate = 0.0;
  double train_noise_rate = 0.0;
  double validation_noise_rate = 0.0;

  LabeledSet training_view() const { return {train_features, train_noisy}; }
  LabeledSet validation_view() const { return {val_features, val_noisy}; }
  LabeledSet test_set() const { return {test_features, test_labels}; }
};

GeneratedData generate_data(const ExperimentConfig& config, const noisegen::MixtureOracle& oracle,
                            const NoiseConfig& noise, std::uint64_t seed);

nlohmann::json generation_metadata(const ExperimentConfig& config, const noisegen::MixtureOracle& oracle,
                                   const NoiseConfig& noise, const GeneratedData& data, std::uint64_t seed);

/// train.csv, val.csv, test.csv and metadata.json under `out_dir`.
void run_generate(const ExperimentConfig& config, std::uint64_t seed, const fs::path& out_dir);

struct EstimateResult {
  Vector robust_mean;
  Vector empirical_mean;
  Vector median;
};

EstimateResult estimate(const Matrix& points, const robustmean::Options& options);
nlohmann::json to_json(const EstimateResult& result);

/// models.json (mean, covariance, count per class) and sampled.csv.
void run_calibrate(const ExperimentConfig& config, const fs::path& data_csv, const fs::path& out_dir,
                   std::uint64_t seed);

/// Writes the report to `out_json` and the final purity curve next to it
/// (<stem>_purity.csv). Returns false when the run failed part way; the
/// partial report is still written.
bool run_train(const ExperimentConfig& config, const fs::path& data_csv, const fs::path& test_csv,
               const std::optional<fs::path>& val_csv, const fs::path& out_json);

struct SweepCell {
  std::string method;
  double alpha = 0.0;
  double lambda = 0.0;
  std::size_t noise_index = 0;
  std::string noise;
  std::uint64_t seed = 0;

  /// Path-safe identifier derived from the coordinates.
  std::string id() const;
};

std::vector<SweepCell> sweep_cells(const ExperimentConfig& config);

struct SweepSummary {
  std::size_t cells = 0;
  std::size_t failures = 0;
};

/// Runs every cell on a pool of `jobs` threads; writes cells/<id>.json,
/// aggregate.csv, aggregate_validation.csv and failures.csv.
SweepSummary run_sweep(const ExperimentConfig& config, const fs::path& out_dir, unsigned jobs);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string measured;
  std::string threshold;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Mutation switch: robust-mean checks run with damping forced off.
  bool disable_damping = false;
};

std::vector<CheckResult> verify_suite(const VerifyOptions& options);

void print_check_table(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace noisecal::app
