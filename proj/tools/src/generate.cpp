#include <cmath>

#include <spdlog/spdlog.h>

#include "noisecal/app/commands.hpp"
#include "noisecal/calibrate.hpp"
#include "noisecal/csv.hpp"
#include "noisecal/error.hpp"

namespace noisecal::app {

using nlohmann::json;

namespace {

double mismatch_rate(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return 0.0;
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

GeneratedData generate_data(const ExperimentConfig& config, const noisegen::MixtureOracle& oracle,
                            const NoiseConfig& noise, std::uint64_t seed) {
  const Rng root(seed);
  Rng train_rng = root.derive(100);
  Rng noise_rng = root.derive(101);
  Rng test_rng = root.derive(102);

  const LabeledSet clean = oracle.sample(config.scenario.n, train_rng);

  noisegen::NoiseSpec spec;
  spec.pmd_type = noise.pmd_type;
  spec.target_level = noise.target_level;
  spec.class_matrix = build_class_matrix(noise, oracle.num_classes());
  spec.pmd_constants = noise.pmd_constants;

  GeneratedData out;
  if (noise.pmd_type != noisegen::PmdType::None) {
    if (noise.scale_factor) {
      out.scale.scale = *noise.scale_factor;
      out.scale.achieved = noisegen::mean_flip_probability(oracle, clean.features, clean.labels, noise.pmd_type,
                                                           *noise.scale_factor);
    } else {
      out.scale = noisegen::resolve_scale(oracle, clean.features, clean.labels, spec);
    }
    spec.scale_factor = out.scale.scale;
  }

  const noisegen::CorruptionResult corrupted = noisegen::corrupt(clean, oracle, spec, noise_rng);
  out.achieved_noise_rate = corrupted.empirical_rate;
  out.pmd_rate = corrupted.pmd_rate;

  const auto n = static_cast<Eigen::Index>(config.scenario.n);
  const auto n_val = static_cast<Eigen::Index>(std::llround(config.scenario.validation_fraction * static_cast<double>(n)));
  const Eigen::Index n_train = n - n_val;
  const auto clean_labels = corrupted.dataset.clean_labels();
  const auto noisy_labels = corrupted.dataset.noisy_labels();

  out.train_features = clean.features.topRows(n_train);
  out.train_clean.assign(clean_labels.begin(), clean_labels.begin() + n_train);
  out.train_noisy.assign(noisy_labels.begin(), noisy_labels.begin() + n_train);
  out.val_features = clean.features.bottomRows(n_val);
  out.val_clean.assign(clean_labels.begin() + n_train, clean_labels.end());
  out.val_noisy.assign(noisy_labels.begin() + n_train, noisy_labels.end());
  out.train_noise_rate = mismatch_rate(out.train_clean, out.train_noisy);
  out.validation_noise_rate = mismatch_rate(out.val_clean, out.val_noisy);

  const LabeledSet test = oracle.sample(config.scenario.n_test, test_rng);
  out.test_features = test.features;
  out.test_labels = test.labels;
  return out;
}

json generation_metadata(const ExperimentConfig& config, const noisegen::MixtureOracle& oracle,
                         const NoiseConfig& noise, const GeneratedData& data, std::uint64_t seed) {
  json classes = json::array();
  for (const auto& c : oracle.classes())
    classes.push_back({{"class_id", c.class_id}, {"mean", vector_json(c.mean)}, {"cov", matrix_json(c.cov)}});
  json meta;
  meta["seed"] = seed;
  meta["noise"] = noise_label(noise);
  meta["achieved_noise_rate"] = data.achieved_noise_rate;
  meta["pmd_rate"] = data.pmd_rate;
  meta["train_noise_rate"] = data.train_noise_rate;
  meta["validation_noise_rate"] = data.validation_noise_rate;
  if (noise.pmd_type != noisegen::PmdType::None) {
    meta["scale_factor"] = data.scale.scale;
    meta["expected_pmd_rate"] = data.scale.achieved;
    meta["max_achievable_pmd_rate"] = data.scale.max_achievable;
  } else {
    meta["scale_factor"] = nullptr;
    meta["expected_pmd_rate"] = nullptr;
    meta["max_achievable_pmd_rate"] = nullptr;
  }
  meta["sizes"] = {{"train", data.train_clean.size()}, {"validation", data.val_clean.size()},
                   {"test", data.test_labels.size()}};
  meta["oracle"] = {{"priors", oracle.priors()}, {"classes", classes}};
  meta["config"] = to_json(config);
  return meta;
}

void run_generate(const ExperimentConfig& config, std::uint64_t seed, const fs::path& out_dir) {
  const noisegen::MixtureOracle oracle = build_oracle(config.scenario);
  const GeneratedData data = generate_data(config, oracle, config.noise, seed);
  ensure_dir(out_dir);
  io::write_dataset_csv(out_dir / "train.csv", data.train_features, data.train_clean, data.train_noisy);
  io::write_dataset_csv(out_dir / "val.csv", data.val_features, data.val_clean, data.val_noisy);
  io::write_dataset_csv(out_dir / "test.csv", data.test_features, data.test_labels, data.test_labels);
  io::write_text(out_dir / "metadata.json",
                 generation_metadata(config, oracle, config.noise, data, seed).dump(2) + "\n");
  spdlog::info("generated {} train / {} val / {} test rows, noise rate {:.4f}", data.train_clean.size(),
               data.val_clean.size(), data.test_labels.size(), data.achieved_noise_rate);
}

EstimateResult estimate(const Matrix& points, const robustmean::Options& options) {
  return {robustmean::agnostic_mean(points, options), numkit::empirical_moments(points).mean,
          numkit::coordinate_median(points)};
}

json to_json(const EstimateResult& result) {
  return {{"robust_mean", vector_json(result.robust_mean)},
          {"empirical_mean", vector_json(result.empirical_mean)},
          {"median", vector_json(result.median)}};
}

void run_calibrate(const ExperimentConfig& config, const fs::path& data_csv, const fs::path& out_dir,
                   std::uint64_t seed) {
  const io::DatasetTable table = io::read_dataset_csv(data_csv);
  const LabeledSet data{table.features, table.noisy};
  const calibrate::CalibrationConfig& cal = config.train.calibration;
  const calibrate::ClassFit fit = calibrate::fit_all(data, config.scenario.k, cal);
  for (int c : fit.skipped) spdlog::warn("class {} has fewer than 2 rows; skipped", c);

  json models = json::array();
  for (const auto& m : fit.models)
    models.push_back({{"class_id", m.class_id}, {"count", m.count}, {"mean", vector_json(m.mean)},
                      {"cov", matrix_json(m.cov)}});
  const json doc = {{"method", calibrate::to_string(cal.method)},
                    {"alpha", cal.alpha},
                    {"lambda", cal.lambda},
                    {"C", cal.c},
                    {"mean_cov", calibrate::to_string(cal.mean_cov)},
                    {"skipped", fit.skipped},
                    {"models", models}};

  LabeledSet sampled{Matrix(0, data.dim()), {}};
  if (!fit.models.empty()) {
    Rng rng = Rng(seed).derive(2);
    sampled = calibrate::sample_calibrated(fit.models, cal.lambda, data.size(), rng);
  }
  ensure_dir(out_dir);
  io::write_text(out_dir / "models.json", doc.dump(2) + "\n");
  io::write_labeled_csv(out_dir / "sampled.csv", sampled);
  spdlog::info("fitted {} classes, sampled {} points", fit.models.size(), sampled.size());
}

}  // namespace noisecal::app
