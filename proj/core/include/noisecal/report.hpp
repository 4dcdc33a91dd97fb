#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace noisecal::verify {

struct PurityPoint {
  double tau = 0.0;
  double purity = 1.0;
  bool empty = false;
};

struct MeanErrors {
  int class_id = 0;
  double robust_l2 = 0.0;
  double robust_l1 = 0.0;
  double empirical_l2 = 0.0;
  double empirical_l1 = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double tau = 0.0;
  std::size_t corrected_count = 0;
  int fixpoint_rounds = 0;
  bool cap_hit = false;
  double train_loss = 0.0;
  double sampled_loss = 0.0;
  std::size_t sampled_count = 0;
  std::vector<int> skipped_classes;
  std::vector<PurityPoint> purity_curve;
  double min_pure_tau = 0.5;
  double bayes_agreement = 0.0;
  double test_accuracy = 0.0;
  std::optional<double> validation_accuracy;
  /// Fraction of current training labels that disagree with the Bayes label.
  std::optional<double> label_bayes_disagreement;
  std::vector<MeanErrors> mean_errors;
};

struct Summary {
  double final_agreement = 0.0;
  double final_accuracy = 0.0;
  std::optional<double> final_validation_accuracy;
  double final_min_pure_tau = 0.5;
  std::size_t total_corrections = 0;
  int cap_hits = 0;
};

struct RunReport {
  std::string method;
  double alpha = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int t_w = 0;
  int t_max = 0;
  std::optional<double> achieved_noise_rate;
  /// Metrics right after warm-up (epoch = t_w).
  EpochRecord warmup;
  std::vector<EpochRecord> epochs;
  Summary summary;
  std::vector<std::string> warnings;
  std::optional<std::string> failure;
};

void to_json(nlohmann::json& j, const PurityPoint& p);
void from_json(const nlohmann::json& j, PurityPoint& p);
void to_json(nlohmann::json& j, const MeanErrors& m);
void from_json(const nlohmann::json& j, MeanErrors& m);
void to_json(nlohmann::json& j, const EpochRecord& e);
void from_json(const nlohmann::json& j, EpochRecord& e);
void to_json(nlohmann::json& j, const Summary& s);
void from_json(const nlohmann::json& j, Summary& s);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

/// Pretty-printed JSON with a trailing newline; byte-stable for equal reports.
std::string serialize(const RunReport& report);
RunReport parse_report(const std::string& text);

/// `tau,purity,empty_flag` rows, one per grid point.
void write_purity_csv(std::ostream& out, const std::vector<PurityPoint>& curve);

}  // namespace noisecal::verify
