#include "noisecal/report.hpp"

#include <cstdio>
#include <ostream>

#include "noisecal/error.hpp"

namespace noisecal::verify {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  j[key] = value ? json(*value) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& value) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) value.reset();
  else value = it->template get<T>();
}

}  // namespace

void to_json(json& j, const PurityPoint& p) { j = json{{"tau", p.tau}, {"purity", p.purity}, {"empty", p.empty}}; }

void from_json(const json& j, PurityPoint& p) {
  j.at("tau").get_to(p.tau);
  j.at("purity").get_to(p.purity);
  j.at("empty").get_to(p.empty);
}

void to_json(json& j, const MeanErrors& m) {
  j = json{{"class", m.class_id},
           {"robust_l2", m.robust_l2},
           {"robust_l1", m.robust_l1},
           {"empirical_l2", m.empirical_l2},
           {"empirical_l1", m.empirical_l1}};
}

void from_json(const json& j, MeanErrors& m) {
  j.at("class").get_to(m.class_id);
  j.at("robust_l2").get_to(m.robust_l2);
  j.at("robust_l1").get_to(m.robust_l1);
  j.at("empirical_l2").get_to(m.empirical_l2);
  j.at("empirical_l1").get_to(m.empirical_l1);
}

void to_json(json& j, const EpochRecord& e) {
  j = json{{"epoch", e.epoch},
           {"tau", e.tau},
           {"corrected_count", e.corrected_count},
           {"fixpoint_rounds", e.fixpoint_rounds},
           {"cap_hit", e.cap_hit},
           {"train_loss", e.train_loss},
           {"sampled_loss", e.sampled_loss},
           {"sampled_count", e.sampled_count},
           {"skipped_classes", e.skipped_classes},
           {"purity_curve", e.purity_curve},
           {"min_pure_tau", e.min_pure_tau},
           {"bayes_agreement", e.bayes_agreement},
           {"test_accuracy", e.test_accuracy},
           {"mean_errors", e.mean_errors}};
  put_optional(j, "validation_accuracy", e.validation_accuracy);
  put_optional(j, "label_bayes_disagreement", e.label_bayes_disagreement);
}

void from_json(const json& j, EpochRecord& e) {
  j.at("epoch").get_to(e.epoch);
  j.at("tau").get_to(e.tau);
  j.at("corrected_count").get_to(e.corrected_count);
  j.at("fixpoint_rounds").get_to(e.fixpoint_rounds);
  j.at("cap_hit").get_to(e.cap_hit);
  j.at("train_loss").get_to(e.train_loss);
  j.at("sampled_loss").get_to(e.sampled_loss);
  j.at("sampled_count").get_to(e.sampled_count);
  j.at("skipped_classes").get_to(e.skipped_classes);
  j.at("purity_curve").get_to(e.purity_curve);
  j.at("min_pure_tau").get_to(e.min_pure_tau);
  j.at("bayes_agreement").get_to(e.bayes_agreement);
  j.at("test_accuracy").get_to(e.test_accuracy);
  j.at("mean_errors").get_to(e.mean_errors);
  get_optional(j, "validation_accuracy", e.validation_accuracy);
  get_optional(j, "label_bayes_disagreement", e.label_bayes_disagreement);
}

void to_json(json& j, const Summary& s) {
  j = json{{"final_agreement", s.final_agreement},
           {"final_accuracy", s.final_accuracy},
           {"final_min_pure_tau", s.final_min_pure_tau},
           {"total_corrections", s.total_corrections},
           {"cap_hits", s.cap_hits}};
  put_optional(j, "final_validation_accuracy", s.final_validation_accuracy);
}

void from_json(const json& j, Summary& s) {
  j.at("final_agreement").get_to(s.final_agreement);
  j.at("final_accuracy").get_to(s.final_accuracy);
  j.at("final_min_pure_tau").get_to(s.final_min_pure_tau);
  j.at("total_corrections").get_to(s.total_corrections);
  j.at("cap_hits").get_to(s.cap_hits);
  get_optional(j, "final_validation_accuracy", s.final_validation_accuracy);
}

void to_json(json& j, const RunReport& r) {
  j = json{{"method", r.method},   {"alpha", r.alpha}, {"lambda", r.lambda},     {"seed", r.seed},
           {"t_w", r.t_w},         {"t_max", r.t_max}, {"warmup", r.warmup},     {"epochs", r.epochs},
           {"summary", r.summary}, {"warnings", r.warnings}};
  put_optional(j, "achieved_noise_rate", r.achieved_noise_rate);
  put_optional(j, "failure", r.failure);
}

void from_json(const json& j, RunReport& r) {
  j.at("method").get_to(r.method);
  j.at("alpha").get_to(r.alpha);
  j.at("lambda").get_to(r.lambda);
  j.at("seed").get_to(r.seed);
  j.at("t_w").get_to(r.t_w);
  j.at("t_max").get_to(r.t_max);
  j.at("warmup").get_to(r.warmup);
  j.at("epochs").get_to(r.epochs);
  j.at("summary").get_to(r.summary);
  j.at("warnings").get_to(r.warnings);
  get_optional(j, "achieved_noise_rate", r.achieved_noise_rate);
  get_optional(j, "failure", r.failure);
}

std::string serialize(const RunReport& report) { return json(report).dump(2) + "\n"; }

RunReport parse_report(const std::string& text) {
  try {
    return json::parse(text).get<RunReport>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report JSON: ") + e.what());
  }
}

void write_purity_csv(std::ostream& out, const std::vector<PurityPoint>& curve) {
  out << "tau,purity,empty_flag\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", p.tau, p.purity, p.empty ? 1 : 0);
    out << buf;
  }
}

}  // namespace noisecal::verify
