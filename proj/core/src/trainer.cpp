#include "noisecal/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "noisecal/robustmean.hpp"
#include "noisecal/verify.hpp"

namespace noisecal::trainer {

Gradient cross_entropy_gradient(const LinearClassifier& f, const Matrix& features, std::span<const int> labels,
                                std::span<const std::size_t> rows) {
  const int k = f.num_classes();
  if (features.cols() != f.dim()) throw NumericError("gradient: dimension mismatch");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw NumericError("gradient: label count mismatch");

  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(labels.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  if (rows.empty()) throw NumericError("gradient: empty batch");

  Gradient g{Matrix::Zero(k, f.dim()), Vector::Zero(k), 0.0};
  Vector z(k);
  for (std::size_t r : rows) {
    const auto i = static_cast<Eigen::Index>(r);
    const int y = labels[r];
    if (y < 0 || y >= k) throw NumericError("gradient: label out of range");
    z.noalias() = f.weights * features.row(i).transpose();
    z += f.bias;
    const double top = z.maxCoeff();
    Vector p = (z.array() - top).exp().matrix();
    const double sum = p.sum();
    g.loss += std::log(sum) + top - z(y);
    p /= sum;
    p(y) -= 1.0;
    g.weights.noalias() += p * features.row(i);
    g.bias += p;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  g.weights *= inv;
  g.bias *= inv;
  g.loss *= inv;
  return g;
}

void SgdMomentum::step(LinearClassifier& f, const Gradient& g, double lr) {
  if (velocity_w.size() == 0) {
    velocity_w = Matrix::Zero(f.weights.rows(), f.weights.cols());
    velocity_b = Vector::Zero(f.bias.size());
  }
  velocity_w = momentum * velocity_w + g.weights;
  velocity_b = momentum * velocity_b + g.bias;
  f.weights -= lr * velocity_w;
  f.bias -= lr * velocity_b;
}

double train_epoch(LinearClassifier& f, const LabeledSet& data, double lr, std::size_t batch_size,
                   SgdMomentum& optimizer, Rng& rng) {
  const std::size_t n = data.size();
  if (n == 0) throw NumericError("train_epoch: empty data");
  if (batch_size == 0) throw NumericError("train_epoch: batch_size must be positive");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  LinearClassifier last_finite = f;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    const std::span<const std::size_t> batch(order.data() + start, stop - start);
    const Gradient g = cross_entropy_gradient(f, data.features, data.labels, batch);
    if (!std::isfinite(g.loss) || !g.weights.allFinite() || !g.bias.allFinite()) {
      throw TrainingDiverged("diverged", last_finite);
    }
    total += g.loss * static_cast<double>(batch.size());
    last_finite = f;
    optimizer.step(f, g, lr);
    if (!f.finite()) throw TrainingDiverged("diverged", last_finite);
  }
  return total / static_cast<double>(n);
}

void TauSchedule::validate() const {
  if (!(tau0 > tau_min) || !(tau_min >= 0.0)) throw ConfigError("schedule: need tau0 > tau_min >= 0");
  if (!(decay > 0.0)) throw ConfigError("schedule: decay must be positive");
}

double tau_of(const TauSchedule& schedule, int t, int t_w) {
  return std::max(schedule.tau_min, schedule.tau0 - schedule.decay * static_cast<double>(t - t_w - 1));
}

std::size_t correct_labels(const LinearClassifier& f, const Matrix& features, std::vector<int>& labels, double tau) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw NumericError("correct_labels: size mismatch");
  const Matrix p = predict_proba(f, features);
  const int k = f.num_classes();
  std::size_t changed = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    int updated = labels[i];
    if (k == 2) {
      const double fx = p(row, 1);
      if (std::abs(fx - 0.5) > tau) updated = fx >= 0.5 ? 1 : 0;
    } else {
      Eigen::Index g = 0;
      p.row(row).maxCoeff(&g);
      if (p(row, g) - p(row, labels[i]) > tau) updated = static_cast<int>(g);
    }
    if (updated != labels[i]) {
      labels[i] = updated;
      ++changed;
    }
  }
  return changed;
}

FixpointResult correction_fixpoint(LinearClassifier& f, LabeledSet& data, double tau, double lr,
                                   std::size_t batch_size, SgdMomentum& optimizer, Rng& rng, int cap) {
  if (cap < 1) throw NumericError("correction_fixpoint: cap must be >= 1");
  FixpointResult out;
  while (out.rounds < cap) {
    ++out.rounds;
    const std::size_t changed = correct_labels(f, data.features, data.labels, tau);
    out.per_round.push_back(changed);
    out.corrected += changed;
    if (changed == 0) return out;
    train_epoch(f, data, lr, batch_size, optimizer, rng);
  }
  out.cap_hit = true;
  return out;
}

void TrainConfig::validate() const {
  if (t_w < 0 || t_max < t_w) throw ConfigError("train: need 0 <= t_w <= t_max");
  if (!(lr_main > 0.0) || !(lr_sampled > 0.0)) throw ConfigError("train: learning rates must be positive");
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (fixpoint_cap < 1) throw ConfigError("train: fixpoint_cap must be >= 1");
  calibration.validate();
  schedule.validate();
}

namespace {

std::string method_label(const TrainConfig& config) {
  if (config.t_max == config.t_w) return "standard";
  if (config.calibration.lambda == 0.0) return "correction_only";
  return calibrate::to_string(config.calibration.method);
}

Matrix rows_with_label(const LabeledSet& data, int label) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    if (data.labels[i] == label) idx.push_back(static_cast<Eigen::Index>(i));
  Matrix out(static_cast<Eigen::Index>(idx.size()), data.features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = data.features.row(idx[r]);
  return out;
}

class Evaluator {
 public:
  Evaluator(const LabeledSet& train, const LabeledSet& test, int k, const EvaluationInputs& inputs, double damping_c)
      : test_(test), k_(k), inputs_(inputs), damping_c_(damping_c) {
    if (inputs.oracle) {
      eval_ = verify::make_eval_set(*inputs.oracle, test.features);
      train_bayes_ = verify::make_eval_set(*inputs.oracle, train.features).bayes_labels;
    }
  }

  void fill(verify::EpochRecord& rec, const LinearClassifier& f, const LabeledSet& current) const {
    const std::vector<int> predicted = predict_labels(f, test_.features);
    rec.test_accuracy = verify::accuracy(predicted, test_.labels);
    if (inputs_.validation) {
      rec.validation_accuracy =
          verify::accuracy(predict_labels(f, inputs_.validation->features), inputs_.validation->labels);
    }
    if (!eval_) return;
    rec.purity_curve = verify::purity_curve(predicted, *eval_);
    rec.min_pure_tau = 0.5;
    for (const auto& p : rec.purity_curve) {
      if (!p.empty && p.purity >= 1.0) {
        rec.min_pure_tau = p.tau;
        break;
      }
    }
    rec.bayes_agreement = verify::bayes_agreement(predicted, *eval_);
    rec.label_bayes_disagreement = 1.0 - verify::accuracy(current.labels, train_bayes_);

    robustmean::Options options;
    options.c = damping_c_;
    for (int c = 0; c < k_; ++c) {
      const Matrix rows = rows_with_label(current, c);
      if (rows.rows() < 2) continue;
      const Vector& truth = inputs_.oracle->classes()[static_cast<std::size_t>(c)].mean;
      const verify::NormPair robust = verify::mean_error(robustmean::agnostic_mean(rows, options), truth);
      const verify::NormPair empirical = verify::mean_error(numkit::empirical_moments(rows).mean, truth);
      rec.mean_errors.push_back({c, robust.l2, robust.l1, empirical.l2, empirical.l1});
    }
  }

 private:
  const LabeledSet& test_;
  int k_;
  EvaluationInputs inputs_;
  double damping_c_;
  std::optional<verify::EvalSet> eval_;
  std::vector<int> train_bayes_;
};

}  // namespace

RunResult run_experiment(const TrainConfig& config, const LabeledSet& train, const LabeledSet& test, int num_classes,
                         const EvaluationInputs& eval) {
  config.validate();
  if (train.size() == 0) throw NumericError("run_experiment: empty training set");
  if (static_cast<std::size_t>(train.features.rows()) != train.size() ||
      static_cast<std::size_t>(test.features.rows()) != test.size())
    throw NumericError("run_experiment: row/label count mismatch");
  if (test.dim() != train.dim()) throw NumericError("run_experiment: train/test dimension mismatch");
  if (eval.oracle && (eval.oracle->num_classes() != num_classes || eval.oracle->dim() != train.dim()))
    throw NumericError("run_experiment: oracle does not match the data");

  verify::RunReport report;
  report.method = method_label(config);
  report.alpha = config.calibration.alpha;
  report.lambda = config.calibration.lambda;
  report.seed = config.seed;
  report.t_w = config.t_w;
  report.t_max = config.t_max;
  report.achieved_noise_rate = eval.generated_noise_rate;

  const Rng master(config.seed);
  Rng shuffle_rng = master.derive(1);
  Rng sample_rng = master.derive(2);
  Rng sampled_shuffle_rng = master.derive(3);

  LinearClassifier f = LinearClassifier::zeros(num_classes, train.dim());
  SgdMomentum main_opt;
  SgdMomentum sampled_opt;
  LabeledSet data = train;
  const Evaluator evaluator(train, test, num_classes, eval, config.calibration.c);

  try {
    double loss = 0.0;
    for (int e = 0; e < config.t_w; ++e) loss = train_epoch(f, data, config.lr_main, config.batch_size, main_opt, shuffle_rng);
    report.warmup.epoch = config.t_w;
    report.warmup.train_loss = loss;
    evaluator.fill(report.warmup, f, data);

    for (int t = config.t_w + 1; t <= config.t_max; ++t) {
      verify::EpochRecord rec;
      rec.epoch = t;
      rec.tau = tau_of(config.schedule, t, config.t_w);

      const FixpointResult fix = correction_fixpoint(f, data, rec.tau, config.lr_main, config.batch_size, main_opt,
                                                     shuffle_rng, config.fixpoint_cap);
      rec.corrected_count = fix.corrected;
      rec.fixpoint_rounds = fix.rounds;
      rec.cap_hit = fix.cap_hit;
      if (fix.cap_hit) report.warnings.push_back("epoch " + std::to_string(t) + ": correction fixpoint hit the round cap");

      rec.train_loss = train_epoch(f, data, config.lr_main, config.batch_size, main_opt, shuffle_rng);

      if (config.calibration.lambda > 0.0) {
        const calibrate::ClassFit fit = calibrate::fit_all(data, num_classes, config.calibration);
        rec.skipped_classes = fit.skipped;
        for (int c : fit.skipped) {
          report.warnings.push_back("epoch " + std::to_string(t) + ": class " + std::to_string(c) +
                                    " has fewer than 2 samples; skipped for calibration");
        }
        if (!fit.models.empty()) {
          const LabeledSet sampled =
              calibrate::sample_calibrated(fit.models, config.calibration.lambda, data.size(), sample_rng);
          rec.sampled_count = sampled.size();
          if (sampled.size() > 0) {
            rec.sampled_loss =
                train_epoch(f, sampled, config.lr_sampled, config.batch_size, sampled_opt, sampled_shuffle_rng);
          }
        }
      }

      evaluator.fill(rec, f, data);
      report.epochs.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    report.failure = e.what();
    throw ExperimentFailed(e.what(), std::move(report));
  }

  const verify::EpochRecord& last = report.epochs.empty() ? report.warmup : report.epochs.back();
  report.summary.final_agreement = last.bayes_agreement;
  report.summary.final_accuracy = last.test_accuracy;
  report.summary.final_validation_accuracy = last.validation_accuracy;
  report.summary.final_min_pure_tau = last.min_pure_tau;
  for (const auto& rec : report.epochs) {
    report.summary.total_corrections += rec.corrected_count;
    report.summary.cap_hits += rec.cap_hit ? 1 : 0;
  }
  return {std::move(report), std::move(f)};
}

}  // namespace noisecal::trainer
