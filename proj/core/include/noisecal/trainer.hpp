#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisecal/calibrate.hpp"
#include "noisecal/classifier.hpp"
#include "noisecal/error.hpp"
#include "noisecal/model.hpp"
#include "noisecal/noisegen.hpp"
#include "noisecal/report.hpp"
#include "noisecal/rng.hpp"

/// Classifier training, progressive label correction, and the full
/// correction + calibration + resampling loop.
namespace noisecal::trainer {

struct Gradient {
  Matrix weights;
  Vector bias;
  double loss = 0.0;  // mean cross-entropy over the rows used
};

/// Mean softmax cross-entropy and its gradient over `rows` (all rows when
/// empty).
Gradient cross_entropy_gradient(const LinearClassifier& f, const Matrix& features, std::span<const int> labels,
                                std::span<const std::size_t> rows = {});

/// SGD with heavy-ball momentum: v <- mu v + g, theta <- theta - lr v.
struct SgdMomentum {
  double momentum = 0.9;
  Matrix velocity_w;
  Vector velocity_b;

  void step(LinearClassifier& f, const Gradient& g, double lr);
};

class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, LinearClassifier last_finite)
      : NumericError(what), last_finite_(std::move(last_finite)) {}
  const LinearClassifier& last_finite() const { return last_finite_; }

 private:
  LinearClassifier last_finite_;
};

/// One shuffled pass of mini-batch SGD. Returns the epoch-mean loss
/// (per-sample average of batch losses taken before each update).
double train_epoch(LinearClassifier& f, const LabeledSet& data, double lr, std::size_t batch_size,
                   SgdMomentum& optimizer, Rng& rng);

struct TauSchedule {
  double tau0 = 0.3;
  double decay = 0.05;
  double tau_min = 0.05;

  void validate() const;
};

/// max(tau_min, tau0 - decay * (t - t_w - 1)) for correction epoch t > t_w.
double tau_of(const TauSchedule& schedule, int t, int t_w);

/// Binary: relabel to 1{f >= 1/2} where |f - 1/2| > tau. Multi-class:
/// relabel to g = argmax f where f_g - f_y > tau. Returns how many labels
/// changed value.
std::size_t correct_labels(const LinearClassifier& f, const Matrix& features, std::vector<int>& labels, double tau);

struct FixpointResult {
  int rounds = 0;
  std::size_t corrected = 0;
  std::vector<std::size_t> per_round;
  bool cap_hit = false;
};

inline constexpr int kDefaultFixpointCap = 10;

/// Alternates correct_labels and train_epoch until a round corrects
/// nothing or `cap` rounds have run.
FixpointResult correction_fixpoint(LinearClassifier& f, LabeledSet& data, double tau, double lr,
                                   std::size_t batch_size, SgdMomentum& optimizer, Rng& rng,
                                   int cap = kDefaultFixpointCap);

struct TrainConfig {
  int t_max = 30;
  int t_w = 5;
  double lr_main = 0.01;
  double lr_sampled = 0.0001;
  std::size_t batch_size = 128;
  calibrate::CalibrationConfig calibration;
  TauSchedule schedule;
  std::uint64_t seed = 0;
  int fixpoint_cap = kDefaultFixpointCap;

  void validate() const;
};

/// Optional inputs used only for reporting.
struct EvaluationInputs {
  const noisegen::MixtureOracle* oracle = nullptr;
  const LabeledSet* validation = nullptr;  // noisy held-out split
  std::optional<double> generated_noise_rate;
};

struct RunResult {
  verify::RunReport report;
  LinearClassifier classifier;
};

/// Thrown when a sub-operation fails mid-run; carries the report up to the
/// last completed epoch.
class ExperimentFailed : public Error {
 public:
  ExperimentFailed(const std::string& what, verify::RunReport partial)
      : Error(what), partial_(std::move(partial)) {}
  const verify::RunReport& partial_report() const { return partial_; }

 private:
  verify::RunReport partial_;
};

/// Warm-up, then per epoch: correction to fixpoint, training on the
/// corrected labels, per-class refits, calibrated resampling, and training
/// on the sampled points. `train` holds features and noisy labels only;
/// `test` holds clean labels and is used for evaluation only.
RunResult run_experiment(const TrainConfig& config, const LabeledSet& train, const LabeledSet& test, int num_classes,
                         const EvaluationInputs& eval = {});

}  // namespace noisecal::trainer
