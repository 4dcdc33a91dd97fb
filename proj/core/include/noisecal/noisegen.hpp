#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "noisecal/model.hpp"
#include "noisecal/numkit.hpp"
#include "noisecal/rng.hpp"

/// Synthetic Gaussian-mixture data with analytic Bayes posteriors, PMD and
/// class-dependent label corruption, and Huber-contaminated point sets.
namespace noisecal::noisegen {

using numkit::Matrix;
using numkit::Vector;

/// Gaussian mixture with known class priors. Covariance factors are
/// computed once at construction, so posterior() is cheap.
class MixtureOracle {
 public:
  MixtureOracle(std::vector<GaussianClassModel> classes, std::vector<double> priors);

  int num_classes() const { return static_cast<int>(classes_.size()); }
  Eigen::Index dim() const { return classes_.front().dim(); }
  const std::vector<GaussianClassModel>& classes() const { return classes_; }
  const std::vector<double>& priors() const { return priors_; }

  /// log prior_c + log N(x | mu_c, Sigma_c) for every class.
  Vector log_joint(const Vector& x) const;

  /// Clean class posterior eta(x); sums to one.
  Vector posterior(const Vector& x) const;

  /// Labels drawn from the priors, features from the matching class.
  LabeledSet sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<GaussianClassModel> classes_;
  std::vector<double> priors_;
  std::vector<Matrix> chol_;  // lower factors, jittered if needed
  std::vector<double> log_norm_;
};

/// Classes at the vertices of a regular simplex with pairwise distance
/// `separation` and identity covariance. Requires 2 <= k <= d.
MixtureOracle simplex_oracle(int k, int d, double separation, std::vector<double> priors = {});

Vector bayes_posterior(const MixtureOracle& oracle, const Vector& x);

enum class PmdType { None, TypeI, TypeII, TypeIII };

std::string to_string(PmdType type);
PmdType parse_pmd_type(const std::string& text);

/// Optional Definition-style PMD bound constants; carried as metadata only.
struct PmdConstants {
  double t0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

struct NoiseSpec {
  PmdType pmd_type = PmdType::None;
  double target_level = 0.0;
  std::optional<double> scale_factor;
  std::optional<Matrix> class_matrix;
  std::optional<PmdConstants> pmd_constants;
};

/// Unscaled flip-probability curve as a function of the posterior gap
/// between the two most confident classes.
double pmd_rho(PmdType type, double gap);

struct TopTwo {
  int first = 0;
  int second = 0;
  double gap = 0.0;
};

/// Most and second most probable classes (lowest index wins ties).
TopTwo top_two(const Vector& posterior);

/// clamp(scale * rho(gap), 0, 1) when `label` is the most confident class,
/// zero otherwise.
double flip_probability(const Vector& posterior, int label, PmdType type, double scale);

/// One PMD draw. Always consumes exactly one uniform from `rng`.
int pmd_flip(const MixtureOracle& oracle, const Vector& x, int label, const NoiseSpec& spec, Rng& rng);

struct ScaleResolution {
  double scale = 0.0;
  double achieved = 0.0;
  double max_achievable = 0.0;
};

inline constexpr double kScaleTolerance = 0.005;

/// Bisects the multiplicative scale so that the mean clamped flip
/// probability over (features, labels) matches spec.target_level.
ScaleResolution resolve_scale(const MixtureOracle& oracle, const Matrix& features,
                              std::span<const int> labels, const NoiseSpec& spec);

/// Mean clamped flip probability at a given scale (the quantity bisected
/// by resolve_scale).
double mean_flip_probability(const MixtureOracle& oracle, const Matrix& features,
                             std::span<const int> labels, PmdType type, double scale);

enum class TransitionKind { Symmetric, Asymmetric };

/// Row-stochastic class-dependent transition matrix T_ij = P(noisy=j | y=i).
Matrix class_transition_matrix(TransitionKind kind, int k, double epsilon,
                               std::span<const std::pair<int, int>> pairs = {});

/// Features, clean labels (evaluation only), and mutable noisy labels.
class NoisyDataset {
 public:
  NoisyDataset(Matrix features, std::vector<int> clean_labels, std::vector<int> noisy_labels,
               int num_classes);

  const Matrix& features() const { return features_; }
  std::span<const int> clean_labels() const { return clean_; }
  std::span<const int> observed_labels() const { return observed_; }
  std::span<const int> noisy_labels() const { return noisy_; }
  const std::vector<bool>& corrected_mask() const { return corrected_; }
  int num_classes() const { return k_; }
  std::size_t size() const { return clean_.size(); }

  void set_noisy_label(std::size_t i, int label);
  void set_noisy_labels(std::span<const int> labels);

  /// Fraction of rows whose current noisy label differs from the clean one.
  double noise_rate() const;

  /// Features and current noisy labels only; what training code receives.
  LabeledSet training_view() const;

 private:
  Matrix features_;
  std::vector<int> clean_;
  std::vector<int> observed_;
  std::vector<int> noisy_;
  std::vector<bool> corrected_;
  int k_;
};

struct CorruptionResult {
  NoisyDataset dataset;
  double empirical_rate = 0.0;
  double pmd_rate = 0.0;
};

/// PMD flip first (when configured), then a class-matrix draw from the PMD
/// output label (when configured). Features and clean labels pass through
/// untouched.
CorruptionResult corrupt(const LabeledSet& clean, const MixtureOracle& oracle, const NoiseSpec& spec,
                         Rng& rng);

using OutlierSampler = std::function<Vector(Rng&)>;

OutlierSampler point_mass(Vector location);

struct HuberSample {
  Matrix points;
  std::vector<bool> inlier;
  std::size_t outliers = 0;
};

/// Exactly round(epsilon * n) outliers from `outliers`, the rest from
/// `inlier`; row order is shuffled.
HuberSample huber_mixture(const GaussianClassModel& inlier, const OutlierSampler& outliers,
                          double epsilon, std::size_t n, Rng& rng);

}  // namespace noisecal::noisegen
