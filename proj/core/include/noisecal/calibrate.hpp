#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "noisecal/model.hpp"
#include "noisecal/numkit.hpp"
#include "noisecal/rng.hpp"

/// Per-class Gaussian refits (mean-based or covariance-based) and
/// resampling of calibrated training points.
namespace noisecal::calibrate {

using numkit::Matrix;
using numkit::Vector;

enum class Method { MeanBased, CovBased };

/// Covariance paired with the robust mean in the mean-based method.
enum class MeanCovariance { Weighted, Isotropic };

std::string to_string(Method method);
Method parse_method(const std::string& text);
std::string to_string(MeanCovariance mode);
MeanCovariance parse_mean_covariance(const std::string& text);

struct CalibrationConfig {
  Method method = Method::MeanBased;
  double alpha = 0.2;
  /// Sampled fraction; 0 disables calibration (correction-only loop).
  double lambda = 0.15;
  double c = 1.0;
  MeanCovariance mean_cov = MeanCovariance::Weighted;

  void validate() const;
};

/// Population (1/n) mean and covariance of one class.
GaussianClassModel fit_empirical(const Matrix& features, int class_id = 0);

/// Empirical fit with alpha added to every covariance entry.
GaussianClassModel fit_cov_based(const Matrix& features, double alpha, int class_id = 0);

/// Robust mean via agnostic_mean; covariance is the damping-weighted
/// second moment about that mean (normalised by the weight sum) or its
/// isotropic trace/d * I reduction.
GaussianClassModel fit_mean_based(const Matrix& features, double c, int class_id = 0,
                                  MeanCovariance mode = MeanCovariance::Weighted);

/// Dispatch on config.method.
GaussianClassModel fit_class(const Matrix& features, const CalibrationConfig& config, int class_id);

struct ClassFit {
  std::vector<GaussianClassModel> models;
  /// Classes with fewer than two rows; skipped for fitting and sampling.
  std::vector<int> skipped;
};

/// Groups rows by label and fits every class with at least two rows.
ClassFit fit_all(const LabeledSet& data, int num_classes, const CalibrationConfig& config);

/// Largest-remainder split of `total` proportional to `counts`.
std::vector<std::size_t> proportional_counts(const std::vector<std::size_t>& counts, std::size_t total);

/// round(lambda * n_total) points split across models in proportion to
/// their counts, each labelled with its generating class. Every class
/// draws from its own stream derived from one value of `rng`.
LabeledSet sample_calibrated(const std::vector<GaussianClassModel>& models, double lambda, std::size_t n_total,
                             Rng& rng);

}  // namespace noisecal::calibrate
