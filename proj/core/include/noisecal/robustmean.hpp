#pragma once

#include <vector>

#include "noisecal/numkit.hpp"

/// Recursive robust mean estimation (AgnosticMean): outlier damping about
/// the coordinate-wise median, then a split into top/bottom principal
/// subspaces of the damped covariance, recursing on the top half.
namespace noisecal::robustmean {

using numkit::Matrix;
using numkit::Vector;

struct DampingResult {
  std::vector<double> weights;
  Vector median;
  double s_squared = 0.0;  // zero only when all points coincide
};

struct SubspaceSplit {
  Matrix v_basis;  // d x ceil(d/2), top principal directions
  Matrix w_basis;  // d x floor(d/2)
};

struct Options {
  /// s^2 = C * trace(Sigma_S).
  double c = 1.0;
  /// When false every weight is forced to 1 (mutation/ablation switch).
  bool damping = true;
  /// Bottom-subspace mean: damping-weighted (normalised by the weight sum)
  /// when true, plain unweighted mean when false.
  bool weighted_complement = true;
};

/// w_i = exp(-||x_i - m||^2 / s^2) with m the coordinate-wise median and
/// s^2 = C * trace of the unweighted (1/n) covariance.
DampingResult outlier_damping(const Matrix& points, const Options& options = {});

SubspaceSplit split_projection(const Matrix& weighted_cov);

struct Result {
  Vector mean;
  /// Dimension at each recursion level, e.g. 16, 8, 4, 2, 1.
  std::vector<Eigen::Index> dimensions;
  /// Damping at the top level (empty when d == 1 or all points coincide).
  DampingResult top_damping;
};

Result agnostic_mean_traced(const Matrix& points, const Options& options = {});

Vector agnostic_mean(const Matrix& points, const Options& options = {});

}  // namespace noisecal::robustmean
