#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "noisecal/rng.hpp"

/// Dense numerical primitives shared by every other module.
///
/// Point sets are stored as row-major samples: an n x d matrix whose rows
/// are the points. All routines sum in input order.
namespace noisecal::numkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kPsdTolerance = 1e-8;
inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Eigenvalues sorted descending, eigenvectors as orthonormal columns.
struct EigenPair {
  Vector values;
  Matrix vectors;
};

/// Component-wise median; even counts average the two middle values.
Vector coordinate_median(const Matrix& points);

/// Median of a 1-D sample (same even-count rule).
double median(std::span<const double> values);

/// Weighted first and second moments normalised by the point count n
/// (not by the weight sum):
///   mean = sum w_i x_i / n,  cov = sum w_i (x_i - mean)(x_i - mean)^T / n.
Moments weighted_moments(const Matrix& points, std::span<const double> weights);

/// Unweighted population moments (1/n normalisation).
Moments empirical_moments(const Matrix& points);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Each eigenvector's largest-magnitude component is made positive (first
/// index wins ties). Throws NumericError for asymmetric input or if the
/// sweep cap is reached before the off-diagonal norm drops below
/// kJacobiTolerance * ||A||_F.
EigenPair sym_eig(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// n draws from N(mean, cov), one per row.
///
/// Uses a Cholesky factor; a semidefinite covariance is retried once with
/// jitter 1e-8 * trace(cov) / d on the diagonal and, failing that, falls
/// back to the eigen square root with clamped eigenvalues. Throws
/// NumericError("not PSD") when an eigenvalue is below -kPsdTolerance.
Matrix gaussian_sample(const Vector& mean, const Matrix& cov, std::size_t n, Rng& rng);

/// Lower-triangular L with L L^T = cov (same jitter/fallback rules as
/// gaussian_sample; the fallback returns a non-triangular square root).
Matrix sqrt_factor(const Matrix& cov);

bool is_symmetric(const Matrix& a, double rel_tol = kSymmetryTolerance);

/// Symmetric and smallest eigenvalue >= -kPsdTolerance * max(1, ||A||_2).
bool is_psd(const Matrix& a);

/// (A + A^T) / 2.
Matrix symmetrized(const Matrix& a);

bool all_finite(const Matrix& a);

/// Throws NumericError unless `a` is a finite symmetric PSD matrix.
void require_covariance(const Matrix& a, const char* what);

}  // namespace noisecal::numkit
