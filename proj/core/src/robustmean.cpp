#include "noisecal/robustmean.hpp"

#include <cmath>

#include "noisecal/error.hpp"

namespace noisecal::robustmean {

namespace {

bool all_identical(const Matrix& points) {
  for (Eigen::Index i = 1; i < points.rows(); ++i)
    if (points.row(i) != points.row(0)) return false;
  return true;
}

}  // namespace

DampingResult outlier_damping(const Matrix& points, const Options& options) {
  if (points.rows() == 0) throw NumericError("empty input");
  if (!(options.c > 0.0)) throw NumericError("outlier_damping: C must be positive");

  DampingResult out;
  out.median = numkit::coordinate_median(points);
  out.weights.assign(static_cast<std::size_t>(points.rows()), 1.0);

  const double trace = numkit::empirical_moments(points).cov.trace();
  if (trace <= 0.0 || all_identical(points)) return out;

  out.s_squared = options.c * trace;
  if (!options.damping) return out;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double dist2 = (points.row(i).transpose() - out.median).squaredNorm();
    out.weights[static_cast<std::size_t>(i)] = std::exp(-dist2 / out.s_squared);
  }
  return out;
}

SubspaceSplit split_projection(const Matrix& weighted_cov) {
  const Eigen::Index d = weighted_cov.rows();
  if (d < 2) throw NumericError("split_projection: need d >= 2");
  const numkit::EigenPair eig = numkit::sym_eig(weighted_cov);
  const Eigen::Index top = (d + 1) / 2;
  return {eig.vectors.leftCols(top), eig.vectors.rightCols(d - top)};
}

namespace {

Vector recurse(const Matrix& points, const Options& options, Result& trace, bool top_level) {
  const Eigen::Index d = points.cols();
  trace.dimensions.push_back(d);
  if (d == 1) {
    std::vector<double> column(points.data(), points.data() + points.rows());
    return Vector::Constant(1, numkit::median(column));
  }
  if (all_identical(points)) return points.row(0).transpose();

  DampingResult damping = outlier_damping(points, options);
  if (damping.s_squared == 0.0) return points.row(0).transpose();

  // Weighted covariance taken in the median-centred frame so the whole
  // estimator is translation-equivariant.
  const Matrix centred = points.rowwise() - damping.median.transpose();
  const numkit::Moments moments = numkit::weighted_moments(centred, damping.weights);
  const SubspaceSplit split = split_projection(numkit::symmetrized(moments.cov));

  const Matrix projected_v = points * split.v_basis;
  const Matrix projected_w = points * split.w_basis;
  Vector mean_w = Vector::Zero(projected_w.cols());
  if (options.weighted_complement) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < projected_w.rows(); ++i) {
      const double w = damping.weights[static_cast<std::size_t>(i)];
      mean_w.noalias() += w * projected_w.row(i).transpose();
      total += w;
    }
    mean_w /= total;
  } else {
    mean_w = projected_w.colwise().mean().transpose();
  }
  if (top_level) trace.top_damping = std::move(damping);
  const Vector mean_v = recurse(projected_v, options, trace, false);
  return split.v_basis * mean_v + split.w_basis * mean_w;
}

}  // namespace

Result agnostic_mean_traced(const Matrix& points, const Options& options) {
  if (points.rows() == 0) throw NumericError("empty input");
  if (points.cols() == 0) throw NumericError("agnostic_mean: dimension 0");
  if (!points.allFinite()) throw NumericError("agnostic_mean: non-finite input");
  Result out;
  out.mean = recurse(points, options, out, true);
  return out;
}

Vector agnostic_mean(const Matrix& points, const Options& options) {
  return agnostic_mean_traced(points, options).mean;
}

}  // namespace noisecal::robustmean
