#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "noisecal/error.hpp"
#include "noisecal/noisegen.hpp"
#include "noisecal/robustmean.hpp"
#include "test_support.hpp"

namespace noisecal {
namespace {

using numkit::Matrix;
using numkit::Vector;
using robustmean::Options;

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

TEST(OutlierDamping, WeightOneAtMedian) {
  const auto r = robustmean::outlier_damping(column({-1.0, 0.0, 4.0}));
  EXPECT_EQ(r.median(0), 0.0);
  EXPECT_EQ(r.weights[1], 1.0);
  EXPECT_LT(r.weights[0], 1.0);
  EXPECT_LT(r.weights[2], 1.0);
}

TEST(OutlierDamping, WeightInverseEAtSquaredDistanceS2) {
  // trace = 2a^2/3, so C = 1.5 gives s^2 = a^2.
  const double a = 2.0;
  Options opt;
  opt.c = 1.5;
  const auto r = robustmean::outlier_damping(column({-a, 0.0, a}), opt);
  EXPECT_DOUBLE_EQ(r.s_squared, a * a);
  EXPECT_NEAR(r.weights[0], std::exp(-1.0), 1e-15);
  EXPECT_NEAR(r.weights[2], 0.36787944117144233, 1e-15);
}

TEST(OutlierDamping, EquidistantPointsShareWeights) {
  Matrix pts(5, 2);
  pts << 0, 0, 3, 4, -3, -4, 4, -3, -4, 3;
  const auto r = robustmean::outlier_damping(pts);
  ASSERT_EQ(r.median, Vector::Zero(2));
  EXPECT_EQ(r.weights[1], r.weights[2]);
  EXPECT_EQ(r.weights[1], r.weights[3]);
  EXPECT_EQ(r.weights[1], r.weights[4]);
}

TEST(OutlierDamping, MatchesFormulaAndDecreasesWithDistance) {
  Rng rng(12);
  const Matrix pts = testing::normal_matrix(200, 5, rng);
  Options opt;
  opt.c = 0.7;
  const auto r = robustmean::outlier_damping(pts, opt);
  const Vector med = numkit::coordinate_median(pts);
  const double s2 = 0.7 * numkit::empirical_moments(pts).cov.trace();
  EXPECT_NEAR(r.s_squared, s2, 1e-12 * s2);
  std::vector<std::pair<double, double>> by_dist;
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double dist2 = (pts.row(i).transpose() - med).squaredNorm();
    EXPECT_NEAR(r.weights[static_cast<std::size_t>(i)], std::exp(-dist2 / s2), 1e-14);
    EXPECT_GT(r.weights[static_cast<std::size_t>(i)], 0.0);
    by_dist.emplace_back(dist2, r.weights[static_cast<std::size_t>(i)]);
  }
  std::sort(by_dist.begin(), by_dist.end());
  for (std::size_t i = 1; i < by_dist.size(); ++i)
    if (by_dist[i].first > by_dist[i - 1].first) EXPECT_LT(by_dist[i].second, by_dist[i - 1].second);
}

TEST(OutlierDamping, IdenticalPointsAllWeightOne) {
  const Matrix pts = Matrix::Constant(6, 3, 2.5);
  const auto r = robustmean::outlier_damping(pts);
  for (double w : r.weights) EXPECT_EQ(w, 1.0);
  EXPECT_EQ(r.s_squared, 0.0);
}

TEST(OutlierDamping, ForcedOffGivesUnitWeights) {
  Rng rng(1);
  Options opt;
  opt.damping = false;
  const auto r = robustmean::outlier_damping(testing::normal_matrix(20, 3, rng), opt);
  for (double w : r.weights) EXPECT_EQ(w, 1.0);
}

TEST(SplitProjection, Examples) {
  const Matrix a = Vector((Vector(4) << 4, 3, 2, 1).finished()).asDiagonal();
  const auto s = robustmean::split_projection(a);
  ASSERT_EQ(s.v_basis.cols(), 2);
  ASSERT_EQ(s.w_basis.cols(), 2);
  EXPECT_EQ(s.v_basis, Matrix::Identity(4, 4).leftCols(2));
  EXPECT_EQ(s.w_basis, Matrix::Identity(4, 4).rightCols(2));

  const Matrix b = Vector((Vector(2) << 2, 1).finished()).asDiagonal();
  const auto s2 = robustmean::split_projection(b);
  EXPECT_EQ(Vector(s2.v_basis.col(0)), Vector::Unit(2, 0));
  EXPECT_EQ(Vector(s2.w_basis.col(0)), Vector::Unit(2, 1));

  Rng rng(2);
  const auto s3 = robustmean::split_projection(testing::random_spd(3, rng));
  EXPECT_EQ(s3.v_basis.cols(), 2);
  EXPECT_EQ(s3.w_basis.cols(), 1);
}

TEST(SplitProjection, OrthonormalCompleteBasis) {
  Rng rng(3);
  const auto s = robustmean::split_projection(testing::random_spd(9, rng));
  Matrix full(9, 9);
  full << s.v_basis, s.w_basis;
  EXPECT_LE((full.transpose() * full - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(robustmean::split_projection(Matrix::Identity(1, 1)), NumericError);
}

TEST(AgnosticMean, OneDimensionalMedian) {
  EXPECT_EQ(robustmean::agnostic_mean(column({1, 2, 3, 100}))(0), 2.5);
}

TEST(AgnosticMean, BaseCaseIsExactMedian) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix pts = testing::normal_matrix(11 + trial, 1, rng);
    std::vector<double> v(pts.data(), pts.data() + pts.rows());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
    EXPECT_EQ(robustmean::agnostic_mean(pts)(0), med);
  }
}

TEST(AgnosticMean, IdenticalPointsReturnThatPoint) {
  const Matrix pts = Matrix::Constant(10, 4, -1.25);
  EXPECT_EQ(robustmean::agnostic_mean(pts), Vector::Constant(4, -1.25));
}

TEST(AgnosticMean, Errors) {
  EXPECT_THROW(robustmean::agnostic_mean(Matrix(0, 3)), NumericError);
  EXPECT_THROW(robustmean::agnostic_mean(Matrix(5, 0)), NumericError);
}

TEST(AgnosticMean, CleanGaussianCloseToEmpiricalMean) {
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    Vector mu = testing::normal_matrix(8, 1, rng);
    const Matrix pts = numkit::gaussian_sample(mu, Matrix::Identity(8, 8), 5000, rng);
    errors.push_back((robustmean::agnostic_mean(pts) - numkit::empirical_moments(pts).mean).norm());
  }
  std::sort(errors.begin(), errors.end());
  EXPECT_LE(errors[static_cast<std::size_t>(std::ceil(0.95 * 50)) - 1], 0.15);
}

TEST(AgnosticMean, BeatsEmpiricalMeanUnderPointMassContamination) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const GaussianClassModel inlier = testing::standard_normal(16);
    const Vector outlier = Vector::Unit(16, 0) * 10.0;
    const auto h = noisegen::huber_mixture(inlier, noisegen::point_mass(outlier), 0.2, 2000, rng);
    const double robust = robustmean::agnostic_mean(h.points).norm();
    const double empirical = numkit::empirical_moments(h.points).mean.norm();
    wins += robust < empirical ? 1 : 0;
  }
  EXPECT_GE(wins, 95);
}

TEST(AgnosticMean, TranslationEquivariant) {
  Rng rng(5);
  for (Eigen::Index d : {2, 3, 8, 16}) {
    const Matrix pts = testing::normal_matrix(300, d, rng);
    const Vector c = testing::normal_matrix(d, 1, rng) * 50.0;
    const Matrix moved = pts.rowwise() + c.transpose();
    EXPECT_LE((robustmean::agnostic_mean(moved) - robustmean::agnostic_mean(pts) - c).norm(), 1e-8) << "d=" << d;
  }
}

TEST(AgnosticMean, PermutationInvariant) {
  Rng rng(6);
  const Matrix pts = testing::normal_matrix(400, 8, rng);
  std::vector<Eigen::Index> order(400);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix shuffled(400, 8);
  for (Eigen::Index i = 0; i < 400; ++i) shuffled.row(i) = pts.row(order[static_cast<std::size_t>(i)]);
  EXPECT_LE((robustmean::agnostic_mean(pts) - robustmean::agnostic_mean(shuffled)).norm(), 1e-12);
}

TEST(AgnosticMean, DimensionSequenceHalvesWithCeiling) {
  Rng rng(7);
  const auto r16 = robustmean::agnostic_mean_traced(testing::normal_matrix(100, 16, rng));
  EXPECT_EQ(r16.dimensions, (std::vector<Eigen::Index>{16, 8, 4, 2, 1}));
  const auto r5 = robustmean::agnostic_mean_traced(testing::normal_matrix(100, 5, rng));
  EXPECT_EQ(r5.dimensions, (std::vector<Eigen::Index>{5, 3, 2, 1}));
  for (Eigen::Index d : {2, 3, 7, 9, 33}) {
    const auto r = robustmean::agnostic_mean_traced(testing::normal_matrix(80, d, rng));
    EXPECT_EQ(r.dimensions.size(), static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(d)))) + 1);
  }
}

TEST(AgnosticMean, UndampedConvergesToEmpiricalMean) {
  Rng rng(8);
  const Matrix pts = numkit::gaussian_sample(Vector::Ones(4), Matrix::Identity(4, 4), 100000, rng);
  Options opt;
  opt.damping = false;
  EXPECT_LE((robustmean::agnostic_mean(pts, opt) - numkit::empirical_moments(pts).mean).norm(), 0.05);
}

TEST(AgnosticMean, LiteralComplementMeanAgreesWhenUndamped) {
  Rng rng(9);
  const Matrix pts = testing::normal_matrix(500, 6, rng);
  Options weighted;
  weighted.damping = false;
  Options literal = weighted;
  literal.weighted_complement = false;
  EXPECT_LE((robustmean::agnostic_mean(pts, weighted) - robustmean::agnostic_mean(pts, literal)).norm(), 1e-12);
}

TEST(AgnosticMean, LiteralComplementMeanIsStillTranslationEquivariant) {
  Rng rng(10);
  Options literal;
  literal.weighted_complement = false;
  const Matrix pts = testing::normal_matrix(300, 8, rng);
  const Vector c = Vector::Constant(8, -7.5);
  const Matrix moved = pts.rowwise() + c.transpose();
  EXPECT_LE((robustmean::agnostic_mean(moved, literal) - robustmean::agnostic_mean(pts, literal) - c).norm(), 1e-8);
}

}  // namespace
}  // namespace noisecal
