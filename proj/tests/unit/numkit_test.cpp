#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "noisecal/error.hpp"
#include "noisecal/numkit.hpp"
#include "test_support.hpp"

namespace noisecal {
namespace {

using numkit::Matrix;
using numkit::Vector;
using testing::normal_matrix;
using testing::random_symmetric;

Matrix rows(std::initializer_list<std::initializer_list<double>> data) {
  Matrix m(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : data) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(CoordinateMedian, OddCountPerCoordinate) {
  const Vector m = numkit::coordinate_median(rows({{1, 5}, {2, 4}, {3, 3}}));
  EXPECT_EQ(m(0), 2.0);
  EXPECT_EQ(m(1), 4.0);
}

TEST(CoordinateMedian, Singleton) { EXPECT_EQ(numkit::coordinate_median(rows({{7.0}}))(0), 7.0); }

TEST(CoordinateMedian, EvenCountAveragesMiddlePair) {
  EXPECT_EQ(numkit::coordinate_median(rows({{1}, {3}}))(0), 2.0);
}

TEST(CoordinateMedian, EmptyInputThrows) {
  try {
    numkit::coordinate_median(Matrix(0, 3));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("empty input"), std::string::npos);
  }
}

TEST(CoordinateMedian, PermutationInvariantAndTranslationEquivariant) {
  Rng rng(11);
  const Matrix pts = normal_matrix(31, 4, rng);
  Matrix shuffled = pts;
  std::vector<Eigen::Index> order(31);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (Eigen::Index i = 0; i < 31; ++i) shuffled.row(i) = pts.row(order[static_cast<std::size_t>(i)]);
  EXPECT_EQ(numkit::coordinate_median(pts), numkit::coordinate_median(shuffled));

  Vector c(4);
  c << 3.0, -2.5, 100.0, 0.125;
  const Matrix moved = pts.rowwise() + c.transpose();
  EXPECT_LE((numkit::coordinate_median(moved) - numkit::coordinate_median(pts) - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedMoments, UniformWeightsMatchEmpiricalBitwise) {
  Rng rng(3);
  const Matrix pts = normal_matrix(50, 5, rng);
  const std::vector<double> ones(50, 1.0);
  const auto w = numkit::weighted_moments(pts, ones);
  const auto e = numkit::empirical_moments(pts);
  EXPECT_EQ(w.mean, e.mean);
  EXPECT_EQ(w.cov, e.cov);

  // Independent Eq. (7) oracle: plain loops.
  Vector mean = Vector::Zero(5);
  for (Eigen::Index i = 0; i < 50; ++i) mean += pts.row(i).transpose();
  mean /= 50.0;
  Matrix cov = Matrix::Zero(5, 5);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const Vector r = pts.row(i).transpose() - mean;
    cov += r * r.transpose();
  }
  cov /= 50.0;
  EXPECT_LE((e.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((e.cov - cov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedMoments, SinglePoint) {
  const std::vector<double> w{1.0};
  const auto m = numkit::weighted_moments(rows({{4, -1}}), w);
  EXPECT_EQ(m.mean, (Vector(2) << 4, -1).finished());
  EXPECT_TRUE(m.cov.isZero(0.0));
}

TEST(WeightedMoments, TwoPointsHandComputed) {
  // mean = x1 / 2 = (1, 2); cov = (x1 - mean)(x1 - mean)^T / 2.
  const std::vector<double> w{1.0, 0.0};
  const auto m = numkit::weighted_moments(rows({{2, 4}, {6, 8}}), w);
  EXPECT_EQ(m.mean, (Vector(2) << 1, 2).finished());
  const Matrix expected = (Matrix(2, 2) << 0.5, 1.0, 1.0, 2.0).finished();
  EXPECT_LE((m.cov - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WeightedMoments, RejectsBadWeights) {
  const Matrix pts = rows({{1}, {2}});
  const std::vector<double> short_w{1.0};
  const std::vector<double> negative{1.0, -0.5};
  EXPECT_THROW(numkit::weighted_moments(pts, short_w), NumericError);
  EXPECT_THROW(numkit::weighted_moments(pts, negative), NumericError);
}

void expect_eig_contract(const Matrix& a, const numkit::EigenPair& e) {
  const double fro = a.norm();
  for (Eigen::Index i = 0; i + 1 < e.values.size(); ++i) EXPECT_GE(e.values(i), e.values(i + 1));
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const Vector v = e.vectors.col(i);
    EXPECT_LE((a * v - e.values(i) * v).norm(), 1e-8 * std::max(fro, 1.0));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(v(arg), 0.0);
  }
  const Matrix gram = e.vectors.transpose() * e.vectors;
  EXPECT_LE((gram - Matrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff(), 1e-9);
  const Matrix recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LE((recon - a).norm(), 1e-7 * std::max(fro, 1e-300));
}

TEST(SymEig, Diagonal) {
  const Matrix a = Vector((Vector(2) << 3, 1).finished()).asDiagonal();
  const auto e = numkit::sym_eig(a);
  EXPECT_EQ(e.values(0), 3.0);
  EXPECT_EQ(e.values(1), 1.0);
  EXPECT_EQ(e.vectors, Matrix::Identity(2, 2));
}

TEST(SymEig, IdentityDegenerateSpectrum) {
  const Matrix a = Matrix::Identity(3, 3);
  const auto e = numkit::sym_eig(a);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values(i), 1.0, 1e-15);
  expect_eig_contract(a, e);
}

TEST(SymEig, TwoByTwoMatchesCharacteristicRoots) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = random_symmetric(2, rng);
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const auto e = numkit::sym_eig(a);
    EXPECT_NEAR(e.values(0), tr / 2.0 + disc, 1e-10);
    EXPECT_NEAR(e.values(1), tr / 2.0 - disc, 1e-10);
  }
}

TEST(SymEig, RandomSymmetricContract) {
  Rng rng(8);
  for (Eigen::Index d : {1, 3, 7, 16, 40}) {
    const Matrix a = random_symmetric(d, rng);
    expect_eig_contract(a, numkit::sym_eig(a));
  }
}

TEST(SymEig, RejectsAsymmetric) {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 2) = 0.5;
  EXPECT_THROW(numkit::sym_eig(a), NumericError);
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(numkit::spectral_norm(Matrix::Identity(4, 4)), 1.0, 1e-15);
  const Matrix a = Vector((Vector(2) << 3, -5).finished()).asDiagonal();
  EXPECT_NEAR(numkit::spectral_norm(a), 5.0, 1e-14);
}

TEST(SpectralNorm, MatchesPowerIterationOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = normal_matrix(3, 3, rng);
    const Matrix ata = a.transpose() * a;
    Vector v = Vector::Ones(3).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
      const Vector next = ata * v;
      lambda = next.norm();
      v = next / lambda;
    }
    EXPECT_NEAR(numkit::spectral_norm(a), std::sqrt(lambda), 1e-8);
  }
}

TEST(GaussianSample, ZeroCovarianceReturnsMean) {
  Rng rng(1);
  const Vector mean = (Vector(3) << 1, -2, 0.5).finished();
  const Matrix pts = numkit::gaussian_sample(mean, Matrix::Zero(3, 3), 25, rng);
  ASSERT_EQ(pts.rows(), 25);
  for (Eigen::Index i = 0; i < 25; ++i) EXPECT_EQ(Vector(pts.row(i).transpose()), mean);
}

TEST(GaussianSample, UnivariateMoments) {
  Rng rng(2);
  const Matrix pts = numkit::gaussian_sample(Vector::Zero(1), Matrix::Identity(1, 1), 100000, rng);
  const auto m = numkit::empirical_moments(pts);
  EXPECT_NEAR(m.mean(0), 0.0, 0.02);
  EXPECT_NEAR(m.cov(0, 0), 1.0, 0.03);
}

TEST(GaussianSample, BivariateCovariance) {
  Rng rng(4);
  const Matrix cov = (Matrix(2, 2) << 2, 1, 1, 2).finished();
  const Matrix pts = numkit::gaussian_sample(Vector::Zero(2), cov, 200000, rng);
  EXPECT_LE((numkit::empirical_moments(pts).cov - cov).cwiseAbs().maxCoeff(), 0.03);
}

TEST(GaussianSample, SemidefiniteCovarianceStaysOnItsSupport) {
  Rng rng(6);
  const Vector u = (Vector(2) << 1, 1).finished();
  const Matrix cov = u * u.transpose();
  const Matrix pts = numkit::gaussian_sample(Vector::Zero(2), cov, 1000, rng);
  EXPECT_TRUE(pts.allFinite());
  // Variance orthogonal to u is only the jitter.
  const Vector perp = (Vector(2) << 1, -1).finished() / std::sqrt(2.0);
  EXPECT_LT((pts * perp).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(GaussianSample, Reproducible) {
  Rng a(77);
  Rng b(77);
  const Matrix cov = testing::random_spd(4, a);
  testing::random_spd(4, b);
  EXPECT_EQ(numkit::gaussian_sample(Vector::Ones(4), cov, 300, a), numkit::gaussian_sample(Vector::Ones(4), cov, 300, b));
}

TEST(GaussianSample, RejectsIndefinite) {
  Rng rng(0);
  const Matrix cov = Vector((Vector(2) << 1, -0.1).finished()).asDiagonal();
  try {
    numkit::gaussian_sample(Vector::Zero(2), cov, 10, rng);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("not PSD"), std::string::npos);
  }
}

TEST(Covariance, PsdAndSymmetryPredicates) {
  Rng rng(9);
  EXPECT_TRUE(numkit::is_psd(testing::random_spd(5, rng)));
  EXPECT_FALSE(numkit::is_psd(-Matrix::Identity(2, 2)));
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = 1e-3;
  EXPECT_FALSE(numkit::is_symmetric(a));
  EXPECT_TRUE(numkit::is_symmetric(numkit::symmetrized(a)));
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(numkit::require_covariance(bad, "cov"), NumericError);
}

}  // namespace
}  // namespace noisecal
