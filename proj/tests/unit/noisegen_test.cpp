#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "noisecal/error.hpp"
#include "noisecal/noisegen.hpp"
#include "test_support.hpp"

namespace noisecal {
namespace {

using noisegen::MixtureOracle;
using noisegen::NoiseSpec;
using noisegen::PmdType;
using numkit::Matrix;
using numkit::Vector;

// Two unit-variance classes at -1 and +1 on the line.
MixtureOracle line_oracle(double mu0 = -1.0, double mu1 = 1.0, double var = 1.0) {
  std::vector<GaussianClassModel> classes{
      {0, Vector::Constant(1, mu0), Matrix::Constant(1, 1, var), 1},
      {1, Vector::Constant(1, mu1), Matrix::Constant(1, 1, var), 1},
  };
  return MixtureOracle(classes, {0.5, 0.5});
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

TEST(BayesPosterior, OverwhelmingLikelihood) {
  const MixtureOracle oracle = noisegen::simplex_oracle(3, 4, 20.0);
  const Vector p = noisegen::bayes_posterior(oracle, oracle.classes()[0].mean);
  EXPECT_NEAR(p(0), 1.0, 1e-6);
  EXPECT_NEAR(p(1), 0.0, 1e-6);
  EXPECT_NEAR(p(2), 0.0, 1e-6);
}

TEST(BayesPosterior, MidpointIsHalf) {
  const MixtureOracle oracle = noisegen::simplex_oracle(2, 5, 3.0);
  const Vector mid = (oracle.classes()[0].mean + oracle.classes()[1].mean) / 2.0;
  const Vector p = noisegen::bayes_posterior(oracle, mid);
  EXPECT_NEAR(p(0), 0.5, 1e-12);
  EXPECT_NEAR(p(1), 0.5, 1e-12);
}

TEST(BayesPosterior, MatchesClosedFormLogistic) {
  const double mu0 = -0.7, mu1 = 1.9, var = 1.6;
  const MixtureOracle oracle = line_oracle(mu0, mu1, var);
  for (double x = -6.0; x <= 6.0; x += 0.25) {
    const Vector p = noisegen::bayes_posterior(oracle, Vector::Constant(1, x));
    EXPECT_NEAR(p(1), logistic((mu1 - mu0) * (x - (mu0 + mu1) / 2.0) / var), 1e-10) << "x=" << x;
    EXPECT_NEAR(p.sum(), 1.0, 1e-10);
  }
}

TEST(BayesPosterior, ArgmaxInvariantToLogShift) {
  const MixtureOracle oracle = noisegen::simplex_oracle(4, 6, 2.0);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vector x = testing::normal_matrix(6, 1, rng);
    const Vector lj = oracle.log_joint(x);
    const Vector shifted = (lj.array() + 1234.5).matrix();
    Eigen::Index a = 0, b = 0;
    lj.maxCoeff(&a);
    shifted.maxCoeff(&b);
    EXPECT_EQ(a, b);
    Eigen::Index c = 0;
    oracle.posterior(x).maxCoeff(&c);
    EXPECT_EQ(a, c);
  }
}

TEST(MixtureOracle, RejectsBadPriors) {
  std::vector<GaussianClassModel> classes{testing::standard_normal(2, 0), testing::standard_normal(2, 1)};
  EXPECT_THROW(MixtureOracle(classes, {0.6, 0.6}), Error);
  EXPECT_THROW(noisegen::simplex_oracle(1, 3, 1.0), Error);
  EXPECT_THROW(noisegen::simplex_oracle(4, 3, 1.0), Error);
}

TEST(MixtureOracle, SimplexSeparation) {
  const MixtureOracle oracle = noisegen::simplex_oracle(4, 7, 2.5);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      EXPECT_NEAR((oracle.classes()[a].mean - oracle.classes()[b].mean).norm(), 2.5, 1e-12);
}

TEST(PmdRho, ReferenceValues) {
  EXPECT_DOUBLE_EQ(noisegen::pmd_rho(PmdType::TypeI, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(noisegen::pmd_rho(PmdType::TypeII, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(noisegen::pmd_rho(PmdType::TypeIII, 1.0), 0.0);
}

TEST(PmdRho, NonIncreasingInGap) {
  for (PmdType type : {PmdType::TypeI, PmdType::TypeII, PmdType::TypeIII}) {
    double prev = noisegen::pmd_rho(type, 0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double cur = noisegen::pmd_rho(type, i / 1000.0);
      EXPECT_LE(cur, prev);
      prev = cur;
    }
  }
}

TEST(FlipProbability, OnlyFromMostConfidentClassAndClamped) {
  const Vector post = (Vector(3) << 0.2, 0.5, 0.3).finished();
  EXPECT_EQ(noisegen::flip_probability(post, 0, PmdType::TypeI, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(noisegen::flip_probability(post, 1, PmdType::TypeI, 1.0), -0.5 * 0.2 * 0.2 + 0.5);
  EXPECT_EQ(noisegen::flip_probability(post, 1, PmdType::TypeI, 100.0), 1.0);
  const auto tt = noisegen::top_two(post);
  EXPECT_EQ(tt.first, 1);
  EXPECT_EQ(tt.second, 2);
}

TEST(PmdFlip, FlipsToSecondClassAndConsumesOneUniform) {
  const MixtureOracle oracle = noisegen::simplex_oracle(3, 3, 1.0);
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeI;
  spec.scale_factor = 100.0;  // saturated: always flips a top-class label
  const Vector x = oracle.classes()[2].mean;
  const auto tt = noisegen::top_two(oracle.posterior(x));
  ASSERT_EQ(tt.first, 2);
  Rng rng(4);
  Rng twin(4);
  EXPECT_EQ(noisegen::pmd_flip(oracle, x, 2, spec, rng), tt.second);
  twin.uniform();
  EXPECT_EQ(rng(), twin());
  // A label that is not the top class is left alone but still consumes a draw.
  EXPECT_EQ(noisegen::pmd_flip(oracle, x, 0, spec, rng), 0);
  twin.uniform();
  EXPECT_EQ(rng(), twin());
}

struct LineSample {
  MixtureOracle oracle = line_oracle();
  LabeledSet data;
};

LineSample line_sample(std::size_t n, std::uint64_t seed) {
  LineSample s;
  Rng rng(seed);
  s.data = s.oracle.sample(n, rng);
  return s;
}

TEST(ResolveScale, TargetZeroGivesZero) {
  const LineSample s = line_sample(2000, 1);
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeII;
  spec.target_level = 0.0;
  EXPECT_EQ(noisegen::resolve_scale(s.oracle, s.data.features, s.data.labels, spec).scale, 0.0);
}

TEST(ResolveScale, UnscaledMeanIsFixpoint) {
  const LineSample s = line_sample(3000, 2);
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeIII;
  spec.target_level = noisegen::mean_flip_probability(s.oracle, s.data.features, s.data.labels, PmdType::TypeIII, 1.0);
  const auto r = noisegen::resolve_scale(s.oracle, s.data.features, s.data.labels, spec);
  EXPECT_NEAR(r.scale, 1.0, 1e-9);
  EXPECT_NEAR(r.achieved, spec.target_level, 1e-12);
}

TEST(ResolveScale, MatchesGridSearchOracle) {
  const LineSample s = line_sample(4000, 3);
  // Independent evaluation through the closed-form logistic posterior.
  std::vector<double> gap(s.data.size());
  std::vector<bool> top(s.data.size());
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double eta1 = logistic(2.0 * s.data.features(static_cast<Eigen::Index>(i), 0));
    gap[i] = std::abs(2.0 * eta1 - 1.0);
    top[i] = (eta1 >= 0.5 ? 1 : 0) == s.data.labels[i];
  }
  auto level = [&](double scale) {
    double sum = 0.0;
    for (std::size_t i = 0; i < gap.size(); ++i)
      if (top[i]) sum += std::min(1.0, scale * (-0.5 * gap[i] * gap[i] + 0.5));
    return sum / static_cast<double>(gap.size());
  };
  double best = 0.0, best_err = 1.0;
  for (double scale = 0.0; scale <= 10.0; scale += 1e-4) {
    const double err = std::abs(level(scale) - 0.35);
    if (err < best_err) best_err = err, best = scale;
  }
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeI;
  spec.target_level = 0.35;
  const auto r = noisegen::resolve_scale(s.oracle, s.data.features, s.data.labels, spec);
  EXPECT_NEAR(r.scale, best, 1e-3);
  EXPECT_NEAR(r.achieved, 0.35, noisegen::kScaleTolerance);
}

TEST(ResolveScale, Errors) {
  const LineSample s = line_sample(1000, 4);
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeI;
  spec.target_level = 0.96;
  EXPECT_THROW(noisegen::resolve_scale(s.oracle, s.data.features, s.data.labels, spec), Error);
  spec.target_level = 0.93;  // above the share of top-class labels
  try {
    noisegen::resolve_scale(s.oracle, s.data.features, s.data.labels, spec);
    FAIL() << "expected unreachable target";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("max"), std::string::npos) << e.what();
  }
}

TEST(TransitionMatrix, SymmetricTenClasses) {
  const Matrix t = noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, 10, 0.3);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(t.row(i).sum(), 1.0, 1e-12);
    for (int j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(t(i, j), i == j ? 0.7 : 0.3 / 9.0);
  }
}

TEST(TransitionMatrix, ZeroEpsilonIsIdentity) {
  EXPECT_EQ(noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, 5, 0.0), Matrix::Identity(5, 5));
}

TEST(TransitionMatrix, AsymmetricPairs) {
  const std::vector<std::pair<int, int>> pairs{{0, 1}};
  const Matrix t = noisegen::class_transition_matrix(noisegen::TransitionKind::Asymmetric, 4, 0.3, pairs);
  Matrix expected = Matrix::Identity(4, 4);
  expected(0, 0) = 0.7;
  expected(0, 1) = 0.3;
  EXPECT_EQ(t, expected);
}

TEST(TransitionMatrix, Errors) {
  const std::vector<std::pair<int, int>> self{{2, 2}};
  EXPECT_THROW(noisegen::class_transition_matrix(noisegen::TransitionKind::Asymmetric, 4, 0.3, self), Error);
  EXPECT_THROW(noisegen::class_transition_matrix(noisegen::TransitionKind::Asymmetric, 4, 0.3), Error);
  EXPECT_THROW(noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, 4, 1.0), Error);
}

TEST(Corrupt, NoNoiseKeepsLabels) {
  const MixtureOracle oracle = noisegen::simplex_oracle(3, 4, 2.0);
  Rng rng(5);
  const LabeledSet clean = oracle.sample(500, rng);
  const auto r = noisegen::corrupt(clean, oracle, NoiseSpec{}, rng);
  EXPECT_EQ(std::vector<int>(r.dataset.noisy_labels().begin(), r.dataset.noisy_labels().end()), clean.labels);
  EXPECT_EQ(r.empirical_rate, 0.0);
}

TEST(Corrupt, SymmetricRate) {
  const MixtureOracle oracle = noisegen::simplex_oracle(2, 4, 2.0);
  Rng rng(6);
  const LabeledSet clean = oracle.sample(50000, rng);
  NoiseSpec spec;
  spec.class_matrix = noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, 2, 0.3);
  const auto r = noisegen::corrupt(clean, oracle, spec, rng);
  EXPECT_NEAR(r.empirical_rate, 0.30, 0.01);
  EXPECT_EQ(r.dataset.features(), clean.features);
  EXPECT_EQ(std::vector<int>(r.dataset.clean_labels().begin(), r.dataset.clean_labels().end()), clean.labels);
}

TEST(Corrupt, TypeIResolvedRate) {
  const MixtureOracle oracle = noisegen::simplex_oracle(2, 8, 2.5);
  Rng rng(7);
  const LabeledSet clean = oracle.sample(50000, rng);
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeI;
  spec.target_level = 0.35;
  spec.scale_factor = noisegen::resolve_scale(oracle, clean.features, clean.labels, spec).scale;
  const auto r = noisegen::corrupt(clean, oracle, spec, rng);
  EXPECT_NEAR(r.empirical_rate, 0.35, 0.015);
}

TEST(Corrupt, UnresolvedPmdScaleIsAnError) {
  const MixtureOracle oracle = noisegen::simplex_oracle(2, 2, 2.0);
  Rng rng(8);
  const LabeledSet clean = oracle.sample(10, rng);
  NoiseSpec spec;
  spec.pmd_type = PmdType::TypeII;
  spec.target_level = 0.2;
  EXPECT_THROW(noisegen::corrupt(clean, oracle, spec, rng), Error);
}

TEST(NoisyDataset, CorrectedMaskTracksDivergence) {
  noisegen::NoisyDataset ds(Matrix::Zero(3, 1), {0, 1, 1}, {0, 0, 1}, 2);
  EXPECT_DOUBLE_EQ(ds.noise_rate(), 1.0 / 3.0);
  ds.set_noisy_label(1, 1);
  EXPECT_TRUE(ds.corrected_mask()[1]);
  EXPECT_DOUBLE_EQ(ds.noise_rate(), 0.0);
  ds.set_noisy_label(1, 0);
  EXPECT_FALSE(ds.corrected_mask()[1]);
  EXPECT_THROW(ds.set_noisy_label(0, 2), Error);
  const LabeledSet view = ds.training_view();
  EXPECT_EQ(view.labels, (std::vector<int>{0, 0, 1}));
}

TEST(HuberMixture, PureWhenEpsilonZero) {
  Rng a(9);
  const auto h = noisegen::huber_mixture(testing::standard_normal(3), noisegen::point_mass(Vector::Ones(3)), 0.0, 400, a);
  EXPECT_EQ(h.outliers, 0u);
  for (bool in : h.inlier) EXPECT_TRUE(in);
}

TEST(HuberMixture, ExactOutlierCountAndMeanShift) {
  Rng rng(10);
  const Vector target = Vector::Constant(4, 10.0);
  const auto h = noisegen::huber_mixture(testing::standard_normal(4), noisegen::point_mass(target), 0.2, 1000, rng);
  EXPECT_EQ(h.outliers, 200u);
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < h.inlier.size(); ++i) {
    if (h.inlier[i]) continue;
    ++flagged;
    EXPECT_EQ(Vector(h.points.row(static_cast<Eigen::Index>(i)).transpose()), target);
  }
  EXPECT_EQ(flagged, 200u);
  const Vector mean = h.points.colwise().mean();
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(mean(j), 2.0, 0.15);
}

TEST(HuberMixture, RejectsHalfContamination) {
  Rng rng(11);
  EXPECT_THROW(noisegen::huber_mixture(testing::standard_normal(2), noisegen::point_mass(Vector::Zero(2)), 0.5, 10, rng),
               Error);
}

}  // namespace
}  // namespace noisecal
