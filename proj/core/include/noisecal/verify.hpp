#pragma once

#include <span>
#include <vector>

#include "noisecal/classifier.hpp"
#include "noisecal/noisegen.hpp"
#include "noisecal/numkit.hpp"
#include "noisecal/report.hpp"

/// Level-set purity, Bayes agreement, mean-error comparisons, and the
/// Gaussian generalization-bound evaluator.
namespace noisecal::verify {

using numkit::Matrix;
using numkit::Vector;

inline constexpr double kDefaultTauStep = 0.01;

/// Samples with their Bayes labels and posterior margins precomputed.
/// Binary margin is |eta_1 - 1/2|; multi-class uses the top-two gap.
struct EvalSet {
  Matrix features;
  std::vector<int> bayes_labels;
  std::vector<double> margins;
  int num_classes = 2;

  std::size_t size() const { return bayes_labels.size(); }
};

EvalSet make_eval_set(const noisegen::MixtureOracle& oracle, const Matrix& samples);

struct PurityResult {
  double purity = 1.0;
  bool empty = false;
  std::size_t members = 0;
};

/// Fraction of the level set {margin >= tau} on which the prediction
/// matches the Bayes label; 1.0 with empty = true on an empty set.
PurityResult level_set_purity(std::span<const int> predicted, const EvalSet& eval, double tau);
PurityResult level_set_purity(const trainer::LinearClassifier& f, const EvalSet& eval, double tau);
PurityResult level_set_purity(const trainer::LinearClassifier& f, const noisegen::MixtureOracle& oracle,
                              const Matrix& samples, double tau);

/// tau grid 0, step, 2 step, ... 0.5.
std::vector<double> tau_grid(double step = kDefaultTauStep);

std::vector<PurityPoint> purity_curve(std::span<const int> predicted, const EvalSet& eval,
                                      double step = kDefaultTauStep);

/// Smallest grid tau whose level set is nonempty with purity >= threshold;
/// 0.5 when none qualifies.
double min_pure_tau(std::span<const int> predicted, const EvalSet& eval, double threshold = 1.0,
                    double step = kDefaultTauStep);
double min_pure_tau(const trainer::LinearClassifier& f, const EvalSet& eval, double threshold = 1.0,
                    double step = kDefaultTauStep);

double bayes_agreement(std::span<const int> predicted, const EvalSet& eval);
double bayes_agreement(const trainer::LinearClassifier& f, const EvalSet& eval);

/// Fraction of rows where predicted == labels.
double accuracy(std::span<const int> predicted, std::span<const int> labels);

/// 4 kappa / (1 + kappa)^2 with kappa = ||S^-1||_2 ||S||_2.
double phi(const Matrix& sigma_bar);

/// sum_k sum_{k' != k} exp(-1/8 dmu^T S^-1 dmu * phi(S))
///   + C * sum_k ||mu_bar_k - mu_k||_1.
double generalization_bound(const std::vector<Vector>& empirical_means, const std::vector<Vector>& true_means,
                            const Matrix& sigma_bar, double c_bound);

struct NormPair {
  double l2 = 0.0;
  double l1 = 0.0;
};

NormPair mean_error(const Vector& estimate, const Vector& truth);

std::vector<MeanErrors> mean_error_report(const std::vector<Vector>& robust, const std::vector<Vector>& empirical,
                                          const std::vector<Vector>& truths);

/// Consistency and density constants for constructed scenarios.
struct TheoryParams {
  double beta = 1.0;
  double v = 0.0;
  double c_star = 1.0;
  double c_upper = 1.0;
  double xi = 0.5;

  double ell() const { return c_upper / c_star; }
  void validate() const;
};

/// 1 + xi v / (beta ell).
double lemma1_growth_factor(const TheoryParams& params);

/// Whether 1/2 - tau_new >= growth * (1/2 - tau).
bool lemma1_holds(const TheoryParams& params, double tau, double tau_new);

/// 1 - 3 xi c^* v.
double theorem1_lower_bound(const TheoryParams& params);

}  // namespace noisecal::verify
