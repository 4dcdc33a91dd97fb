#include "noisecal/verify.hpp"

#include <cmath>
#include <string>

#include "noisecal/error.hpp"

namespace noisecal::verify {

EvalSet make_eval_set(const noisegen::MixtureOracle& oracle, const Matrix& samples) {
  EvalSet out;
  out.features = samples;
  out.num_classes = oracle.num_classes();
  out.bayes_labels.reserve(static_cast<std::size_t>(samples.rows()));
  out.margins.reserve(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Vector post = oracle.posterior(samples.row(i).transpose());
    if (out.num_classes == 2) {
      out.bayes_labels.push_back(post(1) >= 0.5 ? 1 : 0);
      out.margins.push_back(std::abs(post(1) - 0.5));
    } else {
      const noisegen::TopTwo top = noisegen::top_two(post);
      out.bayes_labels.push_back(top.first);
      out.margins.push_back(top.gap);
    }
  }
  return out;
}

PurityResult level_set_purity(std::span<const int> predicted, const EvalSet& eval, double tau) {
  if (predicted.size() != eval.size()) throw NumericError("level_set_purity: size mismatch");
  std::size_t members = 0;
  std::size_t pure = 0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (eval.margins[i] < tau) continue;
    ++members;
    pure += predicted[i] == eval.bayes_labels[i];
  }
  if (members == 0) return {1.0, true, 0};
  return {static_cast<double>(pure) / static_cast<double>(members), false, members};
}

PurityResult level_set_purity(const trainer::LinearClassifier& f, const EvalSet& eval, double tau) {
  const std::vector<int> predicted = trainer::predict_labels(f, eval.features);
  return level_set_purity(predicted, eval, tau);
}

PurityResult level_set_purity(const trainer::LinearClassifier& f, const noisegen::MixtureOracle& oracle,
                              const Matrix& samples, double tau) {
  return level_set_purity(f, make_eval_set(oracle, samples), tau);
}

std::vector<double> tau_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw NumericError("tau grid step must lie in (0, 0.5]");
  const auto count = static_cast<int>(std::floor(0.5 / step + 1e-9));
  std::vector<double> grid;
  for (int j = 0; j <= count; ++j) grid.push_back(static_cast<double>(j) * step);
  return grid;
}

std::vector<PurityPoint> purity_curve(std::span<const int> predicted, const EvalSet& eval, double step) {
  std::vector<PurityPoint> curve;
  for (double tau : tau_grid(step)) {
    const PurityResult r = level_set_purity(predicted, eval, tau);
    curve.push_back({tau, r.purity, r.empty});
  }
  return curve;
}

double min_pure_tau(std::span<const int> predicted, const EvalSet& eval, double threshold, double step) {
  for (double tau : tau_grid(step)) {
    const PurityResult r = level_set_purity(predicted, eval, tau);
    if (!r.empty && r.purity >= threshold) return tau;
  }
  return 0.5;
}

double min_pure_tau(const trainer::LinearClassifier& f, const EvalSet& eval, double threshold, double step) {
  const std::vector<int> predicted = trainer::predict_labels(f, eval.features);
  return min_pure_tau(predicted, eval, threshold, step);
}

double bayes_agreement(std::span<const int> predicted, const EvalSet& eval) {
  return accuracy(predicted, eval.bayes_labels);
}

double bayes_agreement(const trainer::LinearClassifier& f, const EvalSet& eval) {
  const std::vector<int> predicted = trainer::predict_labels(f, eval.features);
  return bayes_agreement(predicted, eval);
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw NumericError("accuracy: size mismatch");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

namespace {

Matrix inverse_or_throw(const Matrix& sigma) {
  const Eigen::Index d = sigma.rows();
  if (sigma.cols() != d || d == 0) throw NumericError("generalization_bound: sigma must be square");
  const Matrix sym = numkit::symmetrized(sigma);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.solve(Matrix::Identity(d, d));
  const double trace = sym.trace();
  const double jitter = trace > 0.0 ? 1e-8 * trace / static_cast<double>(d) : 1e-8;
  llt.compute(sym + jitter * Matrix::Identity(d, d));
  if (llt.info() != Eigen::Success) throw NumericError("generalization_bound: singular covariance after jitter");
  return llt.solve(Matrix::Identity(d, d));
}

double phi_from(const Matrix& sigma, const Matrix& inverse) {
  const double kappa = numkit::spectral_norm(inverse) * numkit::spectral_norm(sigma);
  return 4.0 * kappa / ((1.0 + kappa) * (1.0 + kappa));
}

}  // namespace

double phi(const Matrix& sigma_bar) { return phi_from(sigma_bar, inverse_or_throw(sigma_bar)); }

double generalization_bound(const std::vector<Vector>& empirical_means, const std::vector<Vector>& true_means,
                            const Matrix& sigma_bar, double c_bound) {
  const std::size_t k = empirical_means.size();
  if (k < 2) throw NumericError("generalization_bound: need k >= 2 classes");
  if (true_means.size() != k) throw NumericError("generalization_bound: class count mismatch");
  const Matrix inverse = inverse_or_throw(sigma_bar);
  const double ph = phi_from(sigma_bar, inverse);

  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const Vector diff = empirical_means[a] - empirical_means[b];
      total += std::exp(-0.125 * diff.dot(inverse * diff) * ph);
    }
  }
  double l1 = 0.0;
  for (std::size_t a = 0; a < k; ++a) l1 += (empirical_means[a] - true_means[a]).lpNorm<1>();
  return total + c_bound * l1;
}

NormPair mean_error(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size()) throw NumericError("mean_error: dimension mismatch");
  const Vector diff = estimate - truth;
  return {diff.norm(), diff.lpNorm<1>()};
}

std::vector<MeanErrors> mean_error_report(const std::vector<Vector>& robust, const std::vector<Vector>& empirical,
                                          const std::vector<Vector>& truths) {
  if (robust.size() != truths.size() || empirical.size() != truths.size())
    throw NumericError("mean_error_report: class list mismatch");
  std::vector<MeanErrors> out;
  for (std::size_t c = 0; c < truths.size(); ++c) {
    const NormPair r = mean_error(robust[c], truths[c]);
    const NormPair e = mean_error(empirical[c], truths[c]);
    out.push_back({static_cast<int>(c), r.l2, r.l1, e.l2, e.l1});
  }
  return out;
}

void TheoryParams::validate() const {
  if (!(c_star > 0.0) || !(c_upper >= c_star)) throw NumericError("theory params: need 0 < c_star <= c_upper");
  if (!(xi > 0.0 && xi < 1.0)) throw NumericError("theory params: xi must lie in (0, 1)");
  if (!(beta > 0.0) || !(v >= 0.0)) throw NumericError("theory params: need beta > 0 and v >= 0");
}

double lemma1_growth_factor(const TheoryParams& params) {
  params.validate();
  return 1.0 + params.xi * params.v / (params.beta * params.ell());
}

bool lemma1_holds(const TheoryParams& params, double tau, double tau_new) {
  return 0.5 - tau_new >= lemma1_growth_factor(params) * (0.5 - tau);
}

double theorem1_lower_bound(const TheoryParams& params) {
  params.validate();
  return 1.0 - 3.0 * params.xi * params.c_upper * params.v;
}

}  // namespace noisecal::verify
