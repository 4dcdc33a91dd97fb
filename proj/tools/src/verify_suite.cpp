#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include "noisecal/app/commands.hpp"
#include "noisecal/calibrate.hpp"
#include "noisecal/error.hpp"
#include "noisecal/trainer.hpp"
#include "noisecal/verify.hpp"

namespace noisecal::app {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string ratio(int hits, int total) { return std::to_string(hits) + "/" + std::to_string(total); }

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

double percentile95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size()))) - 1;
  return v[idx];
}

GaussianClassModel standard_normal(Eigen::Index d) { return {0, Vector::Zero(d), Matrix::Identity(d, d), 1}; }

class Suite {
 public:
  explicit Suite(const VerifyOptions& options) : options_(options), root_(options.seed) {
    robust_.damping = !options.disable_damping;
  }

  std::vector<CheckResult> run() {
    sym_eig_closed_form();
    spectral_norm_power();
    sampling_moments();
    posterior_logistic();
    scale_grid_search();
    symmetric_rate();
    pmd_levels();
    transition_fidelity();
    clean_consistency();
    contamination();
    calibrate_checks();
    gradient_checks();
    disturbance_identity();
    bound_values();
    purity_checks();
    return std::move(results_);
  }

 private:
  void add(std::string name, bool passed, std::string measured, std::string threshold) {
    results_.push_back({std::move(name), passed, std::move(measured), std::move(threshold)});
  }

  Rng stream(std::uint64_t id) const { return root_.derive(id); }

  void sym_eig_closed_form() {
    Rng rng = stream(1);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double a = rng.normal(), b = rng.normal(), c = rng.normal();
      Matrix m(2, 2);
      m << a, b, b, c;
      const numkit::EigenPair eig = numkit::sym_eig(m);
      const double mid = 0.5 * (a + c);
      const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      worst = std::max({worst, std::abs(eig.values(0) - (mid + rad)), std::abs(eig.values(1) - (mid - rad))});
    }
    add("sym_eig 2x2 vs characteristic roots", worst <= 1e-10, fmt(worst), "<= 1e-10");
  }

  void spectral_norm_power() {
    Rng rng = stream(2);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const Matrix a = random_matrix(3, 3, rng);
      const Matrix ata = a.transpose() * a;
      Vector v = Vector::Ones(3);
      for (int it = 0; it < 5000; ++it) v = (ata * v).normalized();
      const double oracle = std::sqrt(v.dot(ata * v));
      worst = std::max(worst, std::abs(numkit::spectral_norm(a) - oracle) / oracle);
    }
    add("spectral_norm vs power iteration", worst <= 1e-8, fmt(worst), "<= 1e-8 rel");
  }

  void sampling_moments() {
    Rng rng = stream(3);
    const Matrix x = numkit::gaussian_sample(Vector::Zero(1), Matrix::Identity(1, 1), 100000, rng);
    const numkit::Moments m = numkit::empirical_moments(x);
    add("gaussian_sample 1-D mean", std::abs(m.mean(0)) <= 0.02, fmt(m.mean(0)), "|mean| <= 0.02");
    add("gaussian_sample 1-D variance", std::abs(m.cov(0, 0) - 1.0) <= 0.03, fmt(m.cov(0, 0)), "1 +- 0.03");

    Matrix cov(2, 2);
    cov << 2.0, 1.0, 1.0, 2.0;
    const Matrix y = numkit::gaussian_sample(Vector::Zero(2), cov, 200000, rng);
    const double err = (numkit::empirical_moments(y).cov - cov).cwiseAbs().maxCoeff();
    add("gaussian_sample 2-D covariance", err <= 0.03, fmt(err), "entrywise <= 0.03");
  }

  void posterior_logistic() {
    const double mu0 = -1.0, mu1 = 1.5, var = 0.7;
    noisegen::MixtureOracle oracle({{0, Vector::Constant(1, mu0), Matrix::Constant(1, 1, var), 1},
                                    {1, Vector::Constant(1, mu1), Matrix::Constant(1, 1, var), 1}},
                                   {0.5, 0.5});
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
      const double x = -4.0 + 0.16 * i;
      const double logistic = 1.0 / (1.0 + std::exp(-(mu1 - mu0) * (x - 0.5 * (mu0 + mu1)) / var));
      worst = std::max(worst, std::abs(noisegen::bayes_posterior(oracle, Vector::Constant(1, x))(1) - logistic));
    }
    add("bayes_posterior vs closed-form logistic", worst <= 1e-10, fmt(worst), "<= 1e-10");
  }

  void scale_grid_search() {
    noisegen::MixtureOracle oracle({{0, Vector::Constant(1, -1.0), Matrix::Identity(1, 1), 1},
                                    {1, Vector::Constant(1, 1.0), Matrix::Identity(1, 1), 1}},
                                   {0.5, 0.5});
    Rng rng = stream(4);
    const LabeledSet sample = oracle.sample(5000, rng);
    noisegen::NoiseSpec spec;
    spec.pmd_type = noisegen::PmdType::TypeI;
    spec.target_level = 0.35;
    const double resolved = noisegen::resolve_scale(oracle, sample.features, sample.labels, spec).scale;

    // Independent oracle: eta_1 = sigmoid(2x) for these classes.
    std::vector<double> rho;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double eta1 = 1.0 / (1.0 + std::exp(-2.0 * sample.features(static_cast<Eigen::Index>(i), 0)));
      const int top = eta1 > 0.5 ? 1 : 0;
      const double gap = std::abs(2.0 * eta1 - 1.0);
      rho.push_back(sample.labels[i] == top ? 0.5 * (1.0 - gap * gap) : 0.0);
    }
    auto level = [&](double s) {
      double total = 0.0;
      for (double r : rho) total += std::min(1.0, s * r);
      return total / static_cast<double>(rho.size());
    };
    auto search = [&](double lo, double hi, double step) {
      double best = lo, best_err = std::abs(level(lo) - 0.35);
      for (double s = lo; s <= hi; s += step) {
        const double err = std::abs(level(s) - 0.35);
        if (err < best_err) best = s, best_err = err;
      }
      return best;
    };
    const double coarse = search(0.0, 20.0, 0.01);
    const double fine = search(std::max(0.0, coarse - 0.01), coarse + 0.01, 1e-5);
    add("resolve_scale vs grid search", std::abs(resolved - fine) <= 1e-3,
        fmt(resolved) + " vs " + fmt(fine), "|diff| <= 1e-3");
  }

  void symmetric_rate() {
    const noisegen::MixtureOracle oracle = noisegen::simplex_oracle(3, 3, 2.0);
    Rng rng = stream(5);
    const LabeledSet clean = oracle.sample(50000, rng);
    noisegen::NoiseSpec spec;
    spec.class_matrix = noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, 3, 0.3);
    const double rate = noisegen::corrupt(clean, oracle, spec, rng).empirical_rate;
    add("symmetric eps=0.3 flip rate", std::abs(rate - 0.3) <= 0.01, fmt(rate), "0.30 +- 0.01");
  }

  void pmd_levels() {
    const noisegen::MixtureOracle oracle = noisegen::simplex_oracle(2, 8, 2.5);
    Rng rng = stream(6);
    const LabeledSet clean = oracle.sample(50000, rng);
    for (auto type : {noisegen::PmdType::TypeI, noisegen::PmdType::TypeII, noisegen::PmdType::TypeIII}) {
      for (double target : {0.35, 0.70}) {
        noisegen::NoiseSpec spec;
        spec.pmd_type = type;
        spec.target_level = target;
        spec.scale_factor = noisegen::resolve_scale(oracle, clean.features, clean.labels, spec).scale;
        Rng noise = rng.derive(static_cast<std::uint64_t>(type) * 10 + (target < 0.5 ? 0 : 1));
        const double rate = noisegen::corrupt(clean, oracle, spec, noise).empirical_rate;
        add("PMD type " + noisegen::to_string(type) + " at " + fmt(target), std::abs(rate - target) <= 0.015,
            fmt(rate), fmt(target) + " +- 0.015");
      }
    }
  }

  // Binomial tolerance: 4 standard errors per entry (Bonferroni over the
  // k(k-1) entries keeps the false-alarm rate below 1%).
  void transition_fidelity() {
    const int k = 10;
    const double eps = 0.3;
    const noisegen::MixtureOracle oracle = noisegen::simplex_oracle(k, k, 3.0);
    Rng rng = stream(7);
    const LabeledSet clean = oracle.sample(50000, rng);
    noisegen::NoiseSpec spec;
    spec.class_matrix = noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, k, eps);
    const noisegen::CorruptionResult r = noisegen::corrupt(clean, oracle, spec, rng);
    Matrix counts = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < clean.size(); ++i) counts(r.dataset.clean_labels()[i], r.dataset.noisy_labels()[i]) += 1;
    const double p = eps / (k - 1);
    double worst_z = 0.0;
    for (int i = 0; i < k; ++i) {
      const double row = counts.row(i).sum();
      const double se = std::sqrt(p * (1 - p) / row);
      for (int j = 0; j < k; ++j)
        if (i != j) worst_z = std::max(worst_z, std::abs(counts(i, j) / row - p) / se);
    }
    add("transition matrix entries (binomial z)", worst_z <= 4.0, fmt(worst_z), "max |z| <= 4");
  }

  void clean_consistency() {
    std::vector<double> errs;
    for (int s = 0; s < 50; ++s) {
      Rng rng = stream(1000 + static_cast<std::uint64_t>(s));
      const Matrix x = numkit::gaussian_sample(Vector::Zero(8), Matrix::Identity(8, 8), 5000, rng);
      errs.push_back((robustmean::agnostic_mean(x, robust_) - numkit::empirical_moments(x).mean).norm());
    }
    const double p95 = percentile95(errs);
    add("clean case robust vs empirical (p95)", p95 <= 0.15, fmt(p95), "<= 0.15");
  }

  void contamination() {
    const Eigen::Index d = 16;
    Vector shift = Vector::Zero(d);
    shift(0) = 10.0;
    const noisegen::OutlierSampler point = noisegen::point_mass(shift);
    const noisegen::OutlierSampler spread = [shift](Rng& r) {
      Vector v(shift.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = shift(j) + 15.0 * r.normal();
      return v;
    };
    int l2_wins = 0, l1_wins = 0, spread_wins = 0;
    for (int s = 0; s < 100; ++s) {
      Rng rng = stream(2000 + static_cast<std::uint64_t>(s));
      const auto h = noisegen::huber_mixture(standard_normal(d), point, 0.2, 2000, rng);
      const Vector robust = robustmean::agnostic_mean(h.points, robust_);
      const Vector empirical = numkit::empirical_moments(h.points).mean;
      l2_wins += robust.norm() < empirical.norm() ? 1 : 0;
      l1_wins += robust.lpNorm<1>() < empirical.lpNorm<1>() ? 1 : 0;

      Rng rng2 = stream(3000 + static_cast<std::uint64_t>(s));
      const auto g = noisegen::huber_mixture(standard_normal(d), spread, 0.2, 2000, rng2);
      const double r2 = robustmean::agnostic_mean(g.points, robust_).norm();
      const double e2 = numkit::empirical_moments(g.points).mean.norm();
      spread_wins += r2 < 0.5 * e2 ? 1 : 0;
    }
    add("contamination recovery, point mass (l2)", l2_wins >= 95, ratio(l2_wins, 100), ">= 95/100");
    add("contamination recovery, point mass (l1)", l1_wins >= 95, ratio(l1_wins, 100), ">= 95/100");
    add("contamination recovery, spread outliers", spread_wins >= 95, ratio(spread_wins, 100),
        "robust < empirical/2 in >= 95/100");
  }

  void calibrate_checks() {
    Rng rng = stream(8);
    Vector mu(3);
    mu << 1.0, -2.0, 0.5;
    Matrix cov(3, 3);
    cov << 1.5, 0.3, -0.2, 0.3, 1.0, 0.1, -0.2, 0.1, 0.8;
    const Matrix x = numkit::gaussian_sample(mu, cov, 100000, rng);
    const GaussianClassModel fit = calibrate::fit_empirical(x);
    const double err = std::max((fit.mean - mu).cwiseAbs().maxCoeff(), (fit.cov - cov).cwiseAbs().maxCoeff());
    add("fit_empirical recovery", err <= 0.03, fmt(err), "entrywise <= 0.03");

    std::vector<double> errs;
    for (int s = 0; s < 50; ++s) {
      Rng r = stream(4000 + static_cast<std::uint64_t>(s));
      const Matrix y = numkit::gaussian_sample(Vector::Zero(8), Matrix::Identity(8, 8), 5000, r);
      errs.push_back((calibrate::fit_mean_based(y, 1.0).mean - numkit::empirical_moments(y).mean).norm());
    }
    add("fit_mean_based clean mean (p95)", percentile95(errs) <= 0.15, fmt(percentile95(errs)), "<= 0.15");

    std::vector<GaussianClassModel> models{{0, Vector::Constant(2, -1.0), Matrix::Identity(2, 2), 600},
                                           {1, Vector::Constant(2, 2.0), 0.5 * Matrix::Identity(2, 2), 400}};
    const LabeledSet sampled = calibrate::sample_calibrated(models, 1.0, 100000, rng);
    double worst = 0.0;
    for (const auto& m : models) {
      Vector sum = Vector::Zero(2);
      double n = 0.0;
      for (std::size_t i = 0; i < sampled.size(); ++i) {
        if (sampled.labels[i] != m.class_id) continue;
        sum += sampled.features.row(static_cast<Eigen::Index>(i)).transpose();
        n += 1.0;
      }
      worst = std::max(worst, (sum / n - m.mean).cwiseAbs().maxCoeff());
    }
    add("sample_calibrated class means", worst <= 0.02, fmt(worst), "<= 0.02");
  }

  void gradient_checks() {
    Rng rng = stream(9);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const int k = 2 + inst % 3;
      const Eigen::Index d = 4;
      trainer::LinearClassifier f{random_matrix(k, d, rng), random_matrix(k, 1, rng).col(0)};
      const Matrix x = random_matrix(6, d, rng);
      std::vector<int> y(6);
      for (auto& v : y) v = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
      const trainer::Gradient g = trainer::cross_entropy_gradient(f, x, y);
      const double h = 1e-4;
      auto loss_at = [&](const trainer::LinearClassifier& p) { return trainer::cross_entropy_gradient(p, x, y).loss; };
      for (int c = 0; c < k; ++c) {
        for (Eigen::Index j = 0; j <= d; ++j) {
          trainer::LinearClassifier plus = f, minus = f;
          double analytic;
          if (j < d) {
            plus.weights(c, j) += h;
            minus.weights(c, j) -= h;
            analytic = g.weights(c, j);
          } else {
            plus.bias(c) += h;
            minus.bias(c) -= h;
            analytic = g.bias(c);
          }
          const double fd = (loss_at(plus) - loss_at(minus)) / (2 * h);
          worst = std::max(worst, std::abs(fd - analytic) / std::max({1.0, std::abs(fd), std::abs(analytic)}));
        }
      }
    }
    add("cross-entropy gradient vs central differences", worst <= 1e-5, fmt(worst), "<= 1e-5 rel");
  }

  void disturbance_identity() {
    // Dyadic data: every sum is exact, so the identity holds bitwise.
    Matrix x(4, 3);
    x << 0.5, 1.0, -0.25, 1.5, 0.0, 0.75, -0.5, 2.0, 0.25, 0.5, -1.0, 1.25;
    const double alpha = 0.25;
    const Matrix diff = calibrate::fit_cov_based(x, alpha).cov - calibrate::fit_empirical(x).cov;
    const bool exact = (diff.array() == alpha).all();
    add("disturbance identity (exact data)", exact, exact ? "bitwise" : "mismatch", "== alpha * J");

    Rng rng = stream(10);
    const Matrix y = random_matrix(200, 5, rng);
    const double a = 0.3;
    const Matrix d2 = calibrate::fit_cov_based(y, a).cov - calibrate::fit_empirical(y).cov;
    const numkit::EigenPair eig = numkit::sym_eig(numkit::symmetrized(d2));
    double spec_err = std::abs(eig.values(0) - a * 5);
    for (Eigen::Index i = 1; i < 5; ++i) spec_err = std::max(spec_err, std::abs(eig.values(i)));
    add("disturbance spectrum {alpha d, 0, ...}", spec_err <= 1e-9, fmt(spec_err), "<= 1e-9");
  }

  void bound_values() {
    const bool phi_one = verify::phi(Matrix::Identity(3, 3)) == 1.0;
    add("phi(I)", phi_one, fmt(verify::phi(Matrix::Identity(3, 3))), "== 1");
    const std::vector<Vector> same{Vector::Zero(2), Vector::Zero(2)};
    const double b_same = verify::generalization_bound(same, same, Matrix::Identity(2, 2), 0.0);
    add("bound, identical means", b_same == 2.0, fmt(b_same), "== 2 (1 per ordered pair)");
    const std::vector<Vector> apart{Vector::Zero(2), Vector::Constant(2, 2.0)};
    const double b = verify::generalization_bound(apart, apart, Matrix::Identity(2, 2), 0.0);
    add("bound, distance sqrt(8)", std::abs(b - 2.0 * std::exp(-1.0)) <= 1e-12, fmt(b), "2/e +- 1e-12");
  }

  void purity_checks() {
    const noisegen::MixtureOracle oracle = noisegen::simplex_oracle(2, 2, 2.0);
    Rng rng = stream(11);
    const LabeledSet sample = oracle.sample(10000, rng);
    const verify::EvalSet eval = verify::make_eval_set(oracle, sample.features);

    std::vector<int> wrong_near(eval.bayes_labels);
    for (std::size_t i = 0; i < wrong_near.size(); ++i)
      if (eval.margins[i] < 0.2) wrong_near[i] = 1 - wrong_near[i];
    const double tau = verify::min_pure_tau(wrong_near, eval);
    add("min_pure_tau, wrong inside margin 0.2", std::abs(tau - 0.2) <= verify::kDefaultTauStep + 1e-12, fmt(tau),
        "0.2 +- 0.01");

    std::vector<int> coin(eval.size());
    for (auto& v : coin) v = rng.uniform() < 0.5 ? 1 : 0;
    const double purity = verify::level_set_purity(coin, eval, 0.3).purity;
    add("random classifier purity at tau 0.3", std::abs(purity - 0.5) <= 0.02, fmt(purity), "0.5 +- 0.02");

    const double agree = verify::bayes_agreement(eval.bayes_labels, eval);
    add("Bayes agreement of the Bayes classifier", agree == 1.0, fmt(agree), "== 1");
  }

  VerifyOptions options_;
  Rng root_;
  robustmean::Options robust_;
  std::vector<CheckResult> results_;
};

}  // namespace

std::vector<CheckResult> verify_suite(const VerifyOptions& options) { return Suite(options).run(); }

void print_check_table(std::ostream& out, const std::vector<CheckResult>& checks) {
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "check" << "  result  measured / threshold\n";
  int failed = 0;
  for (const auto& c : checks) {
    out << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << (c.passed ? "PASS" : "FAIL") << "    "
        << c.measured << " / " << c.threshold << "\n";
    failed += c.passed ? 0 : 1;
  }
  out << checks.size() - static_cast<std::size_t>(failed) << " passed, " << failed << " failed\n";
}

}  // namespace noisecal::app
