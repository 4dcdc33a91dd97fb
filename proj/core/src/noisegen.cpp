#include "noisecal/noisegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "noisecal/error.hpp"

namespace noisecal::noisegen {

namespace {

Matrix factor_or_throw(const Matrix& cov, int class_id) {
  const Eigen::Index d = cov.rows();
  Eigen::LLT<Matrix> llt(numkit::symmetrized(cov));
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double trace = cov.trace();
  const double jitter = trace > 0.0 ? 1e-8 * trace / static_cast<double>(d) : 1e-8;
  llt.compute(numkit::symmetrized(cov) + jitter * Matrix::Identity(d, d));
  if (llt.info() != Eigen::Success) {
    throw NumericError("mixture oracle: covariance of class " + std::to_string(class_id) +
                       " is singular after jitter");
  }
  return llt.matrixL();
}

int draw_categorical(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return static_cast<int>(j);
  }
  // u landed in the rounding slack above the last cumulative sum
  for (std::size_t j = probs.size(); j-- > 0;)
    if (probs[j] > 0.0) return static_cast<int>(j);
  return 0;
}

}  // namespace

MixtureOracle::MixtureOracle(std::vector<GaussianClassModel> classes, std::vector<double> priors)
    : classes_(std::move(classes)), priors_(std::move(priors)) {
  if (classes_.size() < 2) throw NumericError("mixture oracle: need at least two classes");
  if (priors_.size() != classes_.size()) throw NumericError("mixture oracle: priors/classes size mismatch");
  const double total = std::accumulate(priors_.begin(), priors_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw NumericError("mixture oracle: priors must sum to 1");
  for (double p : priors_)
    if (!(p >= 0.0)) throw NumericError("mixture oracle: negative prior");

  const Eigen::Index d = classes_.front().dim();
  if (d == 0) throw NumericError("mixture oracle: dimension 0");
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    auto& model = classes_[c];
    model.class_id = static_cast<int>(c);
    if (model.dim() != d || model.cov.rows() != d || model.cov.cols() != d)
      throw NumericError("mixture oracle: inconsistent class dimensions");
    numkit::require_covariance(model.cov, "mixture oracle");
    Matrix l = factor_or_throw(model.cov, model.class_id);
    log_norm_.push_back(-l.diagonal().array().log().sum() -
                        0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi));
    chol_.push_back(std::move(l));
  }
}

Vector MixtureOracle::log_joint(const Vector& x) const {
  if (x.size() != dim()) throw NumericError("posterior: dimension mismatch");
  Vector out(num_classes());
  for (int c = 0; c < num_classes(); ++c) {
    const auto& l = chol_[static_cast<std::size_t>(c)];
    const Vector y = l.triangularView<Eigen::Lower>().solve(x - classes_[static_cast<std::size_t>(c)].mean);
    const double prior = priors_[static_cast<std::size_t>(c)];
    out(c) = (prior > 0.0 ? std::log(prior) : -std::numeric_limits<double>::infinity()) +
             log_norm_[static_cast<std::size_t>(c)] - 0.5 * y.squaredNorm();
  }
  return out;
}

Vector MixtureOracle::posterior(const Vector& x) const {
  const Vector lj = log_joint(x);
  const double top = lj.maxCoeff();
  Vector p = (lj.array() - top).exp().matrix();
  return p / p.sum();
}

LabeledSet MixtureOracle::sample(std::size_t n, Rng& rng) const {
  const Eigen::Index d = dim();
  LabeledSet out{Matrix(static_cast<Eigen::Index>(n), d), std::vector<int>(n)};
  Vector z(d);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = draw_categorical(priors_, rng.uniform());
    for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
    const auto idx = static_cast<std::size_t>(c);
    out.features.row(static_cast<Eigen::Index>(i)) = (classes_[idx].mean + chol_[idx] * z).transpose();
    out.labels[i] = c;
  }
  return out;
}

MixtureOracle simplex_oracle(int k, int d, double separation, std::vector<double> priors) {
  if (k < 2 || k > d) throw NumericError("simplex_oracle: need 2 <= k <= d");
  if (!(separation > 0.0)) throw NumericError("simplex_oracle: separation must be positive");
  if (priors.empty()) priors.assign(static_cast<std::size_t>(k), 1.0 / k);

  Vector centroid = Vector::Zero(d);
  centroid.head(k).setConstant(1.0 / k);
  const double scale = separation / std::sqrt(2.0);
  std::vector<GaussianClassModel> classes;
  for (int c = 0; c < k; ++c) {
    Vector mean = -centroid;
    mean(c) += 1.0;
    classes.push_back({c, scale * mean, Matrix::Identity(d, d), 1});
  }
  return MixtureOracle(std::move(classes), std::move(priors));
}

Vector bayes_posterior(const MixtureOracle& oracle, const Vector& x) { return oracle.posterior(x); }

std::string to_string(PmdType type) {
  switch (type) {
    case PmdType::None: return "none";
    case PmdType::TypeI: return "I";
    case PmdType::TypeII: return "II";
    case PmdType::TypeIII: return "III";
  }
  return "none";
}

PmdType parse_pmd_type(const std::string& text) {
  if (text == "none") return PmdType::None;
  if (text == "I") return PmdType::TypeI;
  if (text == "II") return PmdType::TypeII;
  if (text == "III") return PmdType::TypeIII;
  throw ConfigError("unknown pmd_type '" + text + "' (expected none, I, II, III)");
}

double pmd_rho(PmdType type, double gap) {
  switch (type) {
    case PmdType::None: return 0.0;
    case PmdType::TypeI: return -0.5 * gap * gap + 0.5;
    case PmdType::TypeII: return 1.0 - gap * gap * gap;
    case PmdType::TypeIII: return 1.0 - (gap * gap * gap + gap * gap + gap) / 3.0;
  }
  return 0.0;
}

TopTwo top_two(const Vector& posterior) {
  if (posterior.size() < 2) throw NumericError("pmd: need k >= 2");
  TopTwo out;
  out.first = posterior(1) > posterior(0) ? 1 : 0;
  out.second = 1 - out.first;
  for (Eigen::Index j = 2; j < posterior.size(); ++j) {
    if (posterior(j) > posterior(out.first)) {
      out.second = out.first;
      out.first = static_cast<int>(j);
    } else if (posterior(j) > posterior(out.second)) {
      out.second = static_cast<int>(j);
    }
  }
  out.gap = posterior(out.first) - posterior(out.second);
  return out;
}

double flip_probability(const Vector& posterior, int label, PmdType type, double scale) {
  const TopTwo top = top_two(posterior);
  if (label != top.first) return 0.0;
  return std::clamp(scale * pmd_rho(type, top.gap), 0.0, 1.0);
}

int pmd_flip(const MixtureOracle& oracle, const Vector& x, int label, const NoiseSpec& spec, Rng& rng) {
  if (spec.pmd_type == PmdType::None) throw NumericError("pmd_flip: pmd_type is none");
  if (oracle.num_classes() < 2) throw NumericError("pmd: need k >= 2");
  const double scale = spec.scale_factor.value_or(1.0);
  const Vector post = oracle.posterior(x);
  const TopTwo top = top_two(post);
  const double u = rng.uniform();
  if (label != top.first) return label;
  const double p = std::clamp(scale * pmd_rho(spec.pmd_type, top.gap), 0.0, 1.0);
  return u < p ? top.second : label;
}

namespace {

struct FlipTable {
  std::vector<double> rho;  // zero where the label is not the top class
  double max_achievable = 0.0;
};

FlipTable flip_table(const MixtureOracle& oracle, const Matrix& features, std::span<const int> labels,
                     PmdType type) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw NumericError("resolve_scale: features/labels size mismatch");
  if (labels.empty()) throw NumericError("resolve_scale: empty sample");
  FlipTable t;
  t.rho.resize(labels.size());
  std::size_t positive = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const TopTwo top = top_two(oracle.posterior(features.row(static_cast<Eigen::Index>(i)).transpose()));
    const double r = labels[i] == top.first ? std::max(0.0, pmd_rho(type, top.gap)) : 0.0;
    t.rho[i] = r;
    if (r > 0.0) ++positive;
  }
  t.max_achievable = static_cast<double>(positive) / static_cast<double>(labels.size());
  return t;
}

double mean_clamped(const std::vector<double>& rho, double scale) {
  double s = 0.0;
  for (double r : rho) s += std::min(1.0, scale * r);
  return s / static_cast<double>(rho.size());
}

}  // namespace

double mean_flip_probability(const MixtureOracle& oracle, const Matrix& features, std::span<const int> labels,
                             PmdType type, double scale) {
  return mean_clamped(flip_table(oracle, features, labels, type).rho, scale);
}

ScaleResolution resolve_scale(const MixtureOracle& oracle, const Matrix& features, std::span<const int> labels,
                              const NoiseSpec& spec) {
  const double target = spec.target_level;
  if (!(target >= 0.0 && target <= 0.95)) throw NumericError("resolve_scale: target_level must lie in [0, 0.95]");
  if (spec.pmd_type == PmdType::None) throw NumericError("resolve_scale: pmd_type is none");

  const FlipTable table = flip_table(oracle, features, labels, spec.pmd_type);
  ScaleResolution out;
  out.max_achievable = table.max_achievable;
  if (target == 0.0) return out;

  double lo = 0.0;
  double hi = 1.0;
  while (mean_clamped(table.rho, hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1.0p60) {
      throw NumericError("resolve_scale: target " + std::to_string(target) +
                         " unreachable; max achievable level is " + std::to_string(table.max_achievable));
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_clamped(table.rho, mid) < target) lo = mid;
    else hi = mid;
  }
  const double at_lo = mean_clamped(table.rho, lo);
  const double at_hi = mean_clamped(table.rho, hi);
  if (std::abs(at_lo - target) < std::abs(at_hi - target)) {
    out.scale = lo;
    out.achieved = at_lo;
  } else {
    out.scale = hi;
    out.achieved = at_hi;
  }
  if (std::abs(out.achieved - target) > kScaleTolerance) {
    throw NumericError("resolve_scale: achieved level " + std::to_string(out.achieved) + " misses target " +
                       std::to_string(target));
  }
  return out;
}

Matrix class_transition_matrix(TransitionKind kind, int k, double epsilon, std::span<const std::pair<int, int>> pairs) {
  if (k < 2) throw NumericError("class_transition_matrix: need k >= 2");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw NumericError("class_transition_matrix: epsilon must lie in [0, 1)");
  Matrix t = Matrix::Identity(k, k);
  if (kind == TransitionKind::Symmetric) {
    t.setConstant(epsilon / static_cast<double>(k - 1));
    t.diagonal().setConstant(1.0 - epsilon);
    return t;
  }
  if (pairs.empty()) throw NumericError("class_transition_matrix: asymmetric noise needs a pair map");
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (const auto& [src, dst] : pairs) {
    if (src < 0 || src >= k || dst < 0 || dst >= k) throw NumericError("class_transition_matrix: class out of range");
    if (src == dst) throw NumericError("class_transition_matrix: pair map sends class " + std::to_string(src) + " to itself");
    if (seen[static_cast<std::size_t>(src)])
      throw NumericError("class_transition_matrix: class " + std::to_string(src) + " mapped twice");
    seen[static_cast<std::size_t>(src)] = true;
    t(src, src) = 1.0 - epsilon;
    t(src, dst) = epsilon;
  }
  return t;
}

NoisyDataset::NoisyDataset(Matrix features, std::vector<int> clean_labels, std::vector<int> noisy_labels,
                           int num_classes)
    : features_(std::move(features)),
      clean_(std::move(clean_labels)),
      observed_(std::move(noisy_labels)),
      k_(num_classes) {
  if (static_cast<std::size_t>(features_.rows()) != clean_.size() || clean_.size() != observed_.size())
    throw NumericError("dataset: row count mismatch");
  if (k_ < 2) throw NumericError("dataset: need k >= 2");
  for (std::size_t i = 0; i < clean_.size(); ++i) {
    if (clean_[i] < 0 || clean_[i] >= k_ || observed_[i] < 0 || observed_[i] >= k_)
      throw NumericError("dataset: label out of range at row " + std::to_string(i));
  }
  if (!features_.allFinite()) throw NumericError("dataset: non-finite feature");
  noisy_ = observed_;
  corrected_.assign(clean_.size(), false);
}

void NoisyDataset::set_noisy_label(std::size_t i, int label) {
  if (label < 0 || label >= k_) throw NumericError("dataset: label out of range");
  noisy_.at(i) = label;
  corrected_[i] = label != observed_[i];
}

void NoisyDataset::set_noisy_labels(std::span<const int> labels) {
  if (labels.size() != noisy_.size()) throw NumericError("dataset: label count mismatch");
  for (std::size_t i = 0; i < labels.size(); ++i) set_noisy_label(i, labels[i]);
}

double NoisyDataset::noise_rate() const {
  if (clean_.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < clean_.size(); ++i) wrong += noisy_[i] != clean_[i];
  return static_cast<double>(wrong) / static_cast<double>(clean_.size());
}

LabeledSet NoisyDataset::training_view() const { return {features_, noisy_}; }

CorruptionResult corrupt(const LabeledSet& clean, const MixtureOracle& oracle, const NoiseSpec& spec, Rng& rng) {
  const int k = oracle.num_classes();
  std::vector<int> noisy = clean.labels;
  std::size_t pmd_flips = 0;

  if (spec.pmd_type != PmdType::None) {
    if (!spec.scale_factor) throw NumericError("corrupt: PMD scale factor is unresolved");
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      const int before = noisy[i];
      noisy[i] = pmd_flip(oracle, clean.features.row(static_cast<Eigen::Index>(i)).transpose(), before, spec, rng);
      pmd_flips += noisy[i] != before;
    }
  }
  if (spec.class_matrix) {
    const Matrix& t = *spec.class_matrix;
    if (t.rows() != k || t.cols() != k) throw NumericError("corrupt: class matrix must be k x k");
    for (Eigen::Index r = 0; r < k; ++r) {
      if (std::abs(t.row(r).sum() - 1.0) > 1e-12 || (t.row(r).array() < 0.0).any())
        throw NumericError("corrupt: class matrix is not row-stochastic");
    }
    std::vector<double> row(static_cast<std::size_t>(k));
    for (auto& label : noisy) {
      for (int j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] = t(label, j);
      label = draw_categorical(row, rng.uniform());
    }
  }

  NoisyDataset ds(clean.features, clean.labels, std::move(noisy), k);
  const double n = static_cast<double>(std::max<std::size_t>(1, clean.size()));
  const double rate = ds.noise_rate();
  return {std::move(ds), rate, static_cast<double>(pmd_flips) / n};
}

OutlierSampler point_mass(Vector location) {
  return [loc = std::move(location)](Rng&) { return loc; };
}

HuberSample huber_mixture(const GaussianClassModel& inlier, const OutlierSampler& outliers, double epsilon,
                          std::size_t n, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw NumericError("huber_mixture: epsilon must lie in [0, 0.5)");
  const auto m = static_cast<std::size_t>(std::llround(epsilon * static_cast<double>(n)));
  const Eigen::Index d = inlier.dim();

  HuberSample out;
  out.points.resize(static_cast<Eigen::Index>(n), d);
  out.inlier.assign(n, true);
  out.outliers = m;

  const Matrix clean = numkit::gaussian_sample(inlier.mean, inlier.cov, n - m, rng);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  for (std::size_t i = 0; i < n - m; ++i) out.points.row(static_cast<Eigen::Index>(order[i])) = clean.row(static_cast<Eigen::Index>(i));
  for (std::size_t i = n - m; i < n; ++i) {
    const Vector p = outliers(rng);
    if (p.size() != d) throw NumericError("huber_mixture: outlier dimension mismatch");
    out.points.row(static_cast<Eigen::Index>(order[i])) = p.transpose();
    out.inlier[order[i]] = false;
  }
  return out;
}

}  // namespace noisecal::noisegen
