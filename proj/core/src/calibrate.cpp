#include "noisecal/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisecal/error.hpp"
#include "noisecal/robustmean.hpp"

namespace noisecal::calibrate {

std::string to_string(Method method) { return method == Method::MeanBased ? "mean_based" : "cov_based"; }

Method parse_method(const std::string& text) {
  if (text == "mean_based") return Method::MeanBased;
  if (text == "cov_based") return Method::CovBased;
  throw ConfigError("unknown calibration method '" + text + "' (expected mean_based or cov_based)");
}

std::string to_string(MeanCovariance mode) { return mode == MeanCovariance::Weighted ? "weighted" : "isotropic"; }

MeanCovariance parse_mean_covariance(const std::string& text) {
  if (text == "weighted") return MeanCovariance::Weighted;
  if (text == "isotropic") return MeanCovariance::Isotropic;
  throw ConfigError("unknown mean_cov '" + text + "' (expected weighted or isotropic)");
}

void CalibrationConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("calibration.alpha must be >= 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("calibration.lambda must lie in [0, 1]");
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("calibration.C must be positive");
}

namespace {

void require_class_size(const Matrix& features) {
  if (features.rows() < 2) throw NumericError("class too small");
}

}  // namespace

GaussianClassModel fit_empirical(const Matrix& features, int class_id) {
  require_class_size(features);
  numkit::Moments m = numkit::empirical_moments(features);
  return {class_id, std::move(m.mean), numkit::symmetrized(m.cov), static_cast<std::size_t>(features.rows())};
}

GaussianClassModel fit_cov_based(const Matrix& features, double alpha, int class_id) {
  if (!(alpha >= 0.0)) throw NumericError("fit_cov_based: alpha must be >= 0");
  GaussianClassModel model = fit_empirical(features, class_id);
  model.cov.array() += alpha;
  return model;
}

GaussianClassModel fit_mean_based(const Matrix& features, double c, int class_id, MeanCovariance mode) {
  require_class_size(features);
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();

  robustmean::Options options;
  options.c = c;
  robustmean::Result robust = robustmean::agnostic_mean_traced(features, options);

  std::vector<double> weights = robust.top_damping.weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(n), 1.0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

  Matrix cov = Matrix::Zero(d, d);
  Vector diff(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    diff = features.row(i).transpose() - robust.mean;
    cov.noalias() += weights[static_cast<std::size_t>(i)] * (diff * diff.transpose());
  }
  if (total > 0.0) cov /= total;
  cov = numkit::symmetrized(cov);

  if (mode == MeanCovariance::Isotropic) {
    cov = Matrix::Identity(d, d) * (cov.trace() / static_cast<double>(d));
  } else if (!numkit::is_psd(cov)) {
    const double lowest = numkit::sym_eig(cov).values(d - 1);
    cov.diagonal().array() += -lowest + 1e-8 * std::max(1.0, cov.trace() / static_cast<double>(d));
  }
  return {class_id, std::move(robust.mean), std::move(cov), static_cast<std::size_t>(n)};
}

GaussianClassModel fit_class(const Matrix& features, const CalibrationConfig& config, int class_id) {
  switch (config.method) {
    case Method::MeanBased: return fit_mean_based(features, config.c, class_id, config.mean_cov);
    case Method::CovBased: return fit_cov_based(features, config.alpha, class_id);
  }
  throw NumericError("fit_class: unknown method");
}

ClassFit fit_all(const LabeledSet& data, int num_classes, const CalibrationConfig& config) {
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    const int y = data.labels[i];
    if (y < 0 || y >= num_classes) throw NumericError("fit_all: label out of range");
    rows[static_cast<std::size_t>(y)].push_back(static_cast<Eigen::Index>(i));
  }
  ClassFit out;
  for (int c = 0; c < num_classes; ++c) {
    const auto& idx = rows[static_cast<std::size_t>(c)];
    if (idx.size() < 2) {
      out.skipped.push_back(c);
      continue;
    }
    Matrix features(static_cast<Eigen::Index>(idx.size()), data.features.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) features.row(static_cast<Eigen::Index>(r)) = data.features.row(idx[r]);
    out.models.push_back(fit_class(features, config, c));
  }
  return out;
}

std::vector<std::size_t> proportional_counts(const std::vector<std::size_t>& counts, std::size_t total) {
  const double sum = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<std::size_t> out(counts.size(), 0);
  if (counts.empty() || sum == 0.0) return out;

  std::vector<double> remainder(counts.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(counts[c]) / sum;
    out[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(out[c]);
    assigned += out[c];
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size(), ++assigned) ++out[order[i]];
  return out;
}

LabeledSet sample_calibrated(const std::vector<GaussianClassModel>& models, double lambda, std::size_t n_total,
                             Rng& rng) {
  if (models.empty()) throw NumericError("sample_calibrated: empty model list");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw NumericError("sample_calibrated: lambda must lie in [0, 1]");
  const auto total = static_cast<std::size_t>(std::llround(lambda * static_cast<double>(n_total)));
  const Eigen::Index d = models.front().dim();

  std::vector<std::size_t> counts;
  for (const auto& m : models) counts.push_back(m.count);
  const std::vector<std::size_t> per_class = proportional_counts(counts, total);

  const Rng base(rng());
  LabeledSet out{Matrix(static_cast<Eigen::Index>(total), d), {}};
  out.labels.reserve(total);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < models.size(); ++c) {
    if (per_class[c] == 0) continue;
    Rng stream = base.derive(static_cast<std::uint64_t>(models[c].class_id));
    const Matrix draws = numkit::gaussian_sample(models[c].mean, models[c].cov, per_class[c], stream);
    out.features.middleRows(row, draws.rows()) = draws;
    row += draws.rows();
    out.labels.insert(out.labels.end(), per_class[c], models[c].class_id);
  }
  return out;
}

}  // namespace noisecal::calibrate
