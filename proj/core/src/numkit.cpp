#include "noisecal/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "noisecal/error.hpp"

namespace noisecal::numkit {

double median(std::span<const double> values) {
  if (values.empty()) throw NumericError("empty input");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Vector coordinate_median(const Matrix& points) {
  if (points.rows() == 0) throw NumericError("empty input");
  Vector m(points.cols());
  std::vector<double> column(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) column[static_cast<std::size_t>(i)] = points(i, j);
    m(j) = median(column);
  }
  return m;
}

Moments weighted_moments(const Matrix& points, std::span<const double> weights) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (static_cast<std::size_t>(n) != weights.size()) {
    throw NumericError("weighted_moments: " + std::to_string(weights.size()) + " weights for " +
                       std::to_string(n) + " points");
  }
  if (n == 0) throw NumericError("empty input");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw NumericError("weighted_moments: negative weight");
  }

  Moments out{Vector::Zero(d), Matrix::Zero(d, d)};
  for (Eigen::Index i = 0; i < n; ++i) out.mean.noalias() += weights[static_cast<std::size_t>(i)] * points.row(i).transpose();
  out.mean /= static_cast<double>(n);

  Vector diff(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    diff = points.row(i).transpose() - out.mean;
    out.cov.noalias() += weights[static_cast<std::size_t>(i)] * (diff * diff.transpose());
  }
  out.cov /= static_cast<double>(n);
  return out;
}

Moments empirical_moments(const Matrix& points) {
  const std::vector<double> ones(static_cast<std::size_t>(points.rows()), 1.0);
  return weighted_moments(points, ones);
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.norm();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale || a.size() == 0;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

EigenPair sym_eig(const Matrix& input) {
  if (input.rows() != input.cols()) throw NumericError("sym_eig: matrix is not square");
  if (!input.allFinite()) throw NumericError("sym_eig: non-finite entries");
  if (!is_symmetric(input)) throw NumericError("sym_eig: matrix is not symmetric");

  const Eigen::Index d = input.rows();
  Matrix a = symmetrized(input);
  Matrix v = Matrix::Identity(d, d);
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < d; ++p)
      for (Eigen::Index q = p + 1; q < d; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= kJacobiTolerance * scale) break;
    if (sweep == kJacobiMaxSweeps) {
      throw NumericError("sym_eig: no convergence after " + std::to_string(kJacobiMaxSweeps) +
                         " sweeps, off-diagonal residual " + std::to_string(off_norm()));
    }
    for (Eigen::Index p = 0; p < d - 1; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index r = 0; r < d; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        for (Eigen::Index r = 0; r < d; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  EigenPair out{Vector(d), Matrix(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = a(src, src);
    Vector col = v.col(src);
    Eigen::Index big = 0;
    for (Eigen::Index r = 1; r < d; ++r)
      if (std::abs(col(r)) > std::abs(col(big))) big = r;
    if (col(big) < 0.0) col = -col;
    out.vectors.col(j) = col;
  }
  return out;
}

double spectral_norm(const Matrix& a) {
  if (!a.allFinite()) throw NumericError("spectral_norm: non-finite entries");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

bool is_psd(const Matrix& a) {
  if (!a.allFinite() || !is_symmetric(a)) return false;
  if (a.size() == 0) return true;
  const EigenPair eig = sym_eig(a);
  const double top = std::max(1.0, std::abs(eig.values(0)));
  return eig.values(eig.values.size() - 1) >= -kPsdTolerance * top;
}

void require_covariance(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw NumericError(std::string(what) + ": covariance is not square");
  if (!a.allFinite()) throw NumericError(std::string(what) + ": covariance has non-finite entries");
  if (!is_symmetric(a)) throw NumericError(std::string(what) + ": covariance is not symmetric");
  if (!is_psd(a)) throw NumericError(std::string(what) + ": not PSD");
}

Matrix sqrt_factor(const Matrix& cov) {
  const Eigen::Index d = cov.rows();
  const Matrix sym = symmetrized(cov);
  const double trace = sym.trace();
  if (trace == 0.0) return Matrix::Zero(d, d);

  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const double jitter = 1e-8 * trace / static_cast<double>(d);
  llt.compute(sym + jitter * Matrix::Identity(d, d));
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const EigenPair eig = sym_eig(sym);
  return eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Matrix gaussian_sample(const Vector& mean, const Matrix& cov, std::size_t n, Rng& rng) {
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d) throw NumericError("gaussian_sample: dimension mismatch");
  require_covariance(cov, "gaussian_sample");

  const Matrix factor = sqrt_factor(cov);
  Matrix out(static_cast<Eigen::Index>(n), d);
  Vector z(d);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
    out.row(i) = (mean + factor * z).transpose();
  }
  return out;
}

}  // namespace noisecal::numkit
