#include "noisecal/classifier.hpp"

#include "noisecal/error.hpp"

namespace noisecal::trainer {

LinearClassifier LinearClassifier::zeros(int num_classes, Eigen::Index dim) {
  if (num_classes < 2) throw NumericError("classifier: need k >= 2");
  return {Matrix::Zero(num_classes, dim), Vector::Zero(num_classes)};
}

Vector logits(const LinearClassifier& f, const Vector& x) {
  if (x.size() != f.dim()) throw NumericError("classifier: dimension mismatch");
  return f.weights * x + f.bias;
}

Vector predict_proba(const LinearClassifier& f, const Vector& x) {
  const Vector z = logits(f, x);
  const Vector e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Matrix predict_proba(const LinearClassifier& f, const Matrix& features) {
  if (features.cols() != f.dim()) throw NumericError("classifier: dimension mismatch");
  Matrix z = (features * f.weights.transpose()).rowwise() + f.bias.transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    z.row(i).array() = (z.row(i).array() - z.row(i).maxCoeff()).exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

int predicted_label(const Vector& proba) {
  if (proba.size() == 2) return proba(1) >= 0.5 ? 1 : 0;
  Eigen::Index best = 0;
  proba.maxCoeff(&best);
  return static_cast<int>(best);
}

std::vector<int> predict_labels(const LinearClassifier& f, const Matrix& features) {
  const Matrix p = predict_proba(f, features);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = predicted_label(p.row(i).transpose());
  return out;
}

}  // namespace noisecal::trainer
