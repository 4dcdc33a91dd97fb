#pragma once

#include <span>
#include <vector>

#include "noisecal/numkit.hpp"

namespace noisecal::trainer {

using numkit::Matrix;
using numkit::Vector;

/// Softmax-linear classifier f(x) = softmax(W x + b) over feature vectors.
struct LinearClassifier {
  Matrix weights;  // k x d
  Vector bias;     // k

  static LinearClassifier zeros(int num_classes, Eigen::Index dim);

  int num_classes() const { return static_cast<int>(weights.rows()); }
  Eigen::Index dim() const { return weights.cols(); }
  bool finite() const { return weights.allFinite() && bias.allFinite(); }
};

Vector logits(const LinearClassifier& f, const Vector& x);

/// Class probabilities; sums to one.
Vector predict_proba(const LinearClassifier& f, const Vector& x);

/// Row-wise probabilities for an n x d feature matrix (n x k result).
Matrix predict_proba(const LinearClassifier& f, const Matrix& features);

/// Binary: 1{f_1(x) >= 1/2}. Multi-class: argmax (lowest index on ties).
int predicted_label(const Vector& proba);

std::vector<int> predict_labels(const LinearClassifier& f, const Matrix& features);

}  // namespace noisecal::trainer
