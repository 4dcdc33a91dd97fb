#pragma once

#include <cstddef>
#include <vector>

#include "noisecal/numkit.hpp"

namespace noisecal {

/// One class-conditional Gaussian N(mean, cov) over feature space.
struct GaussianClassModel {
  int class_id = 0;
  numkit::Vector mean;
  numkit::Matrix cov;
  std::size_t count = 1;

  Eigen::Index dim() const { return mean.size(); }
};

/// Features plus one label per row. Used for training views, calibrated
/// samples and clean test sets alike.
struct LabeledSet {
  numkit::Matrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return features.cols(); }
};

}  // namespace noisecal
