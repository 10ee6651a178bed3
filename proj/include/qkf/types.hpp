#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace qkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One sample per row; rows are contiguous so they can be viewed as spans.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Labels are +1 (non-failed) or -1 (failed).
using Labels = std::vector<int>;

inline std::span<const double> row_span(const FeatureMatrix& X, Eigen::Index i) {
  return {X.data() + i * X.cols(), static_cast<std::size_t>(X.cols())};
}

}  // namespace qkf
