#include "qkf/classical_kernels.hpp"

#include "qkf/errors.hpp"
#include "qkf/parallel.hpp"

#include <cmath>
#include <string>

namespace qkf {

std::string_view to_string(ClassicalKind kind) {
  switch (kind) {
    case ClassicalKind::Rbf: return "rbf";
    case ClassicalKind::Polynomial: return "polynomial";
    case ClassicalKind::Sigmoid: return "sigmoid";
  }
  return "rbf";
}

ClassicalKind parse_classical_kind(std::string_view name) {
  if (name == "rbf") return ClassicalKind::Rbf;
  if (name == "polynomial") return ClassicalKind::Polynomial;
  if (name == "sigmoid") return ClassicalKind::Sigmoid;
  throw Error(ErrorCode::Spec, "unknown classical kernel '" + std::string(name) + "'");
}

void ClassicalKernelSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorCode::Spec, "kernel gamma must be positive and finite");
  if (kind == ClassicalKind::Polynomial && degree < 1)
    throw Error(ErrorCode::Spec, "polynomial degree must be >= 1");
}

namespace {

double squared_distance(std::span<const double> x, std::span<const double> x2) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - x2[k];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> x, std::span<const double> x2) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * x2[k];
  return s;
}

double evaluate(const ClassicalKernelSpec& spec, std::span<const double> x,
                std::span<const double> x2) {
  switch (spec.kind) {
    case ClassicalKind::Rbf:
      return std::exp(-spec.gamma * squared_distance(x, x2));
    case ClassicalKind::Polynomial:
      return std::pow(spec.gamma * dot(x, x2) + spec.c0, spec.degree);
    case ClassicalKind::Sigmoid:
      return std::tanh(spec.gamma * dot(x, x2) + spec.c0);
  }
  return 0.0;
}

}  // namespace

double classical_kernel(const ClassicalKernelSpec& spec, std::span<const double> x,
                        std::span<const double> x2) {
  spec.validate();
  if (x.size() != x2.size())
    throw Error(ErrorCode::Shape, "kernel arguments have different dimensions");
  return evaluate(spec, x, x2);
}

Matrix gram_matrix(const ClassicalKernelSpec& spec, const FeatureMatrix& X,
                   unsigned workers) {
  Matrix K = gram_matrix(spec, X, X, workers);
  return 0.5 * (K + K.transpose());
}

Matrix gram_matrix(const ClassicalKernelSpec& spec, const FeatureMatrix& X,
                   const FeatureMatrix& X2, unsigned workers) {
  spec.validate();
  if (X.rows() == 0 || X2.rows() == 0)
    throw Error(ErrorCode::EmptyInput, "gram matrix of an empty sample list");
  if (X.cols() != X2.cols())
    throw Error(ErrorCode::Shape, "sample lists have different feature dimensions");
  Matrix K(X.rows(), X2.rows());
  parallel_for(static_cast<std::size_t>(X.rows()), workers, [&](std::size_t i) {
    const auto xi = row_span(X, static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < X2.rows(); ++j)
      K(static_cast<Eigen::Index>(i), j) = evaluate(spec, xi, row_span(X2, j));
  });
  return K;
}

Matrix squared_distances(const FeatureMatrix& X) {
  Matrix D(X.rows(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    D(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j)
      D(i, j) = D(j, i) = squared_distance(row_span(X, i), row_span(X, j));
  }
  return D;
}

}  // namespace qkf
