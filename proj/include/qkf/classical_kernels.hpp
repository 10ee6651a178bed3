#pragma once

#include "qkf/types.hpp"

#include <span>
#include <string_view>

namespace qkf {

enum class ClassicalKind { Rbf, Polynomial, Sigmoid };

std::string_view to_string(ClassicalKind kind);
ClassicalKind parse_classical_kind(std::string_view name);

// rbf:        exp(-gamma |x - x'|^2)
// polynomial: (gamma x.x' + c0)^degree
// sigmoid:    tanh(gamma x.x' + c0)
struct ClassicalKernelSpec {
  ClassicalKind kind = ClassicalKind::Rbf;
  double gamma = 1.0;
  double c0 = 0.0;
  int degree = 3;

  void validate() const;
  bool operator==(const ClassicalKernelSpec&) const = default;
};

double classical_kernel(const ClassicalKernelSpec& spec, std::span<const double> x,
                        std::span<const double> x2);

// Square Gram matrix over the rows of X, symmetrized as (K + K^T) / 2.
Matrix gram_matrix(const ClassicalKernelSpec& spec, const FeatureMatrix& X,
                   unsigned workers = 1);

// Rectangular block K[i][j] = k(X[i], X2[j]).
Matrix gram_matrix(const ClassicalKernelSpec& spec, const FeatureMatrix& X,
                   const FeatureMatrix& X2, unsigned workers = 1);

// Pairwise squared distances |X[i] - X[j]|^2 (used by the RBF gradient).
Matrix squared_distances(const FeatureMatrix& X);

}  // namespace qkf
