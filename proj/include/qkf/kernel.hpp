#pragma once

// Tagged kernel description shared by alignment, the SVM and the pipeline.

#include "qkf/classical_kernels.hpp"
#include "qkf/data_pipeline.hpp"
#include "qkf/quantum_kernels.hpp"

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace qkf {

struct KernelSpec {
  std::variant<ClassicalKernelSpec, EmbeddingSpec> params;
  // Feature scaling expected by this kernel.
  Scaler scaler = Scaler::classical();

  static KernelSpec rbf(double gamma);
  static KernelSpec quantum(EmbeddingSpec embedding);

  bool is_quantum() const { return std::holds_alternative<EmbeddingSpec>(params); }
  // "rbf", "polynomial", "sigmoid", "iqp" or "he2"
  std::string kind_name() const;
  // e.g. "rbf" or "he2_W6D3"
  std::string default_name() const;
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

// Both arguments must already be scaled with spec.scaler.
Matrix kernel_gram(const KernelSpec& spec, const FeatureMatrix& X, unsigned workers = 1);
Matrix kernel_cross(const KernelSpec& spec, const FeatureMatrix& X, const FeatureMatrix& X2,
                    unsigned workers = 1);

// RBF is trained in log(gamma); HE2 in raw angles. Everything else is fixed.
bool is_trainable(const KernelSpec& spec);
std::vector<double> trainable_params(const KernelSpec& spec);
KernelSpec with_params(const KernelSpec& spec, const std::vector<double>& params);

nlohmann::json to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

}  // namespace qkf
