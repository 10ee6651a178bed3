#include "qkf/errors.hpp"

namespace qkf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRecord: return "invalid-record";
    case ErrorCode::ShearSingularity: return "shear-singularity";
    case ErrorCode::DegeneratePath: return "degenerate-path";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::EmptyDataset: return "empty-dataset";
    case ErrorCode::Stratification: return "stratification";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::Capacity: return "capacity";
    case ErrorCode::Spec: return "spec";
    case ErrorCode::DegenerateKernel: return "degenerate-kernel";
    case ErrorCode::NotTrainable: return "not-trainable";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::DegenerateLabels: return "degenerate-labels";
    case ErrorCode::Parameter: return "parameter";
    case ErrorCode::EmptyEvaluation: return "empty-evaluation";
    case ErrorCode::Config: return "config";
    case ErrorCode::Dependency: return "dependency";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace qkf
