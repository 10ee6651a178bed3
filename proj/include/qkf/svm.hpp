#pragma once

// Soft-margin SVM on a precomputed kernel, solved in the dual
//
//   max_a  sum_m a_m - 1/2 sum_{m,k} y_m y_k a_m a_k K[m][k]
//   s.t.   0 <= a_m <= C,  sum_m a_m y_m = 0
//
// with SMO over maximal-violating pairs. The primal weights are never formed;
// prediction goes through kernel evaluations against the support vectors.

#include "qkf/kernel.hpp"
#include "qkf/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace qkf {

struct SolverOptions {
  double tol = 1e-3;             // stop when the maximal KKT violation is <= tol
  std::size_t max_iter = 0;      // pair updates; 0 means 10^4 * M
  double support_eps = 1e-8;
  double min_curvature = 1e-12;  // pairs with eta <= this are skipped
};

struct SolverDiagnostics {
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  bool converged = false;
  // Set when no remaining violating pair has usable curvature.
  bool stalled = false;
  double objective = 0.0;  // dual objective at the returned iterate
};

struct DualSolution {
  std::vector<double> alpha;
  double b = 0.0;
  std::vector<std::size_t> support_indices;
  SolverDiagnostics diagnostics;
};

double dual_objective(const Matrix& K, const Labels& y, const std::vector<double>& alpha);

// Non-convergence is reported through diagnostics, never thrown.
DualSolution solve_dual(const Matrix& K, const Labels& y, double C,
                        const SolverOptions& options = {});

struct SvmModel {
  std::vector<double> alpha;  // one per training sample
  double b = 0.0;
  std::vector<std::size_t> support_indices;
  Labels y_train;
  FeatureMatrix X_train;  // scaled with kernel.scaler
  KernelSpec kernel;
  double C = 1.0;
  SolverDiagnostics diagnostics;
};

SvmModel make_model(DualSolution solution, const Labels& y, FeatureMatrix X,
                    KernelSpec kernel, double C);

// Trains on scaled features X.
SvmModel fit_svm(const KernelSpec& kernel, const FeatureMatrix& X, const Labels& y, double C,
                 const SolverOptions& options = {}, unsigned workers = 1);

// f(x) = sum_{m in support} a_m y_m k(x_m, x) + b
double decision_value(const SvmModel& model, std::span<const double> x);
Vector decision_values(const SvmModel& model, const FeatureMatrix& X, unsigned workers = 1);

// sign(f); f == 0 maps to +1.
int sign_label(double f);
Labels predict(const SvmModel& model, const FeatureMatrix& X, unsigned workers = 1);

// Stores only the support vectors; a loaded model has X_train equal to them.
nlohmann::json to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& j);

}  // namespace qkf
