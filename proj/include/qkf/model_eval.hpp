#pragma once

// Classification scores, stratified k-fold grid search over C, and learning
// curves on nested training subsets. The positive class is y = +1 (non-failed).

#include "qkf/kernel.hpp"
#include "qkf/svm.hpp"
#include "qkf/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qkf {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(const Labels& truth, const Labels& predicted);

// Ratios with a zero denominator are left empty rather than reported as 0.
struct Metrics {
  double accuracy = 0.0;
  std::optional<double> jaccard;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
};

Metrics classification_metrics(const ConfusionCounts& counts);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const ConfusionCounts& c);

// Validation indices per fold. Each class is shuffled and dealt round-robin,
// continuing across classes so fold sizes differ by at most one.
std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, int folds,
                                                       std::uint64_t seed);

struct CvCell {
  double C = 1.0;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
  std::vector<bool> fold_converged;
};

struct CvResult {
  std::vector<CvCell> grid;
  double best_C = 1.0;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Gram matrix is computed once on X and sliced per fold. Duplicate C values
// are dropped with a warning. The best C maximizes mean validation accuracy;
// ties go to the smallest C.
CvResult grid_search_cv(const KernelSpec& spec, const FeatureMatrix& X, const Labels& y,
                        const std::vector<double>& C_grid, int folds, std::uint64_t seed,
                        const SolverOptions& options = {}, unsigned workers = 1);

void write_cv_csv(std::ostream& out, const CvResult& cv);
nlohmann::json to_json(const CvResult& cv);

struct CurvePoint {
  double fraction = 0.0;
  std::size_t n_train = 0;
  ConfusionCounts counts;
  Metrics metrics;
  bool converged = false;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  std::size_t test_size = 0;
  std::uint64_t seed = 0;
};

// Sample order whose every prefix is stratified: members of each class are
// shuffled and interleaved by their relative rank within the class.
std::vector<std::size_t> stratified_order(const Labels& y, std::uint64_t seed);

// N_train = floor(fraction * |train|); subsets are prefixes of
// stratified_order, so smaller subsets are contained in larger ones.
std::size_t subset_size(double fraction, std::size_t total);

LearningCurve learning_curve(const KernelSpec& spec, const FeatureMatrix& X_train,
                             const Labels& y_train, const FeatureMatrix& X_test,
                             const Labels& y_test, double C,
                             const std::vector<double>& fractions, std::uint64_t seed,
                             const SolverOptions& options = {}, unsigned workers = 1);

void write_curve_csv(std::ostream& out, const LearningCurve& curve);
nlohmann::json to_json(const LearningCurve& curve);

}  // namespace qkf
