#include "qkf/model_eval.hpp"

#include "qkf/dataset_io.hpp"
#include "qkf/errors.hpp"
#include "qkf/parallel.hpp"
#include "qkf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace qkf {

ConfusionCounts confusion(const Labels& truth, const Labels& predicted) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::Shape, "label vectors differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] > 0, guess = predicted[i] > 0;
    if (actual && guess) ++c.tp;
    else if (!actual && guess) ++c.fp;
    else if (actual && !guess) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Metrics classification_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyEvaluation, "no evaluated samples");
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.jaccard = ratio(c.tp, c.tp + c.fp + c.fn);
  return m;
}

nlohmann::json to_json(const Metrics& m) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"accuracy", m.accuracy},
          {"jaccard", opt(m.jaccard)},
          {"precision", opt(m.precision)},
          {"recall", opt(m.recall)},
          {"specificity", opt(m.specificity)}};
}

nlohmann::json to_json(const ConfusionCounts& c) {
  return {{"TP", c.tp}, {"FP", c.fp}, {"FN", c.fn}, {"TN", c.tn}};
}

std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, int folds,
                                                       std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::Parameter, "cross-validation needs at least 2 folds");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] > 0 ? 0 : 1].push_back(i);
  for (const auto& members : by_class)
    if (members.size() < static_cast<std::size_t>(folds))
      throw Error(ErrorCode::Stratification,
                  "every fold needs both classes: a class has fewer members than folds");

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto idx : members) {
      out[next].push_back(idx);
      next = (next + 1) % out.size();
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

namespace {

Matrix slice(const Matrix& K, const std::vector<std::size_t>& rows,
             const std::vector<std::size_t>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          K(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
  return out;
}

Labels pick(const Labels& y, const std::vector<std::size_t>& idx) {
  Labels out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(y[i]);
  return out;
}

// Labels of samples whose kernel rows against the training set are K_cross
// (one row per evaluated sample).
Labels predict_from_cross(const Matrix& K_cross, const DualSolution& sol, const Labels& y_train) {
  Vector coef(static_cast<Eigen::Index>(y_train.size()));
  for (std::size_t m = 0; m < y_train.size(); ++m)
    coef(static_cast<Eigen::Index>(m)) = sol.alpha[m] * y_train[m];
  const Vector f = (K_cross * coef).array() + sol.b;
  Labels out(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = sign_label(f(i));
  return out;
}

}  // namespace

CvResult grid_search_cv(const KernelSpec& spec, const FeatureMatrix& X, const Labels& y,
                        const std::vector<double>& C_grid, int folds, std::uint64_t seed,
                        const SolverOptions& options, unsigned workers) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw Error(ErrorCode::Shape, "sample and label counts differ");
  if (C_grid.empty()) throw Error(ErrorCode::Parameter, "empty C grid");

  CvResult result;
  result.folds = folds;
  result.seed = seed;
  std::vector<double> grid;
  for (double C : C_grid) {
    if (!(C > 0.0) || !std::isfinite(C))
      throw Error(ErrorCode::Parameter, "C values must be positive and finite");
    if (std::find(grid.begin(), grid.end(), C) != grid.end()) {
      result.warnings.push_back("duplicate C value " + format_double(C) + " ignored");
      continue;
    }
    grid.push_back(C);
  }

  const auto fold_sets = stratified_folds(y, folds, seed);
  const Matrix K = kernel_gram(spec, X, workers);

  struct FoldData {
    Matrix K_train, K_val;
    Labels y_train, y_val;
  };
  std::vector<FoldData> data;
  for (const auto& val : fold_sets) {
    std::vector<std::size_t> train;
    std::size_t v = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (v < val.size() && val[v] == i) {
        ++v;
        continue;
      }
      train.push_back(i);
    }
    data.push_back({slice(K, train, train), slice(K, val, train), pick(y, train), pick(y, val)});
  }

  const std::size_t n_folds = fold_sets.size();
  std::vector<double> acc(grid.size() * n_folds);
  std::vector<char> conv(grid.size() * n_folds);
  parallel_for(acc.size(), workers, [&](std::size_t task) {
    const auto& fd = data[task % n_folds];
    const double C = grid[task / n_folds];
    const auto sol = solve_dual(fd.K_train, fd.y_train, C, options);
    const auto pred = predict_from_cross(fd.K_val, sol, fd.y_train);
    acc[task] = classification_metrics(confusion(fd.y_val, pred)).accuracy;
    conv[task] = sol.diagnostics.converged;
  });

  double best = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CvCell cell;
    cell.C = grid[g];
    for (std::size_t f = 0; f < n_folds; ++f) {
      cell.fold_accuracy.push_back(acc[g * n_folds + f]);
      cell.fold_converged.push_back(conv[g * n_folds + f] != 0);
    }
    cell.mean_accuracy = std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) /
                         static_cast<double>(n_folds);
    if (cell.mean_accuracy > best || (cell.mean_accuracy == best && cell.C < result.best_C)) {
      best = cell.mean_accuracy;
      result.best_C = cell.C;
    }
    result.grid.push_back(std::move(cell));
  }
  return result;
}

void write_cv_csv(std::ostream& out, const CvResult& cv) {
  out << "C,mean_accuracy,all_converged";
  for (int f = 0; f < cv.folds; ++f) out << ",fold" << f << "_accuracy";
  out << '\n';
  for (const auto& cell : cv.grid) {
    const bool all = std::all_of(cell.fold_converged.begin(), cell.fold_converged.end(),
                                 [](bool b) { return b; });
    out << format_double(cell.C) << ',' << format_double(cell.mean_accuracy) << ',' << (all ? 1 : 0);
    for (double a : cell.fold_accuracy) out << ',' << format_double(a);
    out << '\n';
  }
}

nlohmann::json to_json(const CvResult& cv) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& cell : cv.grid)
    grid.push_back({{"C", cell.C},
                    {"mean_accuracy", cell.mean_accuracy},
                    {"fold_accuracy", cell.fold_accuracy},
                    {"fold_converged", cell.fold_converged}});
  return {{"best_C", cv.best_C},
          {"folds", cv.folds},
          {"seed", cv.seed},
          {"grid", grid},
          {"warnings", cv.warnings}};
}

std::vector<std::size_t> stratified_order(const Labels& y, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] > 0 ? 0 : 1].push_back(i);
  Rng rng(seed);
  struct Keyed {
    double key;
    int cls;
    std::size_t index;
  };
  std::vector<Keyed> keyed;
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    const auto n = static_cast<double>(members.size());
    for (std::size_t r = 0; r < members.size(); ++r)
      keyed.push_back({(static_cast<double>(r) + 0.5) / n, c, members[r]});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.key < b.key || (a.key == b.key && a.cls < b.cls);
  });
  std::vector<std::size_t> order;
  order.reserve(keyed.size());
  for (const auto& k : keyed) order.push_back(k.index);
  return order;
}

std::size_t subset_size(double fraction, std::size_t total) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorCode::Parameter, "learning-curve fractions must lie in (0, 1]");
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 1e-9));
}

LearningCurve learning_curve(const KernelSpec& spec, const FeatureMatrix& X_train,
                             const Labels& y_train, const FeatureMatrix& X_test,
                             const Labels& y_test, double C,
                             const std::vector<double>& fractions, std::uint64_t seed,
                             const SolverOptions& options, unsigned workers) {
  if (static_cast<std::size_t>(X_train.rows()) != y_train.size() ||
      static_cast<std::size_t>(X_test.rows()) != y_test.size())
    throw Error(ErrorCode::Shape, "sample and label counts differ");
  if (fractions.empty()) throw Error(ErrorCode::Parameter, "no learning-curve fractions");
  std::vector<std::size_t> sizes;
  for (double f : fractions) {
    sizes.push_back(subset_size(f, y_train.size()));
    if (sizes.size() > 1 && sizes.back() <= sizes[sizes.size() - 2])
      throw Error(ErrorCode::Parameter, "learning-curve sizes must strictly increase");
  }

  const auto order = stratified_order(y_train, seed);
  const Matrix K = kernel_gram(spec, X_train, workers);
  const Matrix K_test = kernel_cross(spec, X_test, X_train, workers);
  std::vector<std::size_t> all_test(y_test.size());
  std::iota(all_test.begin(), all_test.end(), std::size_t{0});

  LearningCurve curve;
  curve.test_size = y_test.size();
  curve.seed = seed;
  curve.points.resize(fractions.size());
  parallel_for(fractions.size(), workers, [&](std::size_t p) {
    std::vector<std::size_t> subset(order.begin(), order.begin() + sizes[p]);
    const Labels y_sub = pick(y_train, subset);
    const auto sol = solve_dual(slice(K, subset, subset), y_sub, C, options);
    const auto pred = predict_from_cross(slice(K_test, all_test, subset), sol, y_sub);
    auto& point = curve.points[p];
    point.fraction = fractions[p];
    point.n_train = sizes[p];
    point.counts = confusion(y_test, pred);
    point.metrics = classification_metrics(point.counts);
    point.converged = sol.diagnostics.converged;
  });
  return curve;
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "fraction,n_train,accuracy,jaccard,precision,recall,specificity,converged\n";
  for (const auto& p : curve.points) {
    out << format_double(p.fraction) << ',' << p.n_train << ',' << format_double(p.metrics.accuracy)
        << ',' << opt(p.metrics.jaccard) << ',' << opt(p.metrics.precision) << ','
        << opt(p.metrics.recall) << ',' << opt(p.metrics.specificity) << ',' << (p.converged ? 1 : 0)
        << '\n';
  }
}

nlohmann::json to_json(const LearningCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points)
    points.push_back({{"fraction", p.fraction},
                      {"n_train", p.n_train},
                      {"counts", to_json(p.counts)},
                      {"metrics", to_json(p.metrics)},
                      {"converged", p.converged}});
  return {{"test_size", curve.test_size}, {"seed", curve.seed}, {"points", points}};
}

}  // namespace qkf
