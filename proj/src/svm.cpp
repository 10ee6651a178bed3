#include "qkf/svm.hpp"

#include "qkf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace qkf {

double dual_objective(const Matrix& K, const Labels& y, const std::vector<double>& alpha) {
  Vector ay(static_cast<Eigen::Index>(alpha.size()));
  for (std::size_t i = 0; i < alpha.size(); ++i)
    ay(static_cast<Eigen::Index>(i)) = alpha[i] * y[i];
  const double linear = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  return linear - 0.5 * ay.dot(K * ay);
}

namespace {

// Working state of one SMO solve. `grad` is the gradient of the minimization
// form 1/2 a^T Q a - e^T a with Q = (y y^T) o K, so -y_t grad_t is the
// bias that would put sample t exactly on its margin.
struct Smo {
  const Matrix& K;
  const Labels& y;
  double C;
  SolverOptions opt;
  std::vector<double> alpha;
  std::vector<double> grad;

  Smo(const Matrix& k, const Labels& labels, double c, const SolverOptions& o)
      : K(k), y(labels), C(c), opt(o), alpha(labels.size(), 0.0), grad(labels.size(), -1.0) {}

  std::size_t size() const { return y.size(); }
  bool in_up(std::size_t t) const { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; }
  bool in_low(std::size_t t) const { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; }
  double score(std::size_t t) const { return -y[t] * grad[t]; }
  double curvature(std::size_t i, std::size_t j) const {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    return K(a, a) + K(b, b) - 2.0 * K(a, b);
  }

  // Maximal violating pair; ties resolve to the lowest index.
  struct Pair {
    std::size_t i, j;
    double gap;
  };
  std::optional<Pair> max_violating_pair() const {
    double best_up = -std::numeric_limits<double>::infinity();
    double best_low = std::numeric_limits<double>::infinity();
    std::size_t i = size(), j = size();
    for (std::size_t t = 0; t < size(); ++t) {
      if (in_up(t) && score(t) > best_up) {
        best_up = score(t);
        i = t;
      }
      if (in_low(t) && score(t) < best_low) {
        best_low = score(t);
        j = t;
      }
    }
    if (i == size() || j == size()) return std::nullopt;
    return Pair{i, j, best_up - best_low};
  }

  // Most violating pair whose curvature exceeds the guard, scanning i by
  // decreasing and j by increasing score.
  std::optional<Pair> fallback_pair() const {
    std::vector<std::size_t> up, low;
    for (std::size_t t = 0; t < size(); ++t) {
      if (in_up(t)) up.push_back(t);
      if (in_low(t)) low.push_back(t);
    }
    auto by_score_desc = [this](std::size_t a, std::size_t b) {
      return score(a) > score(b) || (score(a) == score(b) && a < b);
    };
    auto by_score_asc = [this](std::size_t a, std::size_t b) {
      return score(a) < score(b) || (score(a) == score(b) && a < b);
    };
    std::sort(up.begin(), up.end(), by_score_desc);
    std::sort(low.begin(), low.end(), by_score_asc);
    for (auto i : up)
      for (auto j : low) {
        const double gap = score(i) - score(j);
        if (gap <= opt.tol) break;
        if (i != j && curvature(i, j) > opt.min_curvature) return Pair{i, j, gap};
      }
    return std::nullopt;
  }

  void update(const Pair& p) {
    const auto [i, j, gap] = p;
    const double eta = curvature(i, j);
    const double room_i = y[i] > 0 ? C - alpha[i] : alpha[i];
    const double room_j = y[j] > 0 ? alpha[j] : C - alpha[j];
    double step = gap / eta;
    bool clip_i = false, clip_j = false;
    if (step >= room_i) {
      step = room_i;
      clip_i = true;
    }
    if (step >= room_j) {
      step = room_j;
      clip_j = true;
      clip_i = room_i == room_j;
    }
    alpha[i] += y[i] * step;
    alpha[j] -= y[j] * step;
    if (clip_i) alpha[i] = y[i] > 0 ? C : 0.0;
    if (clip_j) alpha[j] = y[j] > 0 ? 0.0 : C;
    alpha[i] = std::clamp(alpha[i], 0.0, C);
    alpha[j] = std::clamp(alpha[j], 0.0, C);

    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    for (std::size_t t = 0; t < size(); ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      grad[t] += y[t] * step * (K(tt, ii) - K(tt, jj));
    }
  }

  double bias() const {
    double sum = 0.0;
    std::size_t free = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < size(); ++t) {
      const double r = score(t);
      if (alpha[t] > 0.0 && alpha[t] < C) {
        sum += r;
        ++free;
      } else if ((alpha[t] == 0.0) == (y[t] > 0)) {
        lower = std::max(lower, r);
      } else {
        upper = std::min(upper, r);
      }
    }
    if (free > 0) return sum / static_cast<double>(free);
    if (std::isfinite(lower) && std::isfinite(upper)) return 0.5 * (lower + upper);
    if (std::isfinite(lower)) return lower;
    if (std::isfinite(upper)) return upper;
    return 0.0;
  }
};

}  // namespace

DualSolution solve_dual(const Matrix& K, const Labels& y, double C,
                        const SolverOptions& options) {
  if (!(C > 0.0) || !std::isfinite(C))
    throw Error(ErrorCode::Parameter, "slack penalty C must be positive and finite");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::Parameter, "solver tolerance must be positive");
  if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != y.size())
    throw Error(ErrorCode::Shape, "kernel matrix does not match label count");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(ErrorCode::Parameter, "labels must be +1 or -1");
  }
  if (!pos || !neg)
    throw Error(ErrorCode::DegenerateLabels, "SVM training needs both classes");

  Smo smo(K, y, C, options);
  const std::size_t max_iter = options.max_iter ? options.max_iter : 10000 * y.size();
  SolverDiagnostics diag;
  while (true) {
    auto pair = smo.max_violating_pair();
    if (!pair || pair->gap <= options.tol) {
      diag.converged = true;
      diag.kkt_violation = pair ? std::max(0.0, pair->gap) : 0.0;
      break;
    }
    diag.kkt_violation = pair->gap;
    if (diag.iterations >= max_iter) break;
    if (smo.curvature(pair->i, pair->j) <= options.min_curvature) {
      pair = smo.fallback_pair();
      if (!pair) {
        diag.stalled = true;
        break;
      }
    }
    smo.update(*pair);
    ++diag.iterations;
  }

  DualSolution sol;
  sol.b = smo.bias();
  sol.alpha = std::move(smo.alpha);
  for (std::size_t t = 0; t < sol.alpha.size(); ++t)
    if (sol.alpha[t] > options.support_eps) sol.support_indices.push_back(t);
  diag.objective = dual_objective(K, y, sol.alpha);
  sol.diagnostics = diag;
  return sol;
}

SvmModel make_model(DualSolution solution, const Labels& y, FeatureMatrix X,
                    KernelSpec kernel, double C) {
  SvmModel m;
  m.alpha = std::move(solution.alpha);
  m.b = solution.b;
  m.support_indices = std::move(solution.support_indices);
  m.y_train = y;
  m.X_train = std::move(X);
  m.kernel = std::move(kernel);
  m.C = C;
  m.diagnostics = solution.diagnostics;
  return m;
}

SvmModel fit_svm(const KernelSpec& kernel, const FeatureMatrix& X, const Labels& y, double C,
                 const SolverOptions& options, unsigned workers) {
  const Matrix K = kernel_gram(kernel, X, workers);
  return make_model(solve_dual(K, y, C, options), y, X, kernel, C);
}

namespace {

FeatureMatrix support_rows(const SvmModel& model) {
  FeatureMatrix S(static_cast<Eigen::Index>(model.support_indices.size()), model.X_train.cols());
  for (std::size_t s = 0; s < model.support_indices.size(); ++s)
    S.row(static_cast<Eigen::Index>(s)) =
        model.X_train.row(static_cast<Eigen::Index>(model.support_indices[s]));
  return S;
}

}  // namespace

Vector decision_values(const SvmModel& model, const FeatureMatrix& X, unsigned workers) {
  Vector f = Vector::Constant(X.rows(), model.b);
  if (model.support_indices.empty() || X.rows() == 0) return f;
  const Matrix Ks = kernel_cross(model.kernel, support_rows(model), X, workers);
  Vector coef(Ks.rows());
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    const auto m = model.support_indices[s];
    coef(static_cast<Eigen::Index>(s)) = model.alpha[m] * model.y_train[m];
  }
  f += Ks.transpose() * coef;
  return f;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  FeatureMatrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) row(0, static_cast<Eigen::Index>(k)) = x[k];
  if (row.cols() != model.X_train.cols())
    throw Error(ErrorCode::Shape, "sample dimension does not match the model");
  return decision_values(model, row)(0);
}

int sign_label(double f) { return f < 0.0 ? -1 : 1; }

Labels predict(const SvmModel& model, const FeatureMatrix& X, unsigned workers) {
  const Vector f = decision_values(model, X, workers);
  Labels out(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = sign_label(f(i));
  return out;
}

nlohmann::json to_json(const SvmModel& model) {
  nlohmann::json support = nlohmann::json::array();
  for (auto m : model.support_indices) {
    std::vector<double> x(model.X_train.row(static_cast<Eigen::Index>(m)).begin(),
                          model.X_train.row(static_cast<Eigen::Index>(m)).end());
    support.push_back({{"x", x}, {"y", model.y_train[m]}, {"alpha", model.alpha[m]}});
  }
  const auto& d = model.diagnostics;
  return {
      {"C", model.C},
      {"b", model.b},
      {"kernel", to_json(model.kernel)},
      {"scaler", to_json(model.kernel.scaler)},
      {"support", support},
      {"diagnostics",
       {{"iterations", d.iterations},
        {"kkt_violation", d.kkt_violation},
        {"converged", d.converged},
        {"stalled", d.stalled},
        {"objective", d.objective}}},
  };
}

SvmModel model_from_json(const nlohmann::json& j) {
  try {
    SvmModel m;
    m.C = j.at("C").get<double>();
    m.b = j.at("b").get<double>();
    m.kernel = kernel_from_json(j.at("kernel"));
    const auto& support = j.at("support");
    const auto n = static_cast<Eigen::Index>(support.size());
    const auto dim = n ? static_cast<Eigen::Index>(support.at(0).at("x").size()) : 3;
    m.X_train.resize(n, dim);
    for (Eigen::Index s = 0; s < n; ++s) {
      const auto& sv = support.at(static_cast<std::size_t>(s));
      const auto x = sv.at("x").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(x.size()) != dim)
        throw Error(ErrorCode::Shape, "support vectors have inconsistent dimensions");
      for (Eigen::Index k = 0; k < dim; ++k) m.X_train(s, k) = x[static_cast<std::size_t>(k)];
      m.y_train.push_back(sv.at("y").get<int>());
      m.alpha.push_back(sv.at("alpha").get<double>());
      m.support_indices.push_back(static_cast<std::size_t>(s));
    }
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      m.diagnostics.iterations = d.value("iterations", std::size_t{0});
      m.diagnostics.kkt_violation = d.value("kkt_violation", 0.0);
      m.diagnostics.converged = d.value("converged", false);
      m.diagnostics.stalled = d.value("stalled", false);
      m.diagnostics.objective = d.value("objective", 0.0);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace qkf
