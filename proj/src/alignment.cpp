#include "qkf/alignment.hpp"

#include "qkf/dataset_io.hpp"
#include "qkf/errors.hpp"
#include "qkf/random.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace qkf {

double alignment(const Matrix& K1, const Matrix& K2) {
  if (K1.rows() != K1.cols() || K1.rows() != K2.rows() || K1.cols() != K2.cols())
    throw Error(ErrorCode::Shape, "alignment needs two square matrices of equal size");
  const double n1 = K1.norm();
  const double n2 = K2.norm();
  if (n1 == 0.0 || n2 == 0.0)
    throw Error(ErrorCode::DegenerateKernel, "alignment of a zero-norm kernel matrix");
  return K1.cwiseProduct(K2).sum() / (n1 * n2);
}

namespace {

Vector label_vector(const Labels& y) {
  Vector v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1 && y[i] != -1) throw Error(ErrorCode::Parameter, "labels must be +1 or -1");
    v(static_cast<Eigen::Index>(i)) = y[i];
  }
  return v;
}

}  // namespace

double kta(const Matrix& K, const Labels& y) {
  if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != y.size())
    throw Error(ErrorCode::Shape, "kta needs a square kernel matching the label count");
  const double norm = K.norm();
  if (norm == 0.0) throw Error(ErrorCode::DegenerateKernel, "kta of a zero-norm kernel matrix");
  const Vector v = label_vector(y);
  return v.dot(K * v) / (static_cast<double>(y.size()) * norm);
}

std::vector<double> kta_gradient(const KernelSpec& spec, const FeatureMatrix& X,
                                 const Labels& y, double fd_step, unsigned workers) {
  if (!is_trainable(spec))
    throw Error(ErrorCode::NotTrainable, spec.kind_name() + " kernel has no trainable parameters");

  if (const auto* rbf = std::get_if<ClassicalKernelSpec>(&spec.params)) {
    const Matrix D = squared_distances(X);
    const Matrix K = (-rbf->gamma * D).array().exp().matrix();
    const Matrix dK = -D.cwiseProduct(K);
    const Vector v = label_vector(y);
    const double m = static_cast<double>(y.size());
    const double a = v.dot(K * v);
    const double da = v.dot(dK * v);
    const double n = K.norm();
    if (n == 0.0) throw Error(ErrorCode::DegenerateKernel, "kta of a zero-norm kernel matrix");
    const double dn = K.cwiseProduct(dK).sum() / n;
    const double d_gamma = (da * n - a * dn) / (m * n * n);
    return {d_gamma * rbf->gamma};  // chain rule into log(gamma)
  }

  if (!(fd_step > 0.0)) throw Error(ErrorCode::Parameter, "finite-difference step must be positive");
  const auto params = trainable_params(spec);
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto plus = params, minus = params;
    plus[k] += fd_step;
    minus[k] -= fd_step;
    const double f_plus = kta(kernel_gram(with_params(spec, plus), X, workers), y);
    const double f_minus = kta(kernel_gram(with_params(spec, minus), X, workers), y);
    grad[k] = (f_plus - f_minus) / (2.0 * fd_step);
  }
  return grad;
}

Adam::Adam(std::size_t n_params, AdamConfig config)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {
  if (!(config.learning_rate > 0.0)) throw Error(ErrorCode::Parameter, "learning rate must be positive");
}

void Adam::ascend(std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw Error(ErrorCode::Shape, "Adam state does not match parameter vector");
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    params[i] += config_.learning_rate * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + config_.epsilon);
  }
}

std::pair<KernelSpec, KtaReport> train_kta(const KernelSpec& spec, const FeatureMatrix& X,
                                           const Labels& y, const KtaTrainConfig& config) {
  if (!is_trainable(spec))
    throw Error(ErrorCode::NotTrainable, spec.kind_name() + " kernel has no trainable parameters");
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw Error(ErrorCode::Shape, "sample and label counts differ");
  if (config.iterations < 0 || config.log_every < 1 || config.batch_size < 2)
    throw Error(ErrorCode::Parameter, "invalid KTA training configuration");

  KtaReport report;
  report.batch_size = std::min<std::size_t>(config.batch_size, y.size());
  report.learning_rate = config.adam.learning_rate;
  report.seed = config.seed;
  report.initial_params = trainable_params(spec);

  auto params = report.initial_params;
  auto full_kta = [&](const std::vector<double>& p) {
    return kta(kernel_gram(with_params(spec, p), X, config.workers), y);
  };
  report.history.emplace_back(0, full_kta(params));

  Adam adam(params.size(), config.adam);
  Rng rng(config.seed);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = report.batch_size;
  FeatureMatrix Xb(static_cast<Eigen::Index>(batch), X.cols());
  Labels yb(batch);

  for (int it = 1; it <= config.iterations; ++it) {
    // Partial Fisher-Yates: the first `batch` entries become the mini-batch.
    for (std::size_t i = 0; i < batch; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
      std::swap(order[i], order[j]);
      Xb.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[i]));
      yb[i] = y[order[i]];
    }
    const auto grad = kta_gradient(with_params(spec, params), Xb, yb, config.fd_step, config.workers);
    for (double g : grad)
      if (!std::isfinite(g))
        throw DivergenceError("non-finite KTA gradient at iteration " + std::to_string(it), params);
    adam.ascend(params, grad);
    if (it % config.log_every == 0 || it == config.iterations)
      report.history.emplace_back(it, full_kta(params));
  }

  report.final_params = params;
  if (config.iterations == 0) return {spec, std::move(report)};
  return {with_params(spec, params), std::move(report)};
}

void write_kta_history_csv(std::ostream& out, const KtaReport& report) {
  out << "iteration,kta\n";
  for (const auto& [it, value] : report.history) out << it << ',' << format_double(value) << '\n';
}

nlohmann::json kta_summary_json(const KtaReport& report, const KernelSpec& trained) {
  return {
      {"initial_kta", report.initial_kta()},
      {"final_kta", report.final_kta()},
      {"initial_params", report.initial_params},
      {"final_params", report.final_params},
      {"batch_size", report.batch_size},
      {"learning_rate", report.learning_rate},
      {"seed", report.seed},
      {"kernel", to_json(trained)},
  };
}

}  // namespace qkf
