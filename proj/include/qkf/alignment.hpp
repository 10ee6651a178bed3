#pragma once

// Kernel alignment, kernel-target alignment (KTA) and Adam ascent on KTA.

#include "qkf/kernel.hpp"
#include "qkf/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace qkf {

// <K1, K2>_F / (|K1|_F |K2|_F)
double alignment(const Matrix& K1, const Matrix& K2);

// alignment(K, y y^T) = y^T K y / (M |K|_F), without forming y y^T.
double kta(const Matrix& K, const Labels& y);

inline constexpr double kDefaultFdStep = 1e-4;

// Gradient of full-input KTA with respect to trainable_params(spec):
// closed form in log(gamma) for RBF, central differences for HE2 angles.
std::vector<double> kta_gradient(const KernelSpec& spec, const FeatureMatrix& X,
                                 const Labels& y, double fd_step = kDefaultFdStep,
                                 unsigned workers = 1);

struct AdamConfig {
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam moments for gradient ascent.
class Adam {
 public:
  Adam(std::size_t n_params, AdamConfig config);

  void ascend(std::vector<double>& params, const std::vector<double>& grad);

  std::size_t steps() const { return step_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t step_ = 0;
};

struct KtaTrainConfig {
  int iterations = 200;
  AdamConfig adam;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  int log_every = 10;
  double fd_step = kDefaultFdStep;
  unsigned workers = 1;
};

struct KtaReport {
  std::vector<std::pair<int, double>> history;  // (iteration, full-data KTA)
  std::vector<double> initial_params;
  std::vector<double> final_params;
  std::size_t batch_size = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;

  double initial_kta() const { return history.front().second; }
  double final_kta() const { return history.back().second; }
};

// Adam ascent on mini-batch KTA; full-data KTA is logged at iteration 0,
// every `log_every` steps and after the last step.
std::pair<KernelSpec, KtaReport> train_kta(const KernelSpec& spec, const FeatureMatrix& X,
                                           const Labels& y, const KtaTrainConfig& config);

void write_kta_history_csv(std::ostream& out, const KtaReport& report);
nlohmann::json kta_summary_json(const KtaReport& report, const KernelSpec& trained);

}  // namespace qkf
