#include "qkf/alignment.hpp"
#include "qkf/data_pipeline.hpp"
#include "qkf/errors.hpp"
#include "qkf/random.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace qkf;

namespace {

FeatureMatrix random_features(Rng& rng, int rows, double lo = -1, double hi = 1) {
  FeatureMatrix X(rows, 3);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = rng.uniform(lo, hi);
  return X;
}

Labels random_labels(Rng& rng, int n) {
  Labels y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.below(2) ? 1 : -1;
  y[0] = 1;
  y[1] = -1;
  return y;
}

Matrix target(const Labels& y) {
  Vector v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(i) = y[i];
  return v * v.transpose();
}

double rbf_kta(const FeatureMatrix& X, const Labels& y, double gamma) {
  return kta(kernel_gram(KernelSpec::rbf(gamma), X), y);
}

}  // namespace

TEST_CASE("alignment examples") {
  const Matrix I = Matrix::Identity(2, 2);
  const Labels y{1, -1};
  CHECK(alignment(I, target(y)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  Rng rng(1);
  const Matrix A = Matrix::Random(5, 5);
  const Matrix K = A * A.transpose();
  CHECK(alignment(K, K) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(alignment(K, 3.5 * K) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(alignment(Matrix::Zero(2, 2), I), Error);
  CHECK_THROWS_AS(alignment(I, Matrix::Identity(3, 3)), Error);
}

TEST_CASE("kta examples and invariants") {
  Rng rng(2);
  for (int m : {2, 5, 17, 64}) {
    const auto y = random_labels(rng, m);
    CHECK(kta(target(y), y) == 1.0);
    CHECK(std::abs(kta(Matrix::Identity(m, m), y) - 1.0 / std::sqrt(double(m))) <= 1e-12);

    const auto X = random_features(rng, m);
    const Matrix K = kernel_gram(KernelSpec::rbf(0.8), X);
    Labels flipped(y);
    for (auto& v : flipped) v = -v;
    CHECK(kta(K, flipped) == doctest::Approx(kta(K, y)).epsilon(1e-14));
    CHECK(std::abs(kta(K, y) - alignment(K, target(y))) <= 1e-12);

    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    rng.shuffle(std::span<int>(perm));
    Matrix Kp(m, m);
    Labels yp(m);
    for (int i = 0; i < m; ++i) {
      yp[i] = y[perm[i]];
      for (int j = 0; j < m; ++j) Kp(i, j) = K(perm[i], perm[j]);
    }
    CHECK(kta(Kp, yp) == doctest::Approx(kta(K, y)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(kta(Matrix::Identity(2, 2), Labels{1, 0}), Error);
}

TEST_CASE("alignment of random symmetric matrices is bounded") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Matrix A = Matrix::Random(6, 6), B = Matrix::Random(6, 6);
    CHECK(std::abs(alignment(A + A.transpose(), B + B.transpose())) <= 1.0 + 1e-15);
  }
}

TEST_CASE("rbf gradient matches central differences in log gamma") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto X = random_features(rng, 10);
    const auto y = random_labels(rng, 10);
    const double gamma = std::exp(rng.uniform(-3, 3));
    const double analytic = kta_gradient(KernelSpec::rbf(gamma), X, y)[0];
    const double h = 1e-5;
    const double fd = (rbf_kta(X, y, gamma * std::exp(h)) - rbf_kta(X, y, gamma * std::exp(-h))) / (2 * h);
    CHECK(std::abs(analytic - fd) <= 1e-4 * std::max(std::abs(fd), 1e-6));
  }
}

TEST_CASE("rbf gradient vanishes on identical samples") {
  FeatureMatrix X(4, 3);
  X.setConstant(0.3);
  CHECK(kta_gradient(KernelSpec::rbf(2.0), X, Labels{1, -1, 1, -1})[0] == 0.0);
}

TEST_CASE("HE2 finite-difference gradient is step-size consistent") {
  Rng rng(5);
  const auto X = random_features(rng, 12, -M_PI / 2, M_PI / 2);
  const auto y = random_labels(rng, 12);
  const auto spec = KernelSpec::quantum(EmbeddingSpec::he2(2, 1, std::vector<double>{0, 0}));
  const auto g1 = kta_gradient(spec, X, y, 1e-4);
  const auto g2 = kta_gradient(spec, X, y, 5e-5);
  REQUIRE(g1.size() == 2);
  for (std::size_t k = 0; k < g1.size(); ++k) CHECK(std::abs(g1[k] - g2[k]) <= 1e-6);
}

TEST_CASE("IQP is not trainable") {
  const auto spec = KernelSpec::quantum(EmbeddingSpec::iqp(3, 1));
  FeatureMatrix X(2, 3);
  X.setZero();
  try {
    kta_gradient(spec, X, Labels{1, -1});
    FAIL("expected not-trainable error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotTrainable);
  }
  CHECK_THROWS_AS(train_kta(spec, X, Labels{1, -1}, {}), Error);
}

TEST_CASE("Adam first step moves by the learning rate") {
  Adam adam(2, {});
  std::vector<double> p{0.0, 1.0};
  adam.ascend(p, {3.0, -0.5});
  CHECK(p[0] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.95).epsilon(1e-6));
  CHECK(adam.steps() == 1);
}

TEST_CASE("KTA training") {
  const auto synth = synth_oracle_dataset(200, 6).dataset;
  const auto X = synth.features(Scaler::classical());
  const auto y = synth.labels();

  SUBCASE("zero iterations return the spec unchanged") {
    KtaTrainConfig cfg;
    cfg.iterations = 0;
    const auto spec = KernelSpec::rbf(7.0);
    const auto [trained, report] = train_kta(spec, X, y, cfg);
    CHECK(trained == spec);
    CHECK(report.history.size() == 1);
  }

  SUBCASE("rbf from a very narrow kernel improves") {
    KtaTrainConfig cfg;
    cfg.iterations = 60;
    cfg.seed = 3;
    const auto [trained, report] = train_kta(KernelSpec::rbf(1e3), X, y, cfg);
    CHECK(report.final_kta() >= report.initial_kta());
    CHECK(std::get<ClassicalKernelSpec>(trained.params).gamma < 1e3);
    CHECK(report.history.front().first == 0);
    CHECK(report.history.back().first == 60);
    CHECK(report.history.size() == 7);

    std::ostringstream csv;
    write_kta_history_csv(csv, report);
    CHECK(csv.str().rfind("iteration,kta\n", 0) == 0);
    const auto j = kta_summary_json(report, trained);
    CHECK(j["final_kta"].get<double>() == report.final_kta());
  }

  SUBCASE("training is deterministic for a fixed seed") {
    KtaTrainConfig cfg;
    cfg.iterations = 15;
    cfg.seed = 11;
    const auto a = train_kta(KernelSpec::rbf(3.0), X, y, cfg);
    cfg.workers = 3;
    const auto b = train_kta(KernelSpec::rbf(3.0), X, y, cfg);
    CHECK(a.second.final_params == b.second.final_params);
  }
}

TEST_CASE("HE2 training on 100 samples does not lose alignment") {
  const auto synth = synth_oracle_dataset(100, 8).dataset;
  const auto X = synth.features(Scaler::quantum());
  const auto y = synth.labels();
  KtaTrainConfig cfg;
  cfg.iterations = 20;
  cfg.log_every = 5;
  cfg.seed = 2;
  const auto [trained, report] = train_kta(KernelSpec::quantum(EmbeddingSpec::he2(3, 1, 1)), X, y, cfg);
  CHECK(report.final_kta() >= report.initial_kta() - 1e-6);
  CHECK(std::get<EmbeddingSpec>(trained.params).theta == report.final_params);
}
