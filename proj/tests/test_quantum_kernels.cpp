#include "qkf/errors.hpp"
#include "qkf/quantum_kernels.hpp"
#include "qkf/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qkf;

namespace {

FeatureMatrix random_angles(Rng& rng, int rows, int cols = 3) {
  FeatureMatrix X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = rng.uniform(-M_PI / 2, M_PI / 2);
  return X;
}

std::vector<EmbeddingSpec> default_grid() {
  std::vector<EmbeddingSpec> out;
  std::uint64_t seed = 100;
  for (int w : {3, 4, 6})
    for (int d : {1, 2, 3}) {
      out.push_back(EmbeddingSpec::iqp(w, d));
      out.push_back(EmbeddingSpec::he2(w, d, seed++));
    }
  return out;
}

}  // namespace

TEST_CASE("IQP single-qubit state") {
  const double phi = 0.7;
  const std::vector<double> x{phi};
  const auto s = embed_state(EmbeddingSpec::iqp(1, 1), x);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(s[0] - std::polar(r, -phi / 2)) < 1e-15);
  CHECK(std::abs(s[1] - std::polar(r, phi / 2)) < 1e-15);
}

TEST_CASE("IQP single-qubit kernel is cos^2 of half the difference") {
  Rng rng(1);
  const auto spec = EmbeddingSpec::iqp(1, 1);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> a{rng.uniform(-3, 3)}, b{rng.uniform(-3, 3)};
    const double expected = std::pow(std::cos((a[0] - b[0]) / 2), 2);
    CHECK(std::abs(quantum_kernel(spec, a, b) - expected) < 1e-14);
    CHECK(std::abs(quantum_kernel(spec, a, b, KernelMethod::Adjoint) - expected) < 1e-14);
  }
}

TEST_CASE("HE2 depth-1 kernel depends on theta") {
  const std::vector<double> a{0.3, -0.5, 0.9}, b{-0.2, 0.4, 0.1};
  const double k0 = quantum_kernel(EmbeddingSpec::he2(3, 1, std::vector<double>{0, 0, 0}), a, b);
  const double k1 = quantum_kernel(EmbeddingSpec::he2(3, 1, std::vector<double>{0.7, -1.1, 0.4}), a, b);
  CHECK(std::abs(k0 - k1) > 1e-3);
}

TEST_CASE("HE2 with zero angles stays in |00>") {
  const auto s = embed_state(EmbeddingSpec::he2(2, 1, std::vector<double>{0, 0}), std::vector<double>{0, 0});
  CHECK(std::abs(s[0] - 1.0) < 1e-15);
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("HE2 layer layout") {
  const auto spec = EmbeddingSpec::he2(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
  const auto c = embedding_circuit(spec, std::vector<double>{0.1, 0.2, 0.3});
  // per layer: 3 RY, 3 RX, 3 CZ
  REQUIRE(c.size() == 18);
  CHECK(c[0].kind == GateKind::RY);
  CHECK(c[3].kind == GateKind::RX);
  CHECK(c[3].angle == 0.1);
  CHECK(c[9].angle == 4.0);
  CHECK(c[6].kind == GateKind::CZ);
  CHECK(c[8].targets == std::vector<int>{2, 0});
  CHECK(embedding_circuit(EmbeddingSpec::he2(2, 1, std::vector<double>{0, 0}), std::vector<double>{0, 0}).size() == 5);
  CHECK(embedding_circuit(EmbeddingSpec::he2(1, 1, std::vector<double>{0}), std::vector<double>{0}).size() == 2);
}

TEST_CASE("features are re-encoded cyclically") {
  const auto spec = EmbeddingSpec::iqp(5, 1);
  const auto c = embedding_circuit(spec, std::vector<double>{0.1, 0.2, 0.3});
  // 5 H, 5 RZ, 10 RZZ
  REQUIRE(c.size() == 20);
  CHECK(c[5 + 3].angle == 0.1);
  CHECK(c[5 + 4].angle == 0.2);
  CHECK(c[10].angle == doctest::Approx(0.1 * 0.2));
}

TEST_CASE("spec validation and parameter counts") {
  CHECK(EmbeddingSpec::he2(6, 3, 1).parameter_count() == 18);
  CHECK(EmbeddingSpec::he2(4, 2, 1).parameter_count() == 2 * EmbeddingSpec::he2(4, 1, 1).parameter_count());
  CHECK(EmbeddingSpec::iqp(6, 3).parameter_count() == 0);
  CHECK(EmbeddingSpec::he2(6, 3, 1).tag() == "W6D3");
  for (double t : EmbeddingSpec::he2(6, 3, 9).theta) {
    CHECK(t >= -M_PI);
    CHECK(t <= M_PI);
  }
  try {
    EmbeddingSpec::he2(3, 1, std::vector<double>{1, 2}).validate();
    FAIL("expected spec error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Spec);
  }
  CHECK_THROWS_AS(EmbeddingSpec::iqp(0, 1).validate(), Error);
}

TEST_CASE("overlap and adjoint methods agree") {
  Rng rng(2);
  for (const auto& spec : default_grid()) {
    const auto X = random_angles(rng, 20);
    for (int i = 0; i + 1 < X.rows(); i += 2) {
      const double a = quantum_kernel(spec, row_span(X, i), row_span(X, i + 1));
      const double b = quantum_kernel(spec, row_span(X, i), row_span(X, i + 1), KernelMethod::Adjoint);
      CHECK(std::abs(a - b) <= 1e-10);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0 + 1e-12);
      CHECK(a == quantum_kernel(spec, row_span(X, i + 1), row_span(X, i)));
    }
  }
}

TEST_CASE("quantum Gram equals pairwise kernels") {
  Rng rng(3);
  for (const auto& spec : {EmbeddingSpec::iqp(3, 2), EmbeddingSpec::he2(4, 2, 5)}) {
    const auto X = random_angles(rng, 4);
    const auto X2 = random_angles(rng, 3);
    const Matrix K = quantum_gram(spec, X, 2);
    const Matrix B = quantum_gram(spec, X, X2);
    for (int i = 0; i < 4; ++i) {
      CHECK(K(i, i) == doctest::Approx(1.0).epsilon(1e-12));
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(K(i, j) - quantum_kernel(spec, row_span(X, i), row_span(X, j))) <= 1e-12);
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(B(i, j) - quantum_kernel(spec, row_span(X, i), row_span(X2, j))) <= 1e-12);
    }
  }
}

TEST_CASE("duplicate rows give an all-ones quantum Gram") {
  FeatureMatrix X(3, 3);
  X << 0.3, -0.2, 1.1, 0.3, -0.2, 1.1, 0.3, -0.2, 1.1;
  const Matrix K = quantum_gram(EmbeddingSpec::he2(3, 2, 4), X);
  CHECK((K - Matrix::Ones(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(quantum_gram(EmbeddingSpec::iqp(3, 1), FeatureMatrix(0, 3)), Error);
}

TEST_CASE("quantum Gram is PSD and worker-count independent") {
  Rng rng(4);
  for (const auto& spec : {EmbeddingSpec::iqp(3, 1), EmbeddingSpec::iqp(6, 3), EmbeddingSpec::he2(3, 1, 1),
                           EmbeddingSpec::he2(6, 3, 2)}) {
    const auto X = random_angles(rng, 40);
    const Matrix K = quantum_gram(spec, X, 1);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(K).eigenvalues().minCoeff() >= -1e-8);
    CHECK(K == quantum_gram(spec, X, 4));
  }
}
