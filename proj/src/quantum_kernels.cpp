#include "qkf/quantum_kernels.hpp"

#include "qkf/errors.hpp"
#include "qkf/parallel.hpp"
#include "qkf/random.hpp"

#include <cmath>
#include <numbers>

namespace qkf {

std::string_view to_string(EmbeddingKind kind) {
  return kind == EmbeddingKind::Iqp ? "iqp" : "he2";
}

EmbeddingKind parse_embedding_kind(std::string_view name) {
  if (name == "iqp" || name == "IQP") return EmbeddingKind::Iqp;
  if (name == "he2" || name == "HE2") return EmbeddingKind::He2;
  throw Error(ErrorCode::Spec, "unknown embedding '" + std::string(name) + "'");
}

std::size_t EmbeddingSpec::parameter_count() const {
  return kind == EmbeddingKind::He2 ? static_cast<std::size_t>(width * depth) : 0;
}

std::string EmbeddingSpec::tag() const {
  return "W" + std::to_string(width) + "D" + std::to_string(depth);
}

void EmbeddingSpec::validate() const {
  if (width < 1 || depth < 1)
    throw Error(ErrorCode::Spec, "embedding width and depth must be >= 1");
  if (width > kMaxQubits)
    throw Error(ErrorCode::Capacity, "embedding width exceeds simulator capacity");
  if (theta.size() != parameter_count())
    throw Error(ErrorCode::Spec, "embedding " + std::string(to_string(kind)) + " " + tag() +
                                     " expects " + std::to_string(parameter_count()) +
                                     " parameters, got " + std::to_string(theta.size()));
}

EmbeddingSpec EmbeddingSpec::iqp(int width, int depth) {
  return {EmbeddingKind::Iqp, width, depth, {}};
}

EmbeddingSpec EmbeddingSpec::he2(int width, int depth, std::uint64_t theta_seed) {
  Rng rng(theta_seed);
  std::vector<double> theta(static_cast<std::size_t>(std::max(0, width * depth)));
  for (auto& t : theta) t = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return {EmbeddingKind::He2, width, depth, std::move(theta)};
}

EmbeddingSpec EmbeddingSpec::he2(int width, int depth, std::vector<double> theta) {
  EmbeddingSpec spec{EmbeddingKind::He2, width, depth, std::move(theta)};
  spec.validate();
  return spec;
}

Circuit embedding_circuit(const EmbeddingSpec& spec, std::span<const double> x) {
  spec.validate();
  if (x.empty()) throw Error(ErrorCode::Shape, "empty feature vector");
  const int w = spec.width;
  auto feature = [&](int q) { return x[static_cast<std::size_t>(q) % x.size()]; };

  Circuit c;
  for (int layer = 0; layer < spec.depth; ++layer) {
    if (spec.kind == EmbeddingKind::Iqp) {
      for (int q = 0; q < w; ++q) c.push_back(Gate::h(q));
      for (int q = 0; q < w; ++q) c.push_back(Gate::rz(q, feature(q)));
      for (int q = 0; q < w; ++q)
        for (int p = q + 1; p < w; ++p) c.push_back(Gate::rzz(q, p, feature(q) * feature(p)));
    } else {
      // Gates after the last data rotation cancel in a fidelity, so the
      // trainable rotation goes first to keep depth-1 kernels theta dependent.
      for (int q = 0; q < w; ++q)
        c.push_back(Gate::ry(q, spec.theta[static_cast<std::size_t>(layer * w + q)]));
      for (int q = 0; q < w; ++q) c.push_back(Gate::rx(q, feature(q)));
      if (w == 2) {
        c.push_back(Gate::cz(0, 1));
      } else if (w > 2) {
        for (int q = 0; q < w; ++q) c.push_back(Gate::cz(q, (q + 1) % w));
      }
    }
  }
  return c;
}

Statevector embed_state(const EmbeddingSpec& spec, std::span<const double> x) {
  Statevector s(spec.width);
  s.apply(embedding_circuit(spec, x));
  return s;
}

double quantum_kernel(const EmbeddingSpec& spec, std::span<const double> x,
                      std::span<const double> x2, KernelMethod method) {
  if (method == KernelMethod::Overlap)
    return std::norm(inner_product(embed_state(spec, x), embed_state(spec, x2)));
  Statevector s(spec.width);
  s.apply(embedding_circuit(spec, x));
  s.apply(inverse(embedding_circuit(spec, x2)));
  return prob_all_zeros(s);
}

std::vector<Statevector> embed_all(const EmbeddingSpec& spec, const FeatureMatrix& X,
                                   unsigned workers) {
  spec.validate();
  if (X.rows() == 0) throw Error(ErrorCode::EmptyInput, "embedding an empty sample list");
  std::vector<Statevector> states(static_cast<std::size_t>(X.rows()), Statevector(spec.width));
  parallel_for(states.size(), workers, [&](std::size_t i) {
    states[i] = embed_state(spec, row_span(X, static_cast<Eigen::Index>(i)));
  });
  return states;
}

namespace {

Eigen::MatrixXcd stack(const std::vector<Statevector>& states) {
  Eigen::MatrixXcd S(static_cast<Eigen::Index>(states.front().dim()),
                     static_cast<Eigen::Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j)
    for (std::size_t i = 0; i < states[j].dim(); ++i)
      S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = states[j][i];
  return S;
}

}  // namespace

Matrix fidelity_gram(const std::vector<Statevector>& states) {
  Matrix K = fidelity_gram(states, states);
  return 0.5 * (K + K.transpose());
}

Matrix fidelity_gram(const std::vector<Statevector>& a, const std::vector<Statevector>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "empty state list");
  if (a.front().n_qubits() != b.front().n_qubits())
    throw Error(ErrorCode::Shape, "state lists have different widths");
  const Eigen::MatrixXcd overlaps = stack(a).adjoint() * stack(b);
  return overlaps.cwiseAbs2();
}

Matrix quantum_gram(const EmbeddingSpec& spec, const FeatureMatrix& X, unsigned workers) {
  return fidelity_gram(embed_all(spec, X, workers));
}

Matrix quantum_gram(const EmbeddingSpec& spec, const FeatureMatrix& X,
                    const FeatureMatrix& X2, unsigned workers) {
  return fidelity_gram(embed_all(spec, X, workers), embed_all(spec, X2, workers));
}

}  // namespace qkf
