#pragma once

// Fidelity kernels over IQP and HE2 embeddings.
//
// A sample x is assigned to qubit q cyclically as x[q mod len(x)].
//
//   IQP layer: H on every qubit, RZ(x_q) on qubit q, RZZ(x_q * x_q') for every
//              pair q < q'. Parameter free.
//   HE2 layer l: trainable RY(theta[l*W + q]) on qubit q, RX(x_q) on qubit q,
//              then a CZ ring q <-> (q+1) mod W (one CZ for W = 2, none for W = 1).

#include "qkf/statevector.hpp"
#include "qkf/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qkf {

enum class EmbeddingKind { Iqp, He2 };

std::string_view to_string(EmbeddingKind kind);
EmbeddingKind parse_embedding_kind(std::string_view name);

struct EmbeddingSpec {
  EmbeddingKind kind = EmbeddingKind::He2;
  int width = 3;
  int depth = 1;
  std::vector<double> theta;  // W*D angles for HE2, empty for IQP

  std::size_t parameter_count() const;
  // "W{width}D{depth}"
  std::string tag() const;
  void validate() const;

  static EmbeddingSpec iqp(int width, int depth);
  // HE2 with theta drawn uniformly from [-pi, pi].
  static EmbeddingSpec he2(int width, int depth, std::uint64_t theta_seed);
  static EmbeddingSpec he2(int width, int depth, std::vector<double> theta);

  bool operator==(const EmbeddingSpec&) const = default;
};

enum class KernelMethod { Overlap, Adjoint };

Circuit embedding_circuit(const EmbeddingSpec& spec, std::span<const double> x);
Statevector embed_state(const EmbeddingSpec& spec, std::span<const double> x);

// Overlap: |<psi(x)|psi(x2)>|^2. Adjoint: probability of |0...0> after
// U(x) followed by U(x2)^dagger.
double quantum_kernel(const EmbeddingSpec& spec, std::span<const double> x,
                      std::span<const double> x2,
                      KernelMethod method = KernelMethod::Overlap);

// Each row of X embedded once.
std::vector<Statevector> embed_all(const EmbeddingSpec& spec, const FeatureMatrix& X,
                                   unsigned workers = 1);

Matrix quantum_gram(const EmbeddingSpec& spec, const FeatureMatrix& X,
                    unsigned workers = 1);
Matrix quantum_gram(const EmbeddingSpec& spec, const FeatureMatrix& X,
                    const FeatureMatrix& X2, unsigned workers = 1);

// Fidelity matrices from already embedded states.
Matrix fidelity_gram(const std::vector<Statevector>& states);
Matrix fidelity_gram(const std::vector<Statevector>& a, const std::vector<Statevector>& b);

}  // namespace qkf
