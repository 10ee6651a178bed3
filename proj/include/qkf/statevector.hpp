#pragma once

// Dense statevector simulation for few-qubit circuits.
//
// Bit order is big-endian: qubit 0 is the leftmost character of the ket
// label, i.e. the most significant bit of the amplitude index. |10> on two
// qubits is index 2.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace qkf {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 20;

enum class GateKind { H, RX, RY, RZ, CNOT, CZ, RZZ };

std::string_view to_string(GateKind kind);
bool is_two_qubit(GateKind kind);
bool is_rotation(GateKind kind);

// For CNOT, targets[0] is the control and targets[1] the target.
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> targets;
  double angle = 0.0;

  static Gate h(int q) { return {GateKind::H, {q}, 0.0}; }
  static Gate rx(int q, double a) { return {GateKind::RX, {q}, a}; }
  static Gate ry(int q, double a) { return {GateKind::RY, {q}, a}; }
  static Gate rz(int q, double a) { return {GateKind::RZ, {q}, a}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, 0.0}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, 0.0}; }
  static Gate rzz(int a, int b, double angle) { return {GateKind::RZZ, {a, b}, angle}; }

  void validate(int n_qubits) const;
};

using Circuit = std::vector<Gate>;

Gate adjoint(const Gate& g);
// Reversed sequence of adjoint gates.
Circuit inverse(const Circuit& c);

class Statevector {
 public:
  // |0...0> on n qubits; 1 <= n <= kMaxQubits.
  explicit Statevector(int n_qubits);

  int n_qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const noexcept { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  void apply(const Gate& g);
  void apply(const Circuit& c);

  double norm_squared() const;

 private:
  // Bit mask of qubit q in an amplitude index.
  std::size_t mask(int q) const { return std::size_t{1} << (n_ - 1 - q); }

  void apply_single(int q, const Complex (&u)[2][2]);

  int n_;
  std::vector<Complex> amps_;
};

Statevector init_state(int n_qubits);
Statevector apply_gate(Statevector state, const Gate& g);
// <a|b> = sum conj(a_i) b_i
Complex inner_product(const Statevector& a, const Statevector& b);
double prob_all_zeros(const Statevector& s);

// Debug dump: index,re,im per line.
void write_amplitudes_csv(std::ostream& out, const Statevector& s);

}  // namespace qkf
