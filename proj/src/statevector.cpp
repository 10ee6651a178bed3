#include "qkf/statevector.hpp"

#include "qkf/dataset_io.hpp"
#include "qkf/errors.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace qkf {

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::H: return "H";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::RZZ: return "RZZ";
  }
  return "?";
}

bool is_two_qubit(GateKind kind) {
  return kind == GateKind::CNOT || kind == GateKind::CZ || kind == GateKind::RZZ;
}

bool is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ ||
         kind == GateKind::RZZ;
}

void Gate::validate(int n_qubits) const {
  const std::size_t arity = is_two_qubit(kind) ? 2 : 1;
  if (targets.size() != arity)
    throw Error(ErrorCode::Shape, std::string(to_string(kind)) + " expects " +
                                      std::to_string(arity) + " target(s)");
  for (int q : targets)
    if (q < 0 || q >= n_qubits)
      throw Error(ErrorCode::Shape, "qubit index " + std::to_string(q) +
                                        " out of range for width " + std::to_string(n_qubits));
  if (arity == 2 && targets[0] == targets[1])
    throw Error(ErrorCode::Shape, "two-qubit gate on a single qubit");
  if (is_rotation(kind) && !std::isfinite(angle))
    throw Error(ErrorCode::Shape, "non-finite rotation angle");
}

Gate adjoint(const Gate& g) {
  Gate a = g;
  if (is_rotation(g.kind)) a.angle = -g.angle;
  return a;
}

Circuit inverse(const Circuit& c) {
  Circuit out;
  out.reserve(c.size());
  for (auto it = c.rbegin(); it != c.rend(); ++it) out.push_back(adjoint(*it));
  return out;
}

Statevector::Statevector(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw Error(ErrorCode::Capacity, "qubit count " + std::to_string(n_qubits) +
                                         " outside [1, " + std::to_string(kMaxQubits) + "]");
  amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

void Statevector::apply_single(int q, const Complex (&u)[2][2]) {
  const std::size_t m = mask(q);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & m) continue;
    const Complex a0 = amps_[i];
    const Complex a1 = amps_[i | m];
    amps_[i] = u[0][0] * a0 + u[0][1] * a1;
    amps_[i | m] = u[1][0] * a0 + u[1][1] * a1;
  }
}

void Statevector::apply(const Gate& g) {
  g.validate(n_);
  const double c = std::cos(0.5 * g.angle);
  const double s = std::sin(0.5 * g.angle);
  const Complex i_unit{0.0, 1.0};
  switch (g.kind) {
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      const Complex u[2][2] = {{r, r}, {r, -r}};
      apply_single(g.targets[0], u);
      break;
    }
    case GateKind::RX: {
      const Complex u[2][2] = {{c, -i_unit * s}, {-i_unit * s, c}};
      apply_single(g.targets[0], u);
      break;
    }
    case GateKind::RY: {
      const Complex u[2][2] = {{c, -s}, {s, c}};
      apply_single(g.targets[0], u);
      break;
    }
    case GateKind::RZ: {
      const std::size_t m = mask(g.targets[0]);
      const Complex p0{c, -s}, p1{c, s};
      for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & m) ? p1 : p0;
      break;
    }
    case GateKind::CNOT: {
      const std::size_t mc = mask(g.targets[0]);
      const std::size_t mt = mask(g.targets[1]);
      for (std::size_t i = 0; i < amps_.size(); ++i)
        if ((i & mc) && !(i & mt)) std::swap(amps_[i], amps_[i | mt]);
      break;
    }
    case GateKind::CZ: {
      const std::size_t both = mask(g.targets[0]) | mask(g.targets[1]);
      for (std::size_t i = 0; i < amps_.size(); ++i)
        if ((i & both) == both) amps_[i] = -amps_[i];
      break;
    }
    case GateKind::RZZ: {
      // exp(-i angle/2 Z(x)Z): e^{-i angle/2} on even parity, e^{+i angle/2} on odd.
      const std::size_t ma = mask(g.targets[0]);
      const std::size_t mb = mask(g.targets[1]);
      const Complex even{c, -s}, odd{c, s};
      for (std::size_t i = 0; i < amps_.size(); ++i) {
        const bool parity = ((i & ma) != 0) != ((i & mb) != 0);
        amps_[i] *= parity ? odd : even;
      }
      break;
    }
  }
}

void Statevector::apply(const Circuit& c) {
  for (const auto& g : c) apply(g);
}

double Statevector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

Statevector init_state(int n_qubits) { return Statevector(n_qubits); }

Statevector apply_gate(Statevector state, const Gate& g) {
  state.apply(g);
  return state;
}

Complex inner_product(const Statevector& a, const Statevector& b) {
  if (a.n_qubits() != b.n_qubits())
    throw Error(ErrorCode::Shape, "inner product of states with different widths");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double prob_all_zeros(const Statevector& s) { return std::norm(s[0]); }

void write_amplitudes_csv(std::ostream& out, const Statevector& s) {
  out << "index,re,im\n";
  for (std::size_t i = 0; i < s.dim(); ++i)
    out << i << ',' << format_double(s[i].real()) << ',' << format_double(s[i].imag()) << '\n';
}

}  // namespace qkf
