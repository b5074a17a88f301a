#include "chaodiff/circuit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chaodiff {

namespace {

kernels::Mat2 rotation_matrix(GateKind kind, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const Complex I(0.0, 1.0);
  kernels::Mat2 m;
  switch (kind) {
    case GateKind::RX:
      m << c, -I * s, -I * s, c;
      break;
    case GateKind::RY:
      m << c, -s, s, c;
      break;
    case GateKind::RZ:
      m << std::polar(1.0, -angle / 2.0), 0.0, 0.0, std::polar(1.0, angle / 2.0);
      break;
    default:
      throw std::logic_error("rotation_matrix: not a single-qubit rotation");
  }
  return m;
}

}  // namespace

bool Gate::is_rotation() const {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ || kind == GateKind::RZZ;
}

Circuit::Circuit(int n_qubits, int n_params) : n_qubits_(n_qubits), n_params_(n_params) {
  if (n_qubits < 1) throw std::invalid_argument("Circuit: need at least one qubit");
  if (n_params < 0) throw std::invalid_argument("Circuit: negative parameter count");
}

Circuit& Circuit::add(Gate gate) {
  const bool two_qubit = gate.kind == GateKind::RZZ || gate.kind == GateKind::CZ || gate.kind == GateKind::CNOT;
  if (gate.q0 < 0 || gate.q0 >= n_qubits_) throw std::invalid_argument("Circuit: qubit out of range");
  if (two_qubit && (gate.q1 < 0 || gate.q1 >= n_qubits_ || gate.q1 == gate.q0)) {
    throw std::invalid_argument("Circuit: invalid second qubit");
  }
  if (gate.param >= n_params_) throw std::invalid_argument("Circuit: parameter index " + std::to_string(gate.param) + " out of range");
  if (gate.param >= 0 && !gate.is_rotation()) throw std::invalid_argument("Circuit: only rotations take parameters");
  gates_.push_back(gate);
  return *this;
}

Circuit& Circuit::rotation(GateKind kind, int q, double angle, bool noisy) {
  Gate g{kind, q, -1, angle, -1, noisy};
  return add(g);
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.n_qubits_ != n_qubits_) throw std::invalid_argument("Circuit::append: register mismatch");
  if (other.n_params_ > n_params_) throw std::invalid_argument("Circuit::append: parameter count mismatch");
  for (const auto& g : other.gates_) gates_.push_back(g);
  return *this;
}

double gate_angle(const Gate& g, std::span<const double> params) {
  return g.param >= 0 ? params[static_cast<std::size_t>(g.param)] : g.angle;
}

void apply_gate_inplace(Amplitudes& psi, int n, const Gate& g, double angle) {
  switch (g.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      kernels::apply_1q(psi, n, g.q0, rotation_matrix(g.kind, angle));
      break;
    case GateKind::RZZ:
      kernels::apply_rzz(psi, n, g.q0, g.q1, angle);
      break;
    case GateKind::CZ:
      kernels::apply_cz(psi, n, g.q0, g.q1);
      break;
    case GateKind::CNOT:
      kernels::apply_cnot(psi, n, g.q0, g.q1);
      break;
    case GateKind::X:
      kernels::apply_x(psi, n, g.q0);
      break;
    case GateKind::Y:
      kernels::apply_y(psi, n, g.q0);
      break;
    case GateKind::Z:
      kernels::apply_z(psi, n, g.q0);
      break;
  }
}

void apply_gate_inverse_inplace(Amplitudes& psi, int n, const Gate& g, double angle) {
  if (g.is_rotation()) {
    apply_gate_inplace(psi, n, g, -angle);
  } else {
    apply_gate_inplace(psi, n, g, 0.0);  // all fixed gates are self-inverse
  }
}

void apply_generator_inplace(Amplitudes& psi, int n, const Gate& g) {
  switch (g.kind) {
    case GateKind::RX:
      kernels::apply_x(psi, n, g.q0);
      break;
    case GateKind::RY:
      kernels::apply_y(psi, n, g.q0);
      break;
    case GateKind::RZ:
      kernels::apply_z(psi, n, g.q0);
      break;
    case GateKind::RZZ:
      kernels::apply_z(psi, n, g.q0);
      kernels::apply_z(psi, n, g.q1);
      break;
    default:
      throw std::logic_error("apply_generator_inplace: gate has no generator");
  }
}

void Circuit::apply(Amplitudes& psi, std::span<const double> params) const {
  if (static_cast<int>(params.size()) < n_params_) throw std::invalid_argument("Circuit::apply: too few parameters");
  if (psi.size() != (Eigen::Index{1} << n_qubits_)) throw std::invalid_argument("Circuit::apply: state dimension mismatch");
  for (const auto& g : gates_) apply_gate_inplace(psi, n_qubits_, g, gate_angle(g, params));
}

Ket Circuit::apply(const Ket& state, std::span<const double> params) const {
  if (state.n_qubits() != n_qubits_) throw std::invalid_argument("Circuit::apply: qubit count mismatch");
  Amplitudes psi = state.amplitudes();
  apply(psi, params);
  return Ket::normalized(n_qubits_, std::move(psi));
}

Circuit Circuit::bind(std::span<const double> params) const {
  if (static_cast<int>(params.size()) < n_params_) throw std::invalid_argument("Circuit::bind: too few parameters");
  Circuit out(n_qubits_, 0);
  for (auto g : gates_) {
    g.angle = gate_angle(g, params);
    g.param = -1;
    out.gates_.push_back(g);
  }
  return out;
}

Circuit Circuit::inverse() const {
  if (n_params_ != 0) throw std::invalid_argument("Circuit::inverse: bind parameters first");
  Circuit out(n_qubits_, 0);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    Gate g = *it;
    if (g.is_rotation()) g.angle = -g.angle;
    out.gates_.push_back(g);
  }
  return out;
}

Matrix Circuit::unitary(std::span<const double> params) const {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits_;
  Matrix u(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    Amplitudes col = Amplitudes::Zero(dim);
    col[c] = 1.0;
    apply(col, params);
    u.col(c) = col;
  }
  return u;
}

void accumulate_adjoint_gradient(const Circuit& circuit, std::span<const double> params, Amplitudes output,
                                 Amplitudes adjoint, std::span<double> grad) {
  const int n = circuit.n_qubits();
  const auto& gates = circuit.gates();
  Amplitudes scratch;
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    const Gate& g = *it;
    const double angle = gate_angle(g, params);
    if (g.param >= 0) {
      // d/dθ exp(-iθP/2) = (-i/2) P exp(-iθP/2); dL = 2 Re<λ|(-i/2)P|ψ> = Im<λ|P|ψ>.
      scratch = output;
      apply_generator_inplace(scratch, n, g);
      grad[static_cast<std::size_t>(g.param)] += adjoint.dot(scratch).imag();
    }
    apply_gate_inverse_inplace(output, n, g, angle);
    apply_gate_inverse_inplace(adjoint, n, g, angle);
  }
}

}  // namespace chaodiff
