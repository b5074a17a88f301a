#pragma once

#include <span>
#include <vector>

#include "chaodiff/qstate.hpp"

namespace chaodiff {

enum class GateKind { RX, RY, RZ, RZZ, CZ, CNOT, X, Y, Z };

/// One gate in a circuit. Rotations are exp(-i angle/2 P) with P in {X, Y, Z, ZZ}.
/// A rotation whose `param` is nonnegative reads its angle from the parameter
/// vector passed at execution time; otherwise `angle` is used.
struct Gate {
  GateKind kind;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
  int param = -1;
  /// Marks a location where gate noise may be injected after the gate.
  bool noisy = false;

  bool is_rotation() const;
};

/// Ordered gate list on a fixed register; gates are applied front to back.
class Circuit {
 public:
  Circuit(int n_qubits, int n_params = 0);

  int n_qubits() const { return n_qubits_; }
  int n_params() const { return n_params_; }
  const std::vector<Gate>& gates() const { return gates_; }

  Circuit& add(Gate gate);
  Circuit& rx(int q, int param) { return add({GateKind::RX, q, -1, 0.0, param}); }
  Circuit& ry(int q, int param) { return add({GateKind::RY, q, -1, 0.0, param}); }
  Circuit& rotation(GateKind kind, int q, double angle, bool noisy = false);
  Circuit& rzz(int a, int b, double angle) { return add({GateKind::RZZ, a, b, angle}); }
  Circuit& cz(int a, int b) { return add({GateKind::CZ, a, b}); }
  Circuit& cnot(int control, int target) { return add({GateKind::CNOT, control, target}); }
  Circuit& append(const Circuit& other);

  void apply(Amplitudes& psi, std::span<const double> params = {}) const;
  Ket apply(const Ket& state, std::span<const double> params = {}) const;

  /// Same circuit with every parameter reference replaced by its value.
  Circuit bind(std::span<const double> params) const;
  /// Reversed order with negated angles. Requires a parameter-free circuit.
  Circuit inverse() const;

  /// Dense unitary (test scale only).
  Matrix unitary(std::span<const double> params = {}) const;

 private:
  int n_qubits_;
  int n_params_;
  std::vector<Gate> gates_;
};

double gate_angle(const Gate& g, std::span<const double> params);
void apply_gate_inplace(Amplitudes& psi, int n_qubits, const Gate& g, double angle);
/// Applies exp(+i angle/2 P) (or the self-inverse fixed gate).
void apply_gate_inverse_inplace(Amplitudes& psi, int n_qubits, const Gate& g, double angle);
/// Multiplies by the rotation generator P of a rotation gate.
void apply_generator_inplace(Amplitudes& psi, int n_qubits, const Gate& g);

/// Reverse-mode gradient of a real loss L(out) where out = circuit(params) |in>.
///
/// `output` is the circuit output state and `adjoint` is dL/d(out*) (Wirtinger
/// convention, so dL = 2 Re<adjoint|d out>). Contributions are accumulated into
/// `grad`, which must have n_params entries.
void accumulate_adjoint_gradient(const Circuit& circuit, std::span<const double> params, Amplitudes output,
                                 Amplitudes adjoint, std::span<double> grad);

}  // namespace chaodiff
