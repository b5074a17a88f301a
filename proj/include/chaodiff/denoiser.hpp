#pragma once

#include <span>
#include <vector>

#include "chaodiff/circuit.hpp"
#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"

namespace chaodiff {

/// Trainable backward channels. thetas[k-1] parameterizes V_k, which maps
/// S~_k to S~_{k-1}. Ancilla qubits follow the data qubits.
struct DenoiserStack {
  int steps = 1;
  int n_m = 1;
  int n_a = 0;
  int layers = 1;
  std::vector<std::vector<double>> thetas;

  int n_qubits() const { return n_m + n_a; }
  int n_params() const { return 2 * n_qubits() * layers; }
  void validate() const;

  std::span<const double> theta(int k) const;
  std::vector<double>& theta_mut(int k);

  /// All angles uniform in [-pi, pi].
  static DenoiserStack random(int steps, int n_m, int n_a, int layers, Rng& rng);
  static DenoiserStack zeros(int steps, int n_m, int n_a, int layers);
};

/// Hardware-efficient ansatz on n qubits with L layers. Layer l applies
/// RX(theta[2nl + 2q]) then RY(theta[2nl + 2q + 1]) on every qubit q, followed
/// by CZ on (0,1),(2,3),... and then on (1,2),(3,4),...
Circuit build_ansatz_circuit(int n_qubits, int layers);
Matrix ansatz_unitary(std::span<const double> theta, int n_qubits, int layers);

struct DenoiseStepRecord {
  int step;
  Bitstring outcome;
  double born_prob;
  Ket state;
};

/// |state>|0..0>_A, apply V(theta), measure the ancillas and keep the normalized
/// data state. With n_a = 0 the outcome is empty and born_prob is 1.
DenoiseStepRecord denoise_step(const Ket& state, std::span<const double> theta, int n_a, int layers, int step,
                               Rng& rng);

/// Every ancilla branch with nonzero probability.
std::vector<MeasurementRecord> denoise_branches(const Ket& state, std::span<const double> theta, int n_a, int layers);

/// V(theta)|state>|0..0>_A on the full register.
Amplitudes ansatz_output(const Circuit& ansatz, const Ket& state, std::span<const double> theta, int n_a);

/// Data state after projecting the ancillas onto `outcome`; also returns the
/// unnormalized branch norm squared through `prob`.
Amplitudes project_ancilla(const Amplitudes& full, int n_m, int n_a, std::uint64_t outcome, double* prob);

StateEnsemble haar_product_ensemble(int n_qubits, std::size_t n_samples, const Rng& rng);

/// Applies theta_from, theta_{from-1}, ..., theta_to (from >= to) to every input.
/// Sample j, step k draws from rng.split(j).split(k).
std::vector<Ket> run_backward(const DenoiserStack& stack, const std::vector<Ket>& inputs, int from, int to,
                              const Rng& rng, std::vector<std::vector<DenoiseStepRecord>>* records = nullptr);

/// Index k holds S~_k; index K holds the Haar-product inputs, index 0 the output.
struct Generation {
  std::vector<StateEnsemble> ensembles;
  /// records[j] lists the steps of sample j from K down to 1.
  std::vector<std::vector<DenoiseStepRecord>> records;

  const StateEnsemble& output() const { return ensembles.front(); }
};

Generation generate(const DenoiserStack& stack, std::size_t n_samples, const Rng& rng);

}  // namespace chaodiff
