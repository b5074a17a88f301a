#pragma once

#include <span>
#include <vector>

#include "chaodiff/circuit.hpp"
#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"

namespace chaodiff {

/// Noise strengths for robustness studies.
///
/// p1 is the per-gate Pauli error probability used by circuit scrambling.
/// p2 is the dephasing flip probability accumulated over one evolution step
/// dt, p2 = (1 - exp(-gamma_phi dt)) / 2; longer segments compose from it.
struct NoiseConfig {
  double p1 = 0.0;
  double p2 = 0.0;

  void validate() const;
  bool is_noiseless() const { return p1 == 0.0 && p2 == 0.0; }
  static NoiseConfig from_dephasing_rate(double gamma_phi, double dt);
};

/// (1 - exp(-gamma_phi t)) / 2.
double dephasing_prob(double t, double gamma_phi);
/// Flip probability after k steps of strength p2: (1 - (1 - 2 p2)^k) / 2.
double composed_dephasing_prob(int k, double p2);

/// Independent Z flip on every qubit with the given probability.
void apply_dephasing_inplace(Amplitudes& psi, int n_qubits, double prob, Rng& rng);
Ket apply_dephasing(const Ket& state, double prob, Rng& rng);

/// Runs a circuit, inserting a uniformly chosen X/Y/Z with probability p1 after
/// every gate flagged noisy. Returns the number of injected errors.
int run_with_pauli_noise(const Circuit& circuit, Amplitudes& psi, double p1, Rng& rng,
                         std::span<const double> params = {});

enum class Pauli { X, Y, Z };

/// Effect of a noisy computational-basis measurement: E_z = sum_k K_k† |z><z| K_k.
struct PovmElement {
  Bitstring outcome;
  Matrix effect;
};

/// Kraus operators act on the measured register (2^w x 2^w). Throws unless
/// sum_k K_k† K_k = I within 1e-10.
std::vector<PovmElement> povm_from_channel(const std::vector<Matrix>& kraus);

/// <Φ|(I ⊗ E_z)|Φ> with E_z acting on `measured` (first listed qubit is the high bit).
double povm_probability(const Ket& generator, std::span<const int> measured, const Matrix& effect);

struct RelabelVerdict {
  double max_probability_error = 0.0;
  double max_state_error = 0.0;
  double max_statistic_error = 0.0;
  bool ok(double tol = 1e-12) const {
    return max_probability_error <= tol && max_state_error <= tol && max_statistic_error <= tol;
  }
};

/// Compares the projected ensemble of `generator` with and without a Pauli on
/// the measured qubit measured[position]. Z must leave every branch unchanged;
/// X and Y must permute outcomes by flipping that bit. Moment distances
/// (m = 1..3) and the MMD to the noiseless ensemble must not move.
RelabelVerdict pauli_relabel_check(const Ket& generator, std::span<const int> measured, int position, Pauli pauli);

}  // namespace chaodiff
