#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chaodiff/rng.hpp"

namespace chaodiff {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-10;
/// Branches below this Born probability are treated as impossible.
inline constexpr double kBranchCutoff = 1e-14;

/// Qubit 0 is the most significant bit of a basis index.
inline int bit_shift(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

/// Computational-basis outcome over an ordered list of qubits.
/// The first listed qubit is the most significant bit of `value`.
struct Bitstring {
  std::uint64_t value = 0;
  int width = 0;

  std::string str() const;
  bool bit(int position) const { return (value >> (width - 1 - position)) & 1U; }
  Bitstring flipped(int position) const;
  static Bitstring parse(const std::string& text);
  friend bool operator==(const Bitstring&, const Bitstring&) = default;
};

/// Unit-norm pure state on `n_qubits` qubits.
class Ket {
 public:
  /// Throws if the length is not 2^n or the norm deviates from 1 by more than 1e-10.
  Ket(int n_qubits, Amplitudes amplitudes);

  static Ket basis(int n_qubits, std::uint64_t index);
  static Ket zero(int n_qubits) { return basis(n_qubits, 0); }
  /// Rescales a nonzero vector to unit norm.
  static Ket normalized(int n_qubits, Amplitudes amplitudes);
  static Ket plus();
  static Ket ghz(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }

  /// Density matrix |psi><psi|.
  Matrix density() const;

 private:
  int n_qubits_;
  Amplitudes amplitudes_;
};

struct WeightedKet {
  double weight;
  Ket state;
};

/// Weighted collection of equal-width pure states; weights sum to 1.
class StateEnsemble {
 public:
  explicit StateEnsemble(std::vector<WeightedKet> members);
  static StateEnsemble uniform(std::vector<Ket> states);

  std::size_t size() const { return members_.size(); }
  int n_qubits() const { return members_.front().state.n_qubits(); }
  const std::vector<WeightedKet>& members() const { return members_; }
  const Ket& state(std::size_t i) const { return members_[i].state; }
  double weight(std::size_t i) const { return members_[i].weight; }
  bool has_uniform_weights(double tol = 1e-12) const;

  Eigen::VectorXd weights() const;
  /// Columns are member amplitude vectors.
  Matrix state_matrix() const;
  std::vector<Ket> states() const;

 private:
  std::vector<WeightedKet> members_;
};

struct MeasurementRecord {
  Bitstring outcome;
  double probability;
  Ket post_state;
};

// Operations ---------------------------------------------------------------

/// a occupies the high-order qubits of the result.
Ket tensor(const Ket& a, const Ket& b);

/// Applies a 1- or 2-qubit unitary. For two targets, targets[0] is the
/// high-order bit of the gate's 4x4 index.
Ket apply_gate(const Ket& state, const Matrix& gate, std::span<const int> targets);

/// |<a|b>|^2.
double fidelity(const Ket& a, const Ket& b);

MeasurementRecord measure_subset(const Ket& state, std::span<const int> measured, Rng& rng);

/// One record per outcome with probability above the branch cutoff, in
/// increasing outcome order.
std::vector<MeasurementRecord> enumerate_branches(const Ket& state, std::span<const int> measured);

/// Single-qubit Haar state: normalized complex Gaussian 2-vector.
Ket haar_qubit(Rng& rng);
Ket haar_product_state(int n_qubits, Rng& rng);
/// Haar-random state on the full 2^n-dimensional space.
Ket haar_state(int n_qubits, Rng& rng);

/// Entry (i, j) = |<x_i|y_j>|^2.
Eigen::MatrixXd gram_matrix(const StateEnsemble& x, const StateEnsemble& y);

// Statevector kernels (no validation) --------------------------------------

namespace kernels {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

void apply_1q(Amplitudes& psi, int n_qubits, int q, const Mat2& u);
void apply_2q(Amplitudes& psi, int n_qubits, int q_hi, int q_lo, const Mat4& u);
void apply_x(Amplitudes& psi, int n_qubits, int q);
void apply_y(Amplitudes& psi, int n_qubits, int q);
void apply_z(Amplitudes& psi, int n_qubits, int q);
void apply_cz(Amplitudes& psi, int n_qubits, int a, int b);
void apply_cnot(Amplitudes& psi, int n_qubits, int control, int target);
/// exp(-i angle/2 Z_a Z_b)
void apply_rzz(Amplitudes& psi, int n_qubits, int a, int b, double angle);

/// Splits basis indices into (kept index, measured outcome) pairs.
struct SubsystemSplit {
  std::vector<int> kept;
  std::vector<int> measured;
  std::vector<std::uint32_t> kept_index;
  std::vector<std::uint32_t> outcome_index;
};
SubsystemSplit split_subsystem(int n_qubits, std::span<const int> measured);

}  // namespace kernels

void validate_targets(int n_qubits, std::span<const int> targets);
void validate_measured(int n_qubits, std::span<const int> measured);

}  // namespace chaodiff
