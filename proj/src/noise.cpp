#include "chaodiff/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "chaodiff/metrics.hpp"

namespace chaodiff {

void NoiseConfig::validate() const {
  if (!(p1 >= 0.0 && p1 <= 0.5)) throw std::invalid_argument("noise: p1 must lie in [0, 0.5]");
  if (!(p2 >= 0.0 && p2 <= 0.5)) throw std::invalid_argument("noise: p2 must lie in [0, 0.5]");
}

NoiseConfig NoiseConfig::from_dephasing_rate(double gamma_phi, double dt) {
  if (!(gamma_phi >= 0.0)) throw std::invalid_argument("noise: gamma_phi must be nonnegative");
  return NoiseConfig{0.0, dephasing_prob(dt, gamma_phi)};
}

double dephasing_prob(double t, double gamma_phi) {
  if (!(t >= 0.0)) throw std::invalid_argument("dephasing_prob: negative time");
  if (!(gamma_phi >= 0.0)) throw std::invalid_argument("dephasing_prob: negative rate");
  return -0.5 * std::expm1(-gamma_phi * t);
}

double composed_dephasing_prob(int k, double p2) {
  if (k < 0) throw std::invalid_argument("composed_dephasing_prob: negative step count");
  if (!(p2 >= 0.0 && p2 <= 0.5)) throw std::invalid_argument("composed_dephasing_prob: p2 must lie in [0, 0.5]");
  if (p2 == 0.5) return k == 0 ? 0.0 : 0.5;
  // 1 - (1 - 2 p2)^k evaluated as -expm1(k log1p(-2 p2)) to keep small values exact.
  return -0.5 * std::expm1(static_cast<double>(k) * std::log1p(-2.0 * p2));
}

void apply_dephasing_inplace(Amplitudes& psi, int n_qubits, double prob, Rng& rng) {
  if (!(prob >= 0.0 && prob <= 0.5)) throw std::invalid_argument("apply_dephasing: probability must lie in [0, 0.5]");
  if (prob == 0.0) return;
  for (int q = 0; q < n_qubits; ++q) {
    if (rng.uniform() < prob) kernels::apply_z(psi, n_qubits, q);
  }
}

Ket apply_dephasing(const Ket& state, double prob, Rng& rng) {
  Amplitudes psi = state.amplitudes();
  apply_dephasing_inplace(psi, state.n_qubits(), prob, rng);
  return Ket::normalized(state.n_qubits(), std::move(psi));
}

int run_with_pauli_noise(const Circuit& circuit, Amplitudes& psi, double p1, Rng& rng, std::span<const double> params) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("run_with_pauli_noise: p1 must lie in [0, 1]");
  const int n = circuit.n_qubits();
  int injected = 0;
  for (const auto& g : circuit.gates()) {
    apply_gate_inplace(psi, n, g, gate_angle(g, params));
    if (!g.noisy || p1 == 0.0) continue;
    if (rng.uniform() >= p1) continue;
    ++injected;
    switch (rng.index(3)) {
      case 0:
        kernels::apply_x(psi, n, g.q0);
        break;
      case 1:
        kernels::apply_y(psi, n, g.q0);
        break;
      default:
        kernels::apply_z(psi, n, g.q0);
        break;
    }
  }
  return injected;
}

std::vector<PovmElement> povm_from_channel(const std::vector<Matrix>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("povm_from_channel: no Kraus operators");
  const Eigen::Index dim = kraus.front().rows();
  if (dim < 2 || (dim & (dim - 1)) != 0) throw std::invalid_argument("povm_from_channel: dimension must be a power of two");
  Matrix completeness = Matrix::Zero(dim, dim);
  for (const auto& k : kraus) {
    if (k.rows() != dim || k.cols() != dim) throw std::invalid_argument("povm_from_channel: inconsistent Kraus shapes");
    completeness += k.adjoint() * k;
  }
  if ((completeness - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("povm_from_channel: channel is not trace preserving");
  }
  int width = 0;
  while ((Eigen::Index{1} << width) < dim) ++width;
  std::vector<PovmElement> out;
  out.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index z = 0; z < dim; ++z) {
    Matrix e = Matrix::Zero(dim, dim);
    // K† |z><z| K = (K.row(z))† K.row(z)
    for (const auto& k : kraus) e += k.row(z).adjoint() * k.row(z);
    out.push_back({Bitstring{static_cast<std::uint64_t>(z), width}, std::move(e)});
  }
  return out;
}

double povm_probability(const Ket& generator, std::span<const int> measured, const Matrix& effect) {
  validate_measured(generator.n_qubits(), measured);
  const Eigen::Index mdim = Eigen::Index{1} << measured.size();
  if (effect.rows() != mdim || effect.cols() != mdim) throw std::invalid_argument("povm_probability: effect dimension mismatch");
  const auto split = kernels::split_subsystem(generator.n_qubits(), measured);
  const Eigen::Index kdim = Eigen::Index{1} << split.kept.size();
  Matrix m = Matrix::Zero(kdim, mdim);
  for (Eigen::Index i = 0; i < generator.dim(); ++i) {
    m(split.kept_index[static_cast<std::size_t>(i)], split.outcome_index[static_cast<std::size_t>(i)]) = generator[i];
  }
  // sum_k sum_{z,z'} conj(M[k,z']) E[z',z] M[k,z]
  const Matrix r = m * effect.transpose();
  return (m.conjugate().array() * r.array()).sum().real();
}

namespace {

StateEnsemble branch_ensemble(const std::vector<MeasurementRecord>& branches) {
  std::vector<WeightedKet> members;
  double total = 0.0;
  for (const auto& b : branches) total += b.probability;
  for (const auto& b : branches) members.push_back({b.probability / total, b.post_state});
  return StateEnsemble(std::move(members));
}

}  // namespace

RelabelVerdict pauli_relabel_check(const Ket& generator, std::span<const int> measured, int position, Pauli pauli) {
  validate_measured(generator.n_qubits(), measured);
  if (position < 0 || position >= static_cast<int>(measured.size())) {
    throw std::invalid_argument("pauli_relabel_check: position is not a measured qubit");
  }
  const int qubit = measured[static_cast<std::size_t>(position)];
  Amplitudes noisy = generator.amplitudes();
  switch (pauli) {
    case Pauli::X:
      kernels::apply_x(noisy, generator.n_qubits(), qubit);
      break;
    case Pauli::Y:
      kernels::apply_y(noisy, generator.n_qubits(), qubit);
      break;
    case Pauli::Z:
      kernels::apply_z(noisy, generator.n_qubits(), qubit);
      break;
  }
  const auto clean_branches = enumerate_branches(generator, measured);
  const auto noisy_branches = enumerate_branches(Ket::normalized(generator.n_qubits(), std::move(noisy)), measured);

  std::map<std::uint64_t, const MeasurementRecord*> clean_by_outcome;
  for (const auto& b : clean_branches) clean_by_outcome[b.outcome.value] = &b;

  RelabelVerdict v;
  if (clean_branches.size() != noisy_branches.size()) v.max_probability_error = 1.0;
  for (const auto& nb : noisy_branches) {
    const Bitstring expected = pauli == Pauli::Z ? nb.outcome : nb.outcome.flipped(position);
    auto it = clean_by_outcome.find(expected.value);
    if (it == clean_by_outcome.end()) {
      v.max_probability_error = std::max(v.max_probability_error, nb.probability);
      continue;
    }
    v.max_probability_error = std::max(v.max_probability_error, std::abs(nb.probability - it->second->probability));
    const double diff = (nb.post_state.density() - it->second->post_state.density()).cwiseAbs().maxCoeff();
    v.max_state_error = std::max(v.max_state_error, diff);
  }

  const StateEnsemble clean = branch_ensemble(clean_branches);
  const StateEnsemble relabeled = branch_ensemble(noisy_branches);
  for (int m = 1; m <= 3; ++m) {
    v.max_statistic_error =
        std::max(v.max_statistic_error, std::abs(moment_distance_haar(relabeled, m) - moment_distance_haar(clean, m)));
  }
  v.max_statistic_error = std::max(v.max_statistic_error, mmd(relabeled, clean));
  return v;
}

}  // namespace chaodiff
