#include "chaodiff/denoiser.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace chaodiff {

void DenoiserStack::validate() const {
  if (steps < 1) throw std::invalid_argument("denoiser: steps must be >= 1");
  if (n_m < 1) throw std::invalid_argument("denoiser: n_m must be >= 1");
  if (n_a < 0) throw std::invalid_argument("denoiser: n_a must be >= 0");
  if (layers < 0) throw std::invalid_argument("denoiser: layers must be >= 0");
  if (thetas.size() != static_cast<std::size_t>(steps)) throw std::invalid_argument("denoiser: need one parameter vector per step");
  for (const auto& t : thetas) {
    if (t.size() != static_cast<std::size_t>(n_params())) {
      throw std::invalid_argument("denoiser: parameter vector length must be 2 (n_m + n_a) L = " +
                                  std::to_string(n_params()));
    }
  }
}

std::span<const double> DenoiserStack::theta(int k) const {
  if (k < 1 || k > steps) throw std::out_of_range("denoiser: step index out of range");
  return thetas[static_cast<std::size_t>(k - 1)];
}

std::vector<double>& DenoiserStack::theta_mut(int k) {
  if (k < 1 || k > steps) throw std::out_of_range("denoiser: step index out of range");
  return thetas[static_cast<std::size_t>(k - 1)];
}

DenoiserStack DenoiserStack::random(int steps, int n_m, int n_a, int layers, Rng& rng) {
  DenoiserStack s = zeros(steps, n_m, n_a, layers);
  for (auto& t : s.thetas) {
    for (auto& v : t) v = rng.uniform(-M_PI, M_PI);
  }
  return s;
}

DenoiserStack DenoiserStack::zeros(int steps, int n_m, int n_a, int layers) {
  DenoiserStack s{steps, n_m, n_a, layers, {}};
  s.thetas.assign(static_cast<std::size_t>(std::max(steps, 0)),
                  std::vector<double>(static_cast<std::size_t>(s.n_params()), 0.0));
  s.validate();
  return s;
}

Circuit build_ansatz_circuit(int n_qubits, int layers) {
  if (n_qubits < 1 || layers < 0) throw std::invalid_argument("ansatz: need n >= 1 and L >= 0");
  Circuit c(n_qubits, 2 * n_qubits * layers);
  for (int l = 0; l < layers; ++l) {
    const int offset = 2 * n_qubits * l;
    for (int q = 0; q < n_qubits; ++q) {
      c.rx(q, offset + 2 * q);
      c.ry(q, offset + 2 * q + 1);
    }
    for (int q = 0; q + 1 < n_qubits; q += 2) c.cz(q, q + 1);
    for (int q = 1; q + 1 < n_qubits; q += 2) c.cz(q, q + 1);
  }
  return c;
}

Matrix ansatz_unitary(std::span<const double> theta, int n_qubits, int layers) {
  const Circuit c = build_ansatz_circuit(n_qubits, layers);
  if (theta.size() != static_cast<std::size_t>(c.n_params())) throw std::invalid_argument("ansatz: wrong parameter length");
  return c.unitary(theta);
}

Amplitudes ansatz_output(const Circuit& ansatz, const Ket& state, std::span<const double> theta, int n_a) {
  if (theta.size() != static_cast<std::size_t>(ansatz.n_params())) throw std::invalid_argument("ansatz: wrong parameter length");
  if (state.n_qubits() + n_a != ansatz.n_qubits()) throw std::invalid_argument("ansatz: register size mismatch");
  Amplitudes full = Amplitudes::Zero(Eigen::Index{1} << ansatz.n_qubits());
  const int shift = n_a;
  for (Eigen::Index i = 0; i < state.dim(); ++i) full[i << shift] = state[i];
  ansatz.apply(full, theta);
  return full;
}

Amplitudes project_ancilla(const Amplitudes& full, int n_m, int n_a, std::uint64_t outcome, double* prob) {
  const Eigen::Index dm = Eigen::Index{1} << n_m;
  Amplitudes out(dm);
  for (Eigen::Index i = 0; i < dm; ++i) out[i] = full[(i << n_a) | static_cast<Eigen::Index>(outcome)];
  if (prob != nullptr) *prob = out.squaredNorm();
  return out;
}

namespace {

std::vector<int> ancilla_qubits(int n_m, int n_a) {
  std::vector<int> a(static_cast<std::size_t>(n_a));
  std::iota(a.begin(), a.end(), n_m);
  return a;
}

DenoiseStepRecord backward_step(const Circuit& ansatz, const DenoiserStack& stack, const std::vector<int>& measured,
                                const Ket& psi, int k, Rng stream) {
  Amplitudes full = ansatz_output(ansatz, psi, stack.theta(k), stack.n_a);
  if (stack.n_a == 0) return {k, Bitstring{0, 0}, 1.0, Ket::normalized(stack.n_m, std::move(full))};
  auto m = measure_subset(Ket::normalized(stack.n_qubits(), std::move(full)), measured, stream);
  return {k, m.outcome, m.probability, std::move(m.post_state)};
}

}  // namespace

DenoiseStepRecord denoise_step(const Ket& state, std::span<const double> theta, int n_a, int layers, int step,
                               Rng& rng) {
  const int n_m = state.n_qubits();
  const Circuit ansatz = build_ansatz_circuit(n_m + n_a, layers);
  Amplitudes full = ansatz_output(ansatz, state, theta, n_a);
  if (n_a == 0) return {step, Bitstring{0, 0}, 1.0, Ket::normalized(n_m, std::move(full))};
  const auto measured = ancilla_qubits(n_m, n_a);
  auto rec = measure_subset(Ket::normalized(n_m + n_a, std::move(full)), measured, rng);
  return {step, rec.outcome, rec.probability, std::move(rec.post_state)};
}

std::vector<MeasurementRecord> denoise_branches(const Ket& state, std::span<const double> theta, int n_a, int layers) {
  const int n_m = state.n_qubits();
  const Circuit ansatz = build_ansatz_circuit(n_m + n_a, layers);
  Amplitudes full = ansatz_output(ansatz, state, theta, n_a);
  if (n_a == 0) return {{Bitstring{0, 0}, 1.0, Ket::normalized(n_m, std::move(full))}};
  const auto measured = ancilla_qubits(n_m, n_a);
  return enumerate_branches(Ket::normalized(n_m + n_a, std::move(full)), measured);
}

StateEnsemble haar_product_ensemble(int n_qubits, std::size_t n_samples, const Rng& rng) {
  if (n_samples == 0) throw std::invalid_argument("haar_product_ensemble: need at least one sample");
  std::vector<Ket> states;
  states.reserve(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) {
    Rng stream = rng.split(j);
    states.push_back(haar_product_state(n_qubits, stream));
  }
  return StateEnsemble::uniform(std::move(states));
}

std::vector<Ket> run_backward(const DenoiserStack& stack, const std::vector<Ket>& inputs, int from, int to,
                              const Rng& rng, std::vector<std::vector<DenoiseStepRecord>>* records) {
  stack.validate();
  if (from > stack.steps || to < 1) throw std::out_of_range("run_backward: step range outside the stack");
  const Circuit ansatz = build_ansatz_circuit(stack.n_qubits(), stack.layers);
  const auto measured = ancilla_qubits(stack.n_m, stack.n_a);
  if (records != nullptr) records->assign(inputs.size(), {});
  std::vector<Ket> out;
  out.reserve(inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    Ket psi = inputs[j];
    const Rng sample = rng.split(j);
    for (int k = from; k >= to; --k) {
      auto rec = backward_step(ansatz, stack, measured, psi, k, sample.split(static_cast<std::uint64_t>(k)));
      psi = rec.state;
      if (records != nullptr) (*records)[j].push_back(std::move(rec));
    }
    out.push_back(std::move(psi));
  }
  return out;
}

Generation generate(const DenoiserStack& stack, std::size_t n_samples, const Rng& rng) {
  stack.validate();
  const StateEnsemble inputs = haar_product_ensemble(stack.n_m, n_samples, rng.split("inputs"));
  const Rng steps_rng = rng.split("steps");
  const Circuit ansatz = build_ansatz_circuit(stack.n_qubits(), stack.layers);
  const auto measured = ancilla_qubits(stack.n_m, stack.n_a);

  Generation g;
  g.ensembles.assign(static_cast<std::size_t>(stack.steps) + 1, inputs);
  g.records.assign(n_samples, {});
  std::vector<Ket> current = inputs.states();
  for (int k = stack.steps; k >= 1; --k) {
    for (std::size_t j = 0; j < n_samples; ++j) {
      auto rec = backward_step(ansatz, stack, measured, current[j], k,
                               steps_rng.split(j).split(static_cast<std::uint64_t>(k)));
      current[j] = rec.state;
      g.records[j].push_back(std::move(rec));
    }
    g.ensembles[static_cast<std::size_t>(k - 1)] = StateEnsemble::uniform(current);
  }
  return g;
}

}  // namespace chaodiff
