#include "chaodiff/chaos.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace chaodiff {

Matrix ising_matrix(int n_sites, double hx, double hy, double coupling) {
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  Matrix h = Matrix::Zero(dim, dim);
  const Complex I(0.0, 1.0);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (int j = 0; j < n_sites; ++j) {
      const Eigen::Index mask = Eigen::Index{1} << bit_shift(n_sites, j);
      const Eigen::Index row = col ^ mask;
      // X|b> = |1-b>, Y|0> = i|1>, Y|1> = -i|0>
      h(row, col) += hx;
      h(row, col) += (col & mask) ? -I * hy : I * hy;
    }
    for (int j = 0; j + 1 < n_sites; ++j) {
      const Eigen::Index mask =
          (Eigen::Index{1} << bit_shift(n_sites, j)) | (Eigen::Index{1} << bit_shift(n_sites, j + 1));
      h(col ^ mask, col) += coupling;
    }
  }
  return h;
}

ChaoticHamiltonian::ChaoticHamiltonian(int n_sites, double hx, double hy, double coupling, int max_sites)
    : n_sites_(n_sites), hx_(hx), hy_(hy), coupling_(coupling) {
  if (n_sites < 2) throw std::invalid_argument("ChaoticHamiltonian: need at least 2 sites");
  if (n_sites > max_sites) {
    throw std::invalid_argument("ChaoticHamiltonian: " + std::to_string(n_sites) +
                                " sites exceeds the dense diagonalization cap of " + std::to_string(max_sites));
  }
  if (!std::isfinite(hx) || !std::isfinite(hy) || !std::isfinite(coupling)) {
    throw std::invalid_argument("ChaoticHamiltonian: non-finite parameter");
  }
  matrix_ = ising_matrix(n_sites, hx, hy, coupling);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
  if (solver.info() != Eigen::Success) throw std::runtime_error("ChaoticHamiltonian: diagonalization failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

Amplitudes ChaoticHamiltonian::propagate(const Amplitudes& psi, double t) const {
  Amplitudes coeffs = eigenvectors_.adjoint() * psi;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs[i] *= std::polar(1.0, -eigenvalues_[i] * t);
  return eigenvectors_ * coeffs;
}

double ChaoticHamiltonian::energy(const Ket& state) const {
  return state.amplitudes().dot(matrix_ * state.amplitudes()).real();
}

std::shared_ptr<const ChaoticHamiltonian> build_hamiltonian(int n_sites, double hx, double hy, double coupling,
                                                            int max_sites) {
  using Key = std::tuple<int, double, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const ChaoticHamiltonian>> cache;
  const Key key{n_sites, hx, hy, coupling};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto h = std::make_shared<const ChaoticHamiltonian>(n_sites, hx, hy, coupling, max_sites);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(h)).first->second;
}

Ket evolve(const Ket& state, const ChaoticHamiltonian& h, double t) {
  if (state.n_qubits() != h.n_sites()) throw std::invalid_argument("evolve: state and Hamiltonian sizes differ");
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: negative time");
  if (t == 0.0) return state;
  return Ket::normalized(state.n_qubits(), h.propagate(state.amplitudes(), t));
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("EvolutionConfig: dt must be positive");
  if (!hamiltonian) throw std::invalid_argument("EvolutionConfig: missing Hamiltonian");
}

}  // namespace chaodiff
