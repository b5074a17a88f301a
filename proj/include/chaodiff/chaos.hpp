#pragma once

#include <memory>

#include "chaodiff/qstate.hpp"

namespace chaodiff {

/// Mixed-field Ising chain with open boundaries,
///   H = sum_j (hx X_j + hy Y_j) + J sum_j X_j X_{j+1},
/// with its spectral decomposition cached for exact propagation.
class ChaoticHamiltonian {
 public:
  static constexpr int kDefaultMaxSites = 13;

  ChaoticHamiltonian(int n_sites, double hx, double hy, double coupling, int max_sites = kDefaultMaxSites);

  int n_sites() const { return n_sites_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double coupling() const { return coupling_; }

  const Matrix& matrix() const { return matrix_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }

  /// V exp(-i Λ t) V† ψ.
  Amplitudes propagate(const Amplitudes& psi, double t) const;
  double energy(const Ket& state) const;

 private:
  int n_sites_;
  double hx_, hy_, coupling_;
  Matrix matrix_;
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
};

/// Published non-integrable parameter point.
struct IsingParameters {
  double hx = 0.8090;
  double hy = 0.9045;
  double coupling = 1.0;
};

/// Dense Hamiltonian matrix without diagonalization.
Matrix ising_matrix(int n_sites, double hx, double hy, double coupling);

/// Memoized per (n, hx, hy, J); thread-safe.
std::shared_ptr<const ChaoticHamiltonian> build_hamiltonian(int n_sites, double hx, double hy, double coupling,
                                                            int max_sites = ChaoticHamiltonian::kDefaultMaxSites);

Ket evolve(const Ket& state, const ChaoticHamiltonian& h, double t);

/// Evolution step size and the Hamiltonian it applies to.
struct EvolutionConfig {
  double dt = 0.02;
  std::shared_ptr<const ChaoticHamiltonian> hamiltonian;

  void validate() const;
};

}  // namespace chaodiff
