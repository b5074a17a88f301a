#pragma once

#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"
#include "chaodiff/transport.hpp"

namespace chaodiff {

/// Weighted mean fidelity kernel sum_ij x_i y_j |<x_i|y_j>|^2.
double mean_kernel(const StateEnsemble& x, const StateEnsemble& y);

/// Fidelity-kernel MMD: k(X,X) + k(Y,Y) - 2 k(X,Y), clamped at zero.
double mmd(const StateEnsemble& x, const StateEnsemble& y);

struct WassersteinResult {
  double distance;
  TransportPlan plan;
};

/// Exact 1-Wasserstein distance under the cost 1 - |<x_i|y_j>|^2, using the
/// ensemble weights as marginals.
WassersteinResult wasserstein1(const StateEnsemble& x, const StateEnsemble& y);
inline double wasserstein_distance(const StateEnsemble& x, const StateEnsemble& y) { return wasserstein1(x, y).distance; }

/// Tr[rho_x^(m) rho_y^(m)] = sum_ij w_i v_j |<x_i|y_j>|^(2m).
double moment_overlap(const StateEnsemble& x, const StateEnsemble& y, int m);

/// Dimension of the symmetric subspace, binom(d + m - 1, m).
double symmetric_dimension(int n_qubits, int m);

/// ||rho_e^(m) - rho_Haar^(m)||_2 / ||rho_Haar^(m)||_2.
double moment_distance_haar(const StateEnsemble& e, int m);
/// ||rho_e^(m) - rho_ref^(m)||_2 / ||rho_ref^(m)||_2.
double moment_distance(const StateEnsemble& e, int m, const StateEnsemble& reference);

struct MomentReport {
  int m;
  double delta_haar;
  double delta_target;
};
MomentReport moment_report(const StateEnsemble& e, int m, const StateEnsemble& target);

/// Probability of reading 0 on the SWAP-test control qubit: 1/2 + |<a|b>|^2 / 2.
double swap_test_probability(const Ket& a, const Ket& b);
/// Shot-based estimate 2 f_0 - 1 clamped to [0, 1].
double swap_test_fidelity(const Ket& a, const Ket& b, int shots, Rng& rng);

}  // namespace chaodiff
