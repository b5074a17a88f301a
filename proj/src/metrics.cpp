#include "chaodiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chaodiff {

namespace {

void check_pair(const StateEnsemble& x, const StateEnsemble& y, const char* what) {
  if (x.n_qubits() != y.n_qubits()) throw std::invalid_argument(std::string(what) + ": qubit count mismatch");
}

void check_order(int m) {
  if (m < 1) throw std::invalid_argument("moment order must be >= 1");
}

}  // namespace

double mean_kernel(const StateEnsemble& x, const StateEnsemble& y) {
  check_pair(x, y, "mean_kernel");
  return x.weights().dot(gram_matrix(x, y) * y.weights());
}

double mmd(const StateEnsemble& x, const StateEnsemble& y) {
  check_pair(x, y, "mmd");
  const double d = mean_kernel(x, x) + mean_kernel(y, y) - 2.0 * mean_kernel(x, y);
  return std::max(0.0, d);
}

WassersteinResult wasserstein1(const StateEnsemble& x, const StateEnsemble& y) {
  check_pair(x, y, "wasserstein1");
  const Eigen::MatrixXd cost = (1.0 - gram_matrix(x, y).array()).matrix();
  TransportPlan plan = optimal_transport(cost, x.weights(), y.weights());
  const double d = std::max(0.0, plan.objective);
  return {d, std::move(plan)};
}

double moment_overlap(const StateEnsemble& x, const StateEnsemble& y, int m) {
  check_order(m);
  check_pair(x, y, "moment_overlap");
  const Eigen::MatrixXd g = gram_matrix(x, y).array().pow(m).matrix();
  return x.weights().dot(g * y.weights());
}

double symmetric_dimension(int n_qubits, int m) {
  check_order(m);
  const double d = std::ldexp(1.0, n_qubits);
  // binom(d + m - 1, m) as a running product.
  double out = 1.0;
  for (int k = 1; k <= m; ++k) out *= (d + m - k) / static_cast<double>(k);
  return out;
}

double moment_distance_haar(const StateEnsemble& e, int m) {
  const double self = moment_overlap(e, e, m);
  const double haar = 1.0 / symmetric_dimension(e.n_qubits(), m);
  // Tr[rho_e rho_Haar] = ||rho_Haar||^2 = 1/D_sym
  const double d2 = std::max(0.0, self - haar);
  return std::sqrt(d2 / haar);
}

double moment_distance(const StateEnsemble& e, int m, const StateEnsemble& reference) {
  check_pair(e, reference, "moment_distance");
  const double ee = moment_overlap(e, e, m);
  const double rr = moment_overlap(reference, reference, m);
  const double er = moment_overlap(e, reference, m);
  const double d2 = std::max(0.0, ee + rr - 2.0 * er);
  return std::sqrt(d2 / rr);
}

MomentReport moment_report(const StateEnsemble& e, int m, const StateEnsemble& target) {
  return {m, moment_distance_haar(e, m), moment_distance(e, m, target)};
}

double swap_test_probability(const Ket& a, const Ket& b) { return 0.5 + 0.5 * fidelity(a, b); }

double swap_test_fidelity(const Ket& a, const Ket& b, int shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("swap_test_fidelity: shots must be >= 1");
  const double p0 = swap_test_probability(a, b);
  long zeros = 0;
  for (int s = 0; s < shots; ++s) zeros += rng.uniform() < p0 ? 1 : 0;
  const double estimate = 2.0 * static_cast<double>(zeros) / static_cast<double>(shots) - 1.0;
  return std::clamp(estimate, 0.0, 1.0);
}

}  // namespace chaodiff
