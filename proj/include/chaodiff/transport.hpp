#pragma once

#include <Eigen/Dense>

namespace chaodiff {

/// Optimal coupling with the dual potentials that certify it:
/// row_potential[i] + col_potential[j] <= cost(i, j), with equality wherever
/// the coupling is positive.
struct TransportPlan {
  Eigen::MatrixXd coupling;
  double objective = 0.0;
  Eigen::VectorXd row_potential;
  Eigen::VectorXd col_potential;
};

/// Exact min-cost perfect matching on a square cost matrix (shortest augmenting
/// paths with potentials). The coupling is the permutation matrix scaled by 1/n.
/// Ties are resolved toward the lowest row, then column, index.
TransportPlan solve_assignment(const Eigen::MatrixXd& cost);

/// Transportation simplex for arbitrary marginals (each summing to 1).
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Assignment when the problem is square with uniform marginals, simplex otherwise.
TransportPlan optimal_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace chaodiff
