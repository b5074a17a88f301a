#include "chaodiff/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace chaodiff {

namespace {

void check_cost(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) throw std::invalid_argument("transport: empty cost matrix");
  if (!cost.allFinite()) throw std::invalid_argument("transport: non-finite cost");
}

void check_marginal(const Eigen::VectorXd& w, Eigen::Index expected, const char* name) {
  if (w.size() != expected) throw std::invalid_argument(std::string("transport: marginal ") + name + " has wrong length");
  if ((w.array() < 0.0).any() || !w.allFinite()) throw std::invalid_argument(std::string("transport: marginal ") + name + " is negative");
  if (std::abs(w.sum() - 1.0) > 1e-9) throw std::invalid_argument(std::string("transport: marginal ") + name + " does not sum to 1");
}

bool is_uniform(const Eigen::VectorXd& w) {
  const double target = 1.0 / static_cast<double>(w.size());
  return ((w.array() - target).abs() <= 1e-12).all();
}

}  // namespace

TransportPlan solve_assignment(const Eigen::MatrixXd& cost) {
  check_cost(cost);
  if (cost.rows() != cost.cols()) throw std::invalid_argument("solve_assignment: cost matrix must be square");
  const auto n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual root of each augmenting search.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  TransportPlan plan;
  const double w = 1.0 / static_cast<double>(n);
  plan.coupling = Eigen::MatrixXd::Zero(cost.rows(), cost.cols());
  plan.row_potential.resize(static_cast<Eigen::Index>(n));
  plan.col_potential.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 1; j <= n; ++j) {
    const auto r = static_cast<Eigen::Index>(match[j] - 1);
    const auto c = static_cast<Eigen::Index>(j - 1);
    plan.coupling(r, c) = w;
    plan.objective += w * cost(r, c);
  }
  for (std::size_t i = 1; i <= n; ++i) plan.row_potential[static_cast<Eigen::Index>(i - 1)] = u[i];
  for (std::size_t j = 1; j <= n; ++j) plan.col_potential[static_cast<Eigen::Index>(j - 1)] = v[j];
  return plan;
}

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_cost(cost);
  check_marginal(a, cost.rows(), "a");
  check_marginal(b, cost.cols(), "b");
  const auto m = static_cast<int>(cost.rows());
  const auto n = static_cast<int>(cost.cols());
  const int n_basic = m + n - 1;

  struct Cell {
    int row;
    int col;
    double flow;
  };
  std::vector<Cell> basis;
  basis.reserve(static_cast<std::size_t>(n_basic));
  Eigen::MatrixXi basic_id = Eigen::MatrixXi::Constant(m, n, -1);

  // Northwest-corner start; degenerate zero cells keep the basis a spanning tree.
  {
    std::vector<double> supply(a.data(), a.data() + m);
    std::vector<double> demand(b.data(), b.data() + n);
    int i = 0, j = 0;
    while (static_cast<int>(basis.size()) < n_basic) {
      const double x = std::max(0.0, std::min(supply[static_cast<std::size_t>(i)], demand[static_cast<std::size_t>(j)]));
      basic_id(i, j) = static_cast<int>(basis.size());
      basis.push_back({i, j, x});
      supply[static_cast<std::size_t>(i)] -= x;
      demand[static_cast<std::size_t>(j)] -= x;
      if (i < m - 1 && (j == n - 1 || supply[static_cast<std::size_t>(i)] <= demand[static_cast<std::size_t>(j)])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const int n_nodes = m + n;  // rows are 0..m-1, columns m..m+n-1
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n_nodes));
  std::vector<double> potential(static_cast<std::size_t>(n_nodes));
  std::vector<char> known(static_cast<std::size_t>(n_nodes));
  std::vector<int> parent_cell(static_cast<std::size_t>(n_nodes));
  std::vector<int> queue;
  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-13 * scale;
  const long max_iterations = 100L * n_nodes * n_nodes + 1000;

  auto other_end = [&](const Cell& c, int node) { return node < m ? m + c.col : c.row; };

  for (long iter = 0;; ++iter) {
    if (iter > max_iterations) throw std::runtime_error("solve_transport: iteration limit reached");
    for (auto& adj : adjacency) adj.clear();
    for (int k = 0; k < n_basic; ++k) {
      adjacency[static_cast<std::size_t>(basis[static_cast<std::size_t>(k)].row)].push_back(k);
      adjacency[static_cast<std::size_t>(m + basis[static_cast<std::size_t>(k)].col)].push_back(k);
    }
    // Potentials from the tree, anchored at u_0 = 0.
    std::fill(known.begin(), known.end(), 0);
    queue.assign(1, 0);
    potential[0] = 0.0;
    known[0] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const int node = queue[h];
      for (int k : adjacency[static_cast<std::size_t>(node)]) {
        const Cell& c = basis[static_cast<std::size_t>(k)];
        const int next = other_end(c, node);
        if (known[static_cast<std::size_t>(next)]) continue;
        potential[static_cast<std::size_t>(next)] = cost(c.row, c.col) - potential[static_cast<std::size_t>(node)];
        known[static_cast<std::size_t>(next)] = 1;
        queue.push_back(next);
      }
    }
    if (static_cast<int>(queue.size()) != n_nodes) throw std::logic_error("solve_transport: basis is not a spanning tree");

    // Entering cell: most negative reduced cost, lowest index on ties.
    int enter_row = -1, enter_col = -1;
    double best = -tol;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (basic_id(i, j) >= 0) continue;
        const double r = cost(i, j) - potential[static_cast<std::size_t>(i)] - potential[static_cast<std::size_t>(m + j)];
        if (r < best) {
          best = r;
          enter_row = i;
          enter_col = j;
        }
      }
    }
    if (enter_row < 0) break;

    // Tree path from the entering row to the entering column.
    std::fill(parent_cell.begin(), parent_cell.end(), -2);
    queue.assign(1, enter_row);
    parent_cell[static_cast<std::size_t>(enter_row)] = -1;
    const int target = m + enter_col;
    for (std::size_t h = 0; h < queue.size() && parent_cell[static_cast<std::size_t>(target)] == -2; ++h) {
      const int node = queue[h];
      for (int k : adjacency[static_cast<std::size_t>(node)]) {
        const int next = other_end(basis[static_cast<std::size_t>(k)], node);
        if (parent_cell[static_cast<std::size_t>(next)] != -2) continue;
        parent_cell[static_cast<std::size_t>(next)] = k;
        queue.push_back(next);
      }
    }
    // Walk back from the column: cells alternate -, +, -, ... starting at the column end.
    std::vector<int> path;
    for (int node = target; node != enter_row;) {
      const int k = parent_cell[static_cast<std::size_t>(node)];
      path.push_back(k);
      node = other_end(basis[static_cast<std::size_t>(k)], node);
    }
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const int k = path[p];
      if (basis[static_cast<std::size_t>(k)].flow < theta) {
        theta = basis[static_cast<std::size_t>(k)].flow;
        leaving = k;
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      Cell& c = basis[static_cast<std::size_t>(path[p])];
      c.flow += (p % 2 == 0) ? -theta : theta;
      if (c.flow < 0.0) c.flow = 0.0;
    }
    Cell& out = basis[static_cast<std::size_t>(leaving)];
    basic_id(out.row, out.col) = -1;
    out = {enter_row, enter_col, theta};
    basic_id(enter_row, enter_col) = leaving;
  }

  TransportPlan plan;
  plan.coupling = Eigen::MatrixXd::Zero(m, n);
  for (const auto& c : basis) plan.coupling(c.row, c.col) = c.flow;
  plan.objective = (plan.coupling.array() * cost.array()).sum();
  plan.row_potential.resize(m);
  plan.col_potential.resize(n);
  for (int i = 0; i < m; ++i) plan.row_potential[i] = potential[static_cast<std::size_t>(i)];
  for (int j = 0; j < n; ++j) plan.col_potential[j] = potential[static_cast<std::size_t>(m + j)];
  return plan;
}

TransportPlan optimal_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_cost(cost);
  check_marginal(a, cost.rows(), "a");
  check_marginal(b, cost.cols(), "b");
  if (cost.rows() == cost.cols() && is_uniform(a) && is_uniform(b)) return solve_assignment(cost);
  return solve_transport(cost, a, b);
}

}  // namespace chaodiff
