#include <gtest/gtest.h>

#include "chaodiff/metrics.hpp"
#include "testutil.hpp"

using namespace chaodiff;

namespace {

StateEnsemble random_ensemble(int n, std::size_t size, Rng& rng) {
  std::vector<Ket> v;
  for (std::size_t i = 0; i < size; ++i) v.push_back(testutil::random_ket(n, rng));
  return StateEnsemble::uniform(v);
}

StateEnsemble weighted(const StateEnsemble& e, Rng& rng) {
  std::vector<WeightedKet> m;
  double total = 0.0;
  for (const auto& x : e.members()) {
    m.push_back({rng.uniform(0.1, 1.0), x.state});
    total += m.back().weight;
  }
  for (auto& x : m) x.weight /= total;
  return StateEnsemble(m);
}

}  // namespace

TEST(Mmd, Examples) {
  const auto zero = StateEnsemble::uniform({Ket::zero(1)});
  const auto one = StateEnsemble::uniform({Ket::basis(1, 1)});
  EXPECT_NEAR(mmd(zero, zero), 0.0, 1e-15);
  EXPECT_NEAR(mmd(zero, one), 2.0, 1e-15);
  const auto both = StateEnsemble::uniform({Ket::zero(1), Ket::basis(1, 1)});
  EXPECT_NEAR(mmd(both, zero), 0.5 + 1.0 - 1.0, 1e-15);
}

TEST(Mmd, MatchesDoubleSumAndIsSymmetric) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = weighted(random_ensemble(2, 5, rng), rng);
    const auto y = random_ensemble(2, 7, rng);
    auto k = [](const StateEnsemble& a, const StateEnsemble& b) {
      double s = 0.0;
      for (const auto& p : a.members())
        for (const auto& q : b.members()) s += p.weight * q.weight * fidelity(p.state, q.state);
      return s;
    };
    EXPECT_NEAR(mmd(x, y), k(x, x) + k(y, y) - 2 * k(x, y), 1e-13);
    EXPECT_NEAR(mmd(x, y), mmd(y, x), 1e-15);
    EXPECT_GE(mmd(x, y), 0.0);
  }
}

TEST(Wasserstein, Examples) {
  Rng rng(2);
  const auto x = random_ensemble(2, 6, rng);
  const auto self = wasserstein1(x, x);
  EXPECT_NEAR(self.distance, 0.0, 1e-12);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(self.plan.coupling(i, i), 1.0 / 6, 1e-15);
  const auto zero = StateEnsemble::uniform({Ket::zero(1)});
  const auto one = StateEnsemble::uniform({Ket::basis(1, 1)});
  EXPECT_NEAR(wasserstein_distance(zero, one), 1.0, 1e-15);
}

TEST(Wasserstein, MatchesBruteForceAssignment) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_ensemble(2, 5, rng);
    const auto y = random_ensemble(2, 5, rng);
    const Eigen::MatrixXd cost = 1.0 - gram_matrix(x, y).array();
    EXPECT_NEAR(wasserstein_distance(x, y), testutil::brute_force_assignment(cost), 1e-9);
  }
}

TEST(Wasserstein, UnequalSizesMatchReplicatedAssignment) {
  // Uniform 2 vs 3 marginals equal a 6x6 assignment with each x tripled and each y doubled.
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_ensemble(1, 2, rng);
    const auto y = random_ensemble(1, 3, rng);
    const Eigen::MatrixXd small = 1.0 - gram_matrix(x, y).array();
    Eigen::MatrixXd big(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) big(i, j) = small(i / 3, j / 2);
    const auto r = wasserstein1(x, y);
    EXPECT_NEAR(r.distance, testutil::brute_force_assignment(big), 1e-9);
    EXPECT_LT((r.plan.coupling.rowwise().sum() - x.weights()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((r.plan.coupling.colwise().sum().transpose() - y.weights()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GE(r.plan.coupling.minCoeff(), -1e-12);
  }
}

TEST(Wasserstein, WeightedMarginalsAndDuality) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = weighted(random_ensemble(2, 4, rng), rng);
    const auto y = weighted(random_ensemble(2, 6, rng), rng);
    const auto r = wasserstein1(x, y);
    const Eigen::MatrixXd cost = 1.0 - gram_matrix(x, y).array();
    EXPECT_LT((r.plan.coupling.rowwise().sum() - x.weights()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((r.plan.coupling.colwise().sum().transpose() - y.weights()).cwiseAbs().maxCoeff(), 1e-9);
    const double dual = r.plan.row_potential.dot(x.weights()) + r.plan.col_potential.dot(y.weights());
    EXPECT_NEAR(dual, r.distance, 1e-9);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 6; ++j) EXPECT_LE(r.plan.row_potential[i] + r.plan.col_potential[j], cost(i, j) + 1e-9);
  }
}

TEST(Wasserstein, InvariantUnderPermutation) {
  Rng rng(6);
  const auto x = random_ensemble(2, 6, rng);
  const auto y = random_ensemble(2, 6, rng);
  auto states = x.states();
  std::reverse(states.begin(), states.end());
  std::swap(states[0], states[3]);
  EXPECT_NEAR(wasserstein_distance(StateEnsemble::uniform(states), y), wasserstein_distance(x, y), 1e-12);
}

TEST(Moments, Examples) {
  const auto mixed = StateEnsemble::uniform({Ket::zero(1), Ket::basis(1, 1)});
  EXPECT_NEAR(moment_distance_haar(mixed, 1), 0.0, 1e-7);
  for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(symmetric_dimension(n, 1), std::ldexp(1.0, n));
  EXPECT_DOUBLE_EQ(symmetric_dimension(1, 2), 3.0);
  EXPECT_DOUBLE_EQ(symmetric_dimension(2, 3), 20.0);
  EXPECT_THROW(symmetric_dimension(2, 0), std::invalid_argument);
  const auto a = StateEnsemble::uniform({Ket::zero(1)});
  EXPECT_THROW(moment_distance(a, 1, StateEnsemble::uniform({Ket::zero(2)})), std::invalid_argument);
}

TEST(Moments, MatchesDenseSymmetricSubspace) {
  Rng rng(7);
  for (int n : {1, 2}) {
    for (int m : {1, 2, 3}) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto e = weighted(random_ensemble(n, 6, rng), rng);
        const auto r = random_ensemble(n, 4, rng);
        EXPECT_NEAR(moment_distance_haar(e, m), testutil::dense_moment_distance_haar(e, m), 1e-10);
        EXPECT_NEAR(moment_distance(e, m, r), testutil::dense_moment_distance(e, m, r), 1e-10);
      }
    }
  }
}

TEST(Moments, SelfDistanceIsZero) {
  Rng rng(8);
  const auto e = random_ensemble(2, 10, rng);
  for (int m : {1, 2, 3}) EXPECT_LT(moment_distance(e, m, e), 1e-7);
  const auto rep = moment_report(e, 2, e);
  EXPECT_EQ(rep.m, 2);
  EXPECT_LT(rep.delta_target, 1e-7);
  EXPECT_NEAR(rep.delta_haar, moment_distance_haar(e, 2), 1e-15);
}

TEST(SwapTest, Examples) {
  EXPECT_DOUBLE_EQ(swap_test_probability(Ket::zero(1), Ket::zero(1)), 1.0);
  EXPECT_DOUBLE_EQ(swap_test_probability(Ket::zero(1), Ket::basis(1, 1)), 0.5);
  Rng rng(9);
  EXPECT_DOUBLE_EQ(swap_test_fidelity(Ket::zero(1), Ket::zero(1), 1000, rng), 1.0);
  EXPECT_NEAR(swap_test_fidelity(Ket::zero(1), Ket::basis(1, 1), 100000, rng), 0.0, 0.02);
  EXPECT_THROW(swap_test_fidelity(Ket::zero(1), Ket::zero(1), 0, rng), std::invalid_argument);
}

TEST(SwapTest, ConcentratesOnFidelity) {
  Rng rng(10);
  const int shots = 100000;
  for (int trial = 0; trial < 20; ++trial) {
    const Ket a = testutil::random_ket(2, rng);
    const Ket b = testutil::random_ket(2, rng);
    const double p = swap_test_probability(a, b);
    const double est = swap_test_fidelity(a, b, shots, rng);
    // The estimate is 2 f - 1, so a 4 sigma band on f doubles in fidelity units.
    EXPECT_LT(std::abs(est - fidelity(a, b)), 2 * 4 * std::sqrt(p * (1 - p) / shots));
  }
}
