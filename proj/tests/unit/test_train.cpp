#include <gtest/gtest.h>

#include "chaodiff/data.hpp"
#include "chaodiff/metrics.hpp"
#include "chaodiff/train.hpp"
#include "testutil.hpp"

using namespace chaodiff;

namespace {

struct Instance {
  std::vector<double> theta;
  LayerBatch batch;
};

Instance random_instance(Rng& rng, int n_m, int n_a, int layers, std::size_t size) {
  std::vector<double> theta(static_cast<std::size_t>(2 * (n_m + n_a) * layers));
  for (auto& t : theta) t = rng.uniform(-M_PI, M_PI);
  std::vector<Ket> inputs, target;
  for (std::size_t i = 0; i < size; ++i) {
    inputs.push_back(testutil::random_ket(n_m, rng));
    target.push_back(testutil::random_ket(n_m, rng));
  }
  return {theta, LayerBatch{StateEnsemble::uniform(target), inputs, {}}};
}

double fd_component(const Instance& in, std::size_t i, int n_a, int layers, const TrainConfig& cfg, double h) {
  auto hi = in.theta, lo = in.theta;
  hi[i] += h;
  lo[i] -= h;
  return (ensemble_cost(in.batch.target, layer_output(hi, in.batch, n_a, layers, cfg.branch_mode), cfg.cost) -
          ensemble_cost(in.batch.target, layer_output(lo, in.batch, n_a, layers, cfg.branch_mode), cfg.cost)) /
         (2 * h);
}

}  // namespace

TEST(TrainEnums, ParseAndPrint) {
  EXPECT_EQ(parse_cost("mmd"), CostKind::MMD);
  EXPECT_EQ(to_string(CostKind::Wasserstein), "wasserstein");
  EXPECT_EQ(parse_gradient_mode("finite_difference"), GradientMode::FiniteDifference);
  EXPECT_EQ(parse_branch_mode("enumerated"), BranchMode::Enumerated);
  EXPECT_THROW(parse_cost("kl"), std::invalid_argument);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate(1000));
  EXPECT_THROW(c.validate(50), std::invalid_argument);
  c.epochs = 0;
  EXPECT_THROW(c.validate(1000), std::invalid_argument);
  c.epochs = 1;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(1000), std::invalid_argument);
}

TEST(TrainConfig, PublishedDefaults) {
  const TrainConfig c;
  EXPECT_EQ(c.epochs, 1000);
  EXPECT_EQ(c.batch_size, 100u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.001);
  EXPECT_DOUBLE_EQ(c.adam.beta1, 0.9);
  EXPECT_DOUBLE_EQ(c.adam.beta2, 0.999);
  EXPECT_DOUBLE_EQ(c.adam.epsilon, 1e-8);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam opt(2, 0.1);
  std::vector<double> p{1.0, -1.0};
  const std::vector<double> g{3.0, -0.5};
  opt.step(p, g);
  EXPECT_NEAR(p[0], 0.9, 1e-7);
  EXPECT_NEAR(p[1], -0.9, 1e-7);
}

TEST(Gradient, EnumeratedMatchesFiniteDifference) {
  Rng rng(1);
  for (CostKind cost : {CostKind::MMD, CostKind::Wasserstein}) {
    TrainConfig cfg;
    cfg.cost = cost;
    cfg.branch_mode = BranchMode::Enumerated;
    for (int trial = 0; trial < 20; ++trial) {
      const auto in = random_instance(rng, 2, 1, 2, 4);
      const auto cg = cost_and_gradient(in.theta, in.batch, 1, 2, cfg);
      EXPECT_NEAR(cg.cost, ensemble_cost(in.batch.target, layer_output(in.theta, in.batch, 1, 2, cfg.branch_mode), cost),
                  1e-12);
      for (std::size_t i = 0; i < in.theta.size(); ++i) {
        const double fd = fd_component(in, i, 1, 2, cfg, 1e-6);
        EXPECT_LE(std::abs(cg.grad[i] - fd), std::max(1e-8, 1e-5 * std::abs(fd))) << "parameter " << i;
      }
    }
  }
}

TEST(Gradient, SampledMatchesFiniteDifference) {
  Rng rng(2);
  for (CostKind cost : {CostKind::MMD, CostKind::Wasserstein}) {
    TrainConfig cfg;
    cfg.cost = cost;
    for (int trial = 0; trial < 10; ++trial) {
      auto in = random_instance(rng, 2, 1, 2, 5);
      in.batch.outcomes = sample_outcomes(in.theta, in.batch.inputs, 1, 2, Rng(trial));
      const auto cg = cost_and_gradient(in.theta, in.batch, 1, 2, cfg);
      for (std::size_t i = 0; i < in.theta.size(); ++i) {
        const double fd = fd_component(in, i, 1, 2, cfg, 1e-6);
        EXPECT_LE(std::abs(cg.grad[i] - fd), std::max(1e-8, 1e-5 * std::abs(fd)));
      }
    }
  }
}

TEST(Gradient, FiniteDifferenceModeAgreesWithAdjoint) {
  Rng rng(3);
  auto in = random_instance(rng, 1, 1, 2, 4);
  TrainConfig cfg;
  cfg.branch_mode = BranchMode::Enumerated;
  cfg.cost = CostKind::MMD;
  const auto adj = cost_and_gradient(in.theta, in.batch, 1, 2, cfg);
  cfg.gradient_mode = GradientMode::FiniteDifference;
  const auto fd = cost_and_gradient(in.theta, in.batch, 1, 2, cfg);
  for (std::size_t i = 0; i < in.theta.size(); ++i) EXPECT_NEAR(adj.grad[i], fd.grad[i], 1e-8);
}

TEST(Gradient, WassersteinIsPlanWeightedPairGradient) {
  // With the plan frozen, dD/dtheta = sum_ij P_ij dC_ij/dtheta.
  Rng rng(4);
  auto in = random_instance(rng, 1, 1, 2, 4);
  in.batch.outcomes = sample_outcomes(in.theta, in.batch.inputs, 1, 2, Rng(1));
  TrainConfig cfg;
  const auto cg = cost_and_gradient(in.theta, in.batch, 1, 2, cfg);
  const auto plan = wasserstein1(in.batch.target, layer_output(in.theta, in.batch, 1, 2, cfg.branch_mode)).plan;
  for (std::size_t p = 0; p < in.theta.size(); ++p) {
    auto hi = in.theta, lo = in.theta;
    hi[p] += 1e-6;
    lo[p] -= 1e-6;
    const Eigen::MatrixXd dc = ((1.0 - gram_matrix(in.batch.target, layer_output(hi, in.batch, 1, 2, cfg.branch_mode)).array()) -
                                (1.0 - gram_matrix(in.batch.target, layer_output(lo, in.batch, 1, 2, cfg.branch_mode)).array())) /
                               2e-6;
    EXPECT_NEAR(cg.grad[p], (plan.coupling.array() * dc.array()).sum(), 1e-8);
  }
}

TEST(Gradient, StationaryAtCoincidence) {
  // theta = 0 with one layer is the identity on the data, so the output equals the target.
  const Ket psi = Ket::normalized(1, (Amplitudes(2) << Complex(0.6, 0.1), Complex(0.3, -0.7)).finished());
  LayerBatch batch{StateEnsemble::uniform({psi}), {psi}, {0}};
  const std::vector<double> theta(4, 0.0);
  TrainConfig cfg;
  cfg.cost = CostKind::MMD;
  const auto cg = cost_and_gradient(theta, batch, 1, 1, cfg);
  EXPECT_NEAR(cg.cost, 0.0, 1e-12);
  for (double g : cg.grad) EXPECT_NEAR(g, 0.0, 1e-8);
}

TEST(Training, SmokeLossDecreases) {
  const auto target = haar_product_ensemble(1, 60, Rng(5));
  std::vector<StateEnsemble> forward{target};
  Rng rng(6);
  TrainConfig cfg;
  cfg.cost = CostKind::MMD;
  cfg.epochs = 60;
  cfg.batch_size = 20;
  cfg.learning_rate = 0.05;
  const auto res = train_layerwise(forward, DenoiserStack::random(1, 1, 1, 2, rng), cfg);
  ASSERT_EQ(res.report.cycles.size(), 1u);
  const auto& l = res.report.cycles[0].losses;
  ASSERT_EQ(l.size(), 60u);
  double head = 0, tail = 0;
  for (int i = 0; i < 5; ++i) {
    head += l[i];
    tail += l[l.size() - 1 - i];
  }
  EXPECT_LT(tail, head);
}

TEST(Training, DeterministicGivenSeed) {
  const auto s0 = sample_circular(CircularSpec{}, 40, Rng(1));
  std::vector<StateEnsemble> forward{s0, haar_product_ensemble(2, 40, Rng(2))};
  Rng rng(3);
  const auto stack = DenoiserStack::random(2, 2, 1, 2, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 10;
  cfg.learning_rate = 0.01;
  const auto a = train_layerwise(forward, stack, cfg);
  const auto b = train_layerwise(forward, stack, cfg);
  EXPECT_EQ(a.stack.thetas, b.stack.thetas);
  for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(a.report.cycles[c].losses, b.report.cycles[c].losses);
  cfg.gradient_mode = GradientMode::FiniteDifference;
  cfg.branch_mode = BranchMode::Enumerated;
  EXPECT_EQ(train_layerwise(forward, stack, cfg).report.cycles[1].losses,
            train_layerwise(forward, stack, cfg).report.cycles[1].losses);
}

TEST(Training, LayersTrainInIsolation) {
  // Cycle K sees no other layer, so theta_K cannot depend on theta_1's initialization.
  const auto s0 = sample_circular(CircularSpec{}, 30, Rng(1));
  std::vector<StateEnsemble> forward{s0, haar_product_ensemble(2, 30, Rng(2))};
  Rng rng(3);
  auto a = DenoiserStack::random(2, 2, 1, 2, rng);
  auto b = a;
  for (auto& t : b.theta_mut(1)) t += 0.5;
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 10;
  const auto ra = train_layerwise(forward, a, cfg);
  const auto rb = train_layerwise(forward, b, cfg);
  EXPECT_EQ(ra.stack.thetas[1], rb.stack.thetas[1]);
  EXPECT_NE(ra.stack.thetas[0], rb.stack.thetas[0]);
  ASSERT_EQ(ra.report.cycles.size(), 2u);
  EXPECT_EQ(ra.report.cycles[0].step, 2);
  EXPECT_EQ(ra.report.cycles[1].step, 1);
}

TEST(Training, RejectsMismatchedInputs) {
  const auto s0 = sample_circular(CircularSpec{}, 30, Rng(1));
  Rng rng(3);
  TrainConfig cfg;
  cfg.batch_size = 10;
  EXPECT_THROW(train_layerwise({s0}, DenoiserStack::random(2, 2, 1, 1, rng), cfg), std::invalid_argument);
  EXPECT_THROW(train_layerwise({s0}, DenoiserStack::random(1, 1, 1, 1, rng), cfg), std::invalid_argument);
  cfg.batch_size = 31;
  EXPECT_THROW(train_layerwise({s0}, DenoiserStack::random(1, 2, 1, 1, rng), cfg), std::invalid_argument);
}
