#include <gtest/gtest.h>

#include "chaodiff/data.hpp"
#include "chaodiff/qae.hpp"
#include "testutil.hpp"

using namespace chaodiff;

namespace {

Matrix dense_encoder(const QaeModel& m) {
  const int n = m.n_total;
  Matrix u = Matrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int l = 0; l < m.depth; ++l) {
    Matrix local = Matrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) local = testutil::kron(local, testutil::rot(testutil::pauli_y(), m.params[l * n + q]));
    u = local * u;
    for (int q = 0; q < n; ++q) u = testutil::embed(testutil::cnot_matrix(), {q, (q + 1) % n}, n) * u;
  }
  return u;
}

/// <0..0|Tr_latent(rho)|0..0> from an explicit reduced density matrix.
double trash_zero_population(const Amplitudes& psi, int n_latent, int n_trash) {
  const Eigen::Index dl = Eigen::Index{1} << n_latent, dt = Eigen::Index{1} << n_trash;
  Matrix reduced = Matrix::Zero(dt, dt);
  for (Eigen::Index a = 0; a < dt; ++a)
    for (Eigen::Index b = 0; b < dt; ++b)
      for (Eigen::Index l = 0; l < dl; ++l) reduced(a, b) += psi[l * dt + a] * std::conj(psi[l * dt + b]);
  return reduced(0, 0).real();
}

StateEnsemble random_ensemble(int n, std::size_t size, Rng& rng) {
  std::vector<Ket> v;
  for (std::size_t i = 0; i < size; ++i) v.push_back(testutil::random_ket(n, rng));
  return StateEnsemble::uniform(v);
}

}  // namespace

TEST(Encoder, ZeroAnglesGiveCnotRing) {
  const auto m = QaeModel::zeros(2, 1, 1);
  const Matrix expect = testutil::embed(testutil::cnot_matrix(), {1, 0}, 2) * testutil::cnot_matrix();
  EXPECT_LT((encoder_circuit(m).unitary(m.params) - expect).norm(), 1e-14);
}

TEST(Encoder, MatchesDenseConstruction) {
  Rng rng(1);
  const auto m = QaeModel::random(3, 1, 3, rng);
  EXPECT_LT((encoder_circuit(m).unitary(m.params) - dense_encoder(m)).norm(), 1e-12);
}

TEST(Encoder, Validation) {
  EXPECT_THROW(QaeModel::zeros(2, 2, 1), std::invalid_argument);
  EXPECT_THROW(QaeModel::zeros(2, 0, 1), std::invalid_argument);
  QaeModel m = QaeModel::zeros(3, 1, 2);
  m.params.pop_back();
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(TrashLoss, Examples) {
  Rng rng(2);
  const auto depth0 = QaeModel::zeros(3, 1, 0);
  const auto batch = StateEnsemble::uniform({tensor(testutil::random_ket(1, rng), Ket::zero(2))});
  EXPECT_NEAR(trash_loss(depth0, batch), 0.0, 1e-14);
  // Two Bell pairs across latent and trash leave a maximally mixed trash marginal.
  const Ket bells = Ket::normalized(4, [] {
    Amplitudes a = Amplitudes::Zero(16);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) a[(x << 3) | (y << 2) | (x << 1) | y] = 0.5;
    return a;
  }());
  EXPECT_NEAR(trash_loss(QaeModel::zeros(4, 2, 0), StateEnsemble::uniform({bells})), 0.75, 1e-14);
}

TEST(TrashLoss, MatchesPartialTrace) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = QaeModel::random(4, 2, 2, rng);
    const auto batch = random_ensemble(4, 5, rng);
    double kept = 0.0;
    for (const auto& x : batch.members())
      kept += x.weight * trash_zero_population(dense_encoder(m) * x.state.amplitudes(), 2, 2);
    EXPECT_NEAR(trash_loss(m, batch), 1.0 - kept, 1e-12);
  }
}

TEST(TrashLoss, GradientMatchesFiniteDifference) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto m = QaeModel::random(4, 2, 2, rng);
    const auto batch = random_ensemble(4, 4, rng);
    std::vector<double> grad;
    const double loss = trash_loss_gradient(m, batch, grad);
    EXPECT_NEAR(loss, trash_loss(m, batch), 1e-14);
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      auto hi = m, lo = m;
      hi.params[i] += 1e-6;
      lo.params[i] -= 1e-6;
      EXPECT_NEAR(grad[i], (trash_loss(hi, batch) - trash_loss(lo, batch)) / 2e-6, 1e-8);
    }
  }
}

TEST(Training, ZeroEpochsIsNoOp) {
  Rng rng(5);
  const auto m = QaeModel::random(3, 1, 2, rng);
  const auto r = train_qae(m, random_ensemble(3, 4, rng), 0);
  EXPECT_EQ(r.model.params, m.params);
  EXPECT_TRUE(r.losses.empty());
}

TEST(Training, LearnsSmallCompressibleSet) {
  CompressibleSpec spec{3, 1, 1, 0.05, 7};
  const auto data = sample_compressible(spec, 30, Rng(1));
  Rng rng(2);
  const auto r = train_qae(QaeModel::random(3, 1, 3, rng), data.states, 600, 0.05);
  EXPECT_LT(r.losses.back(), r.losses.front());
  EXPECT_LT(trash_loss(r.model, data.states), 0.05);
}

TEST(EncodeDecode, ReferenceRoundTrip) {
  CompressibleSpec spec{4, 2, 2, 0.05, 3};
  const auto data = sample_compressible(spec, 20, Rng(4));
  EXPECT_LT(trash_loss(data.reference, data.states), 1e-12);
  for (std::size_t j = 0; j < 20; ++j) {
    const Ket latent = encode(data.reference, data.states.state(j));
    EXPECT_NEAR(fidelity(latent, data.latents.state(j)), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(decode(data.reference, latent), data.states.state(j)), 1.0, 1e-12);
  }
}

TEST(EncodeDecode, DepthZeroAndPostSelection) {
  Rng rng(6);
  const Ket phi = testutil::random_ket(1, rng);
  const auto m = QaeModel::zeros(3, 1, 0);
  EXPECT_NEAR(fidelity(encode(m, tensor(phi, Ket::zero(2))), phi), 1.0, 1e-14);
  EXPECT_THROW(encode(m, tensor(phi, Ket::basis(2, 3))), std::runtime_error);
  EXPECT_THROW(decode(m, Ket::zero(2)), std::invalid_argument);
}

TEST(EncodeDecode, InverseIsExact) {
  Rng rng(7);
  const auto m = QaeModel::random(4, 2, 3, rng);
  const Circuit bound = encoder_circuit(m).bind(m.params);
  EXPECT_LT((bound.inverse().unitary() * bound.unitary() - Matrix::Identity(16, 16)).norm(), 1e-12);
}
