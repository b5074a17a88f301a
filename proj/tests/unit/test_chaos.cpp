#include <gtest/gtest.h>

#include <algorithm>

#include "chaodiff/chaos.hpp"
#include "testutil.hpp"

using namespace chaodiff;

namespace {

std::vector<double> sorted_eigs(const ChaoticHamiltonian& h) {
  std::vector<double> v(h.eigenvalues().data(), h.eigenvalues().data() + h.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Hamiltonian, PureCouplingSpectrum) {
  const auto v = sorted_eigs(ChaoticHamiltonian(2, 0.0, 0.0, 1.0));
  const std::vector<double> expect{-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v[i], expect[i], 1e-12);
}

TEST(Hamiltonian, PureFieldSpectrum) {
  const auto v = sorted_eigs(ChaoticHamiltonian(2, 1.0, 0.0, 0.0));
  const std::vector<double> expect{-2, 0, 0, 2};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v[i], expect[i], 1e-12);
}

TEST(Hamiltonian, MatrixMatchesPauliSum) {
  const double hx = 0.8090, hy = 0.9045, j = 1.0;
  const int n = 3;
  Matrix ref = Matrix::Zero(8, 8);
  for (int q = 0; q < n; ++q) {
    ref += hx * testutil::embed(testutil::pauli_x(), {q}, n);
    ref += hy * testutil::embed(testutil::pauli_y(), {q}, n);
  }
  for (int q = 0; q + 1 < n; ++q)
    ref += j * testutil::embed(testutil::kron(testutil::pauli_x(), testutil::pauli_x()), {q, q + 1}, n);
  const ChaoticHamiltonian h(n, hx, hy, j);
  EXPECT_LT((h.matrix() - ref).norm(), 1e-13);
  EXPECT_LT((h.matrix() - h.matrix().adjoint()).norm(), 1e-14);
  const Matrix& v = h.eigenvectors();
  EXPECT_LT((v.adjoint() * v - Matrix::Identity(8, 8)).norm(), 1e-12);
  EXPECT_LT((v * h.eigenvalues().cast<Complex>().asDiagonal() * v.adjoint() - ref).norm(), 1e-12);
}

TEST(Hamiltonian, Preconditions) {
  EXPECT_THROW(ChaoticHamiltonian(1, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(ChaoticHamiltonian(14, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(ChaoticHamiltonian(2, NAN, 1, 1), std::invalid_argument);
  EXPECT_NO_THROW(ChaoticHamiltonian(4, 0.8090, 0.9045, 1.0));
}

TEST(Hamiltonian, MemoizedPerParameters) {
  auto a = build_hamiltonian(3, 0.8090, 0.9045, 1.0);
  auto b = build_hamiltonian(3, 0.8090, 0.9045, 1.0);
  auto c = build_hamiltonian(3, 0.8, 0.9045, 1.0);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_NE(a.get(), c.get());
}

TEST(Evolve, ZeroTimeIsIdentity) {
  Rng rng(1);
  const Ket psi = testutil::random_ket(3, rng);
  const auto h = build_hamiltonian(3, 0.8090, 0.9045, 1.0);
  EXPECT_LT((evolve(psi, *h, 0.0).amplitudes() - psi.amplitudes()).norm(), 1e-13);
}

TEST(Evolve, TransverseFieldRotation) {
  // J = hy = 0: every site rotates as exp(-i h t X).
  const double h = 0.7, t = 0.9;
  const ChaoticHamiltonian ham(2, h, 0.0, 0.0);
  const Ket out = evolve(Ket::zero(2), ham, t);
  const double c = std::cos(h * t), s = std::sin(h * t);
  EXPECT_NEAR(std::abs(out[0] - Complex(c * c, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(out[1] - Complex(0, -c * s)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(out[2] - Complex(0, -c * s)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(out[3] - Complex(-s * s, 0)), 0.0, 1e-12);
}

TEST(Evolve, MatchesTaylorExponential) {
  Rng rng(2);
  const auto h = build_hamiltonian(4, 0.8090, 0.9045, 1.0);
  for (double t : {0.02, 0.5, 3.0}) {
    const Ket psi = testutil::random_ket(4, rng);
    const Matrix u = testutil::expm_taylor(Complex(0, -t) * h->matrix());
    EXPECT_LT((evolve(psi, *h, t).amplitudes() - u * psi.amplitudes()).norm(), 1e-10);
  }
}

TEST(Evolve, ConservesNormAndEnergy) {
  Rng rng(3);
  const auto h = build_hamiltonian(3, 0.8090, 0.9045, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Ket psi = testutil::random_ket(3, rng);
    const Ket out = evolve(psi, *h, rng.uniform(0.0, 5.0));
    EXPECT_NEAR(out.amplitudes().squaredNorm(), 1.0, 1e-12);
    EXPECT_NEAR(h->energy(out), h->energy(psi), 1e-11);
  }
}

TEST(Evolve, ComposesInTime) {
  Rng rng(4);
  const auto h = build_hamiltonian(3, 0.8090, 0.9045, 1.0);
  const Ket psi = testutil::random_ket(3, rng);
  const Ket two = evolve(evolve(psi, *h, 0.3), *h, 0.45);
  EXPECT_LT((two.amplitudes() - evolve(psi, *h, 0.75).amplitudes()).norm(), 1e-12);
}

TEST(Evolve, Preconditions) {
  const auto h = build_hamiltonian(2, 0.8090, 0.9045, 1.0);
  EXPECT_THROW(evolve(Ket::zero(3), *h, 0.1), std::invalid_argument);
  EXPECT_THROW(evolve(Ket::zero(2), *h, -0.1), std::invalid_argument);
  EvolutionConfig cfg;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.hamiltonian = h;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
