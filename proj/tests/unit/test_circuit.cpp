#include <gtest/gtest.h>

#include "chaodiff/circuit.hpp"
#include "testutil.hpp"

using namespace chaodiff;

namespace {

Circuit mixed_circuit() {
  Circuit c(3, 4);
  c.rx(0, 0).ry(1, 1).cz(0, 1).cnot(1, 2).add({GateKind::RZ, 2, -1, 0.0, 2});
  c.add({GateKind::RZZ, 0, 2, 0.0, 3}).rotation(GateKind::RY, 0, 0.3);
  return c;
}

}  // namespace

TEST(Circuit, UnitaryMatchesDenseProduct) {
  const std::vector<double> p{0.1, -0.7, 1.3, 0.4};
  const Matrix zz = testutil::kron(testutil::pauli_z(), testutil::pauli_z());
  const Matrix rzz = (-std::complex<double>(0, 0.5 * p[3]) * zz.diagonal()).array().exp().matrix().asDiagonal();
  Matrix ref = Matrix::Identity(8, 8);
  auto push = [&](const Matrix& g) { ref = g * ref; };
  push(testutil::embed(testutil::rot(testutil::pauli_x(), p[0]), {0}, 3));
  push(testutil::embed(testutil::rot(testutil::pauli_y(), p[1]), {1}, 3));
  push(testutil::embed(testutil::cz_matrix(), {0, 1}, 3));
  push(testutil::embed(testutil::cnot_matrix(), {1, 2}, 3));
  push(testutil::embed(testutil::rot(testutil::pauli_z(), p[2]), {2}, 3));
  push(testutil::embed(rzz, {0, 2}, 3));
  push(testutil::embed(testutil::rot(testutil::pauli_y(), 0.3), {0}, 3));
  EXPECT_LT((mixed_circuit().unitary(p) - ref).norm(), 1e-13);
}

TEST(Circuit, BindAndInverse) {
  const std::vector<double> p{0.1, -0.7, 1.3, 0.4};
  const Circuit bound = mixed_circuit().bind(p);
  EXPECT_EQ(bound.n_params(), 0);
  EXPECT_LT((bound.unitary() - mixed_circuit().unitary(p)).norm(), 1e-14);
  const Matrix prod = bound.inverse().unitary() * bound.unitary();
  EXPECT_LT((prod - Matrix::Identity(8, 8)).norm(), 1e-13);
  EXPECT_THROW(mixed_circuit().inverse(), std::invalid_argument);
}

TEST(Circuit, RejectsBadGates) {
  Circuit c(2, 1);
  EXPECT_THROW(c.rx(2, 0), std::invalid_argument);
  EXPECT_THROW(c.rx(0, 1), std::invalid_argument);
  EXPECT_THROW(c.cz(1, 1), std::invalid_argument);
}

TEST(Circuit, AdjointGradientMatchesFiniteDifference) {
  Rng rng(3);
  const Circuit c = mixed_circuit();
  for (int trial = 0; trial < 10; ++trial) {
    const Ket in = testutil::random_ket(3, rng);
    const Ket target = testutil::random_ket(3, rng);
    std::vector<double> p(4);
    for (auto& v : p) v = rng.uniform(-M_PI, M_PI);
    // L = |<target|out>|^2, dL/d(out*) = <target|out> |target>.
    auto loss = [&](const std::vector<double>& q) { return fidelity(target, c.apply(in, q)); };
    const Ket out = c.apply(in, p);
    const Complex ov = target.amplitudes().dot(out.amplitudes());
    std::vector<double> grad(4, 0.0);
    accumulate_adjoint_gradient(c, p, out.amplitudes(), ov * target.amplitudes(), grad);
    for (int i = 0; i < 4; ++i) {
      auto hi = p, lo = p;
      hi[i] += 1e-6;
      lo[i] -= 1e-6;
      EXPECT_NEAR(grad[i], (loss(hi) - loss(lo)) / 2e-6, 1e-8);
    }
  }
}
