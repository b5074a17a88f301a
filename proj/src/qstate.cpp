#include "chaodiff/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chaodiff {

namespace {

Eigen::Index dim_of(int n_qubits) { return Eigen::Index{1} << n_qubits; }

void check_qubit_count(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 30) {
    throw std::invalid_argument("qubit count must be in [1, 30], got " + std::to_string(n_qubits));
  }
}

}  // namespace

// Bitstring ----------------------------------------------------------------

std::string Bitstring::str() const {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if (bit(i)) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

Bitstring Bitstring::flipped(int position) const {
  Bitstring out = *this;
  out.value ^= std::uint64_t{1} << (width - 1 - position);
  return out;
}

Bitstring Bitstring::parse(const std::string& text) {
  Bitstring b;
  b.width = static_cast<int>(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bitstring: invalid character in '" + text + "'");
    b.value = (b.value << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return b;
}

// Ket ----------------------------------------------------------------------

Ket::Ket(int n_qubits, Amplitudes amplitudes) : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_qubit_count(n_qubits);
  if (amplitudes_.size() != dim_of(n_qubits)) {
    throw std::invalid_argument("Ket: expected " + std::to_string(dim_of(n_qubits)) + " amplitudes, got " +
                                std::to_string(amplitudes_.size()));
  }
  const double norm2 = amplitudes_.squaredNorm();
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTolerance) {
    throw std::invalid_argument("Ket: squared norm " + std::to_string(norm2) + " is not 1");
  }
}

Ket Ket::basis(int n_qubits, std::uint64_t index) {
  check_qubit_count(n_qubits);
  if (static_cast<Eigen::Index>(index) >= dim_of(n_qubits)) throw std::invalid_argument("Ket::basis: index out of range");
  Amplitudes a = Amplitudes::Zero(dim_of(n_qubits));
  a[static_cast<Eigen::Index>(index)] = 1.0;
  return Ket(n_qubits, std::move(a));
}

Ket Ket::normalized(int n_qubits, Amplitudes amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("Ket::normalized: zero or non-finite vector");
  amplitudes /= norm;
  return Ket(n_qubits, std::move(amplitudes));
}

Ket Ket::plus() {
  Amplitudes a(2);
  a << M_SQRT1_2, M_SQRT1_2;
  return Ket(1, std::move(a));
}

Ket Ket::ghz(int n_qubits) {
  check_qubit_count(n_qubits);
  Amplitudes a = Amplitudes::Zero(dim_of(n_qubits));
  a[0] = M_SQRT1_2;
  a[dim_of(n_qubits) - 1] = M_SQRT1_2;
  return Ket(n_qubits, std::move(a));
}

Matrix Ket::density() const { return amplitudes_ * amplitudes_.adjoint(); }

// StateEnsemble ------------------------------------------------------------

StateEnsemble::StateEnsemble(std::vector<WeightedKet> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("StateEnsemble: empty ensemble");
  const int n = members_.front().state.n_qubits();
  double total = 0.0;
  for (const auto& m : members_) {
    if (m.state.n_qubits() != n) throw std::invalid_argument("StateEnsemble: members have different qubit counts");
    if (!(m.weight >= 0.0) || !std::isfinite(m.weight)) throw std::invalid_argument("StateEnsemble: negative weight");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("StateEnsemble: weights sum to " + std::to_string(total));
  }
}

StateEnsemble StateEnsemble::uniform(std::vector<Ket> states) {
  if (states.empty()) throw std::invalid_argument("StateEnsemble: empty ensemble");
  const double w = 1.0 / static_cast<double>(states.size());
  std::vector<WeightedKet> members;
  members.reserve(states.size());
  for (auto& s : states) members.push_back({w, std::move(s)});
  return StateEnsemble(std::move(members));
}

bool StateEnsemble::has_uniform_weights(double tol) const {
  const double w = 1.0 / static_cast<double>(members_.size());
  return std::all_of(members_.begin(), members_.end(), [&](const WeightedKet& m) { return std::abs(m.weight - w) <= tol; });
}

Eigen::VectorXd StateEnsemble::weights() const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(members_.size()));
  for (std::size_t i = 0; i < members_.size(); ++i) w[static_cast<Eigen::Index>(i)] = members_[i].weight;
  return w;
}

Matrix StateEnsemble::state_matrix() const {
  Matrix m(members_.front().state.dim(), static_cast<Eigen::Index>(members_.size()));
  for (std::size_t i = 0; i < members_.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = members_[i].state.amplitudes();
  return m;
}

std::vector<Ket> StateEnsemble::states() const {
  std::vector<Ket> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.state);
  return out;
}

// Kernels --------------------------------------------------------------------

namespace kernels {

void apply_1q(Amplitudes& psi, int n_qubits, int q, const Mat2& u) {
  const Eigen::Index stride = Eigen::Index{1} << bit_shift(n_qubits, q);
  const Eigen::Index dim = psi.size();
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      const Complex a0 = psi[i];
      const Complex a1 = psi[i + stride];
      psi[i] = u(0, 0) * a0 + u(0, 1) * a1;
      psi[i + stride] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

void apply_2q(Amplitudes& psi, int n_qubits, int q_hi, int q_lo, const Mat4& u) {
  const Eigen::Index bh = Eigen::Index{1} << bit_shift(n_qubits, q_hi);
  const Eigen::Index bl = Eigen::Index{1} << bit_shift(n_qubits, q_lo);
  const Eigen::Index dim = psi.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & bh) || (i & bl)) continue;
    const Eigen::Index idx[4] = {i, i | bl, i | bh, i | bh | bl};
    Complex in[4];
    for (int k = 0; k < 4; ++k) in[k] = psi[idx[k]];
    for (int r = 0; r < 4; ++r) {
      psi[idx[r]] = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
    }
  }
}

void apply_x(Amplitudes& psi, int n_qubits, int q) {
  const Eigen::Index stride = Eigen::Index{1} << bit_shift(n_qubits, q);
  for (Eigen::Index base = 0; base < psi.size(); base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) std::swap(psi[i], psi[i + stride]);
  }
}

void apply_y(Amplitudes& psi, int n_qubits, int q) {
  const Eigen::Index stride = Eigen::Index{1} << bit_shift(n_qubits, q);
  const Complex I(0.0, 1.0);
  for (Eigen::Index base = 0; base < psi.size(); base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      const Complex a0 = psi[i];
      const Complex a1 = psi[i + stride];
      psi[i] = -I * a1;
      psi[i + stride] = I * a0;
    }
  }
}

void apply_z(Amplitudes& psi, int n_qubits, int q) {
  const Eigen::Index mask = Eigen::Index{1} << bit_shift(n_qubits, q);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (i & mask) psi[i] = -psi[i];
  }
}

void apply_cz(Amplitudes& psi, int n_qubits, int a, int b) {
  const Eigen::Index mask = (Eigen::Index{1} << bit_shift(n_qubits, a)) | (Eigen::Index{1} << bit_shift(n_qubits, b));
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if ((i & mask) == mask) psi[i] = -psi[i];
  }
}

void apply_cnot(Amplitudes& psi, int n_qubits, int control, int target) {
  const Eigen::Index cm = Eigen::Index{1} << bit_shift(n_qubits, control);
  const Eigen::Index tm = Eigen::Index{1} << bit_shift(n_qubits, target);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if ((i & cm) && !(i & tm)) std::swap(psi[i], psi[i | tm]);
  }
}

void apply_rzz(Amplitudes& psi, int n_qubits, int a, int b, double angle) {
  const Eigen::Index ma = Eigen::Index{1} << bit_shift(n_qubits, a);
  const Eigen::Index mb = Eigen::Index{1} << bit_shift(n_qubits, b);
  const Complex same = std::polar(1.0, -angle / 2.0);
  const Complex diff = std::polar(1.0, angle / 2.0);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const bool parity = static_cast<bool>(i & ma) != static_cast<bool>(i & mb);
    psi[i] *= parity ? diff : same;
  }
}

SubsystemSplit split_subsystem(int n_qubits, std::span<const int> measured) {
  SubsystemSplit s;
  s.measured.assign(measured.begin(), measured.end());
  for (int q = 0; q < n_qubits; ++q) {
    if (std::find(measured.begin(), measured.end(), q) == measured.end()) s.kept.push_back(q);
  }
  const std::size_t dim = std::size_t{1} << n_qubits;
  s.kept_index.resize(dim);
  s.outcome_index.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint32_t k = 0;
    for (int q : s.kept) k = (k << 1) | static_cast<std::uint32_t>((i >> bit_shift(n_qubits, q)) & 1U);
    std::uint32_t z = 0;
    for (int q : s.measured) z = (z << 1) | static_cast<std::uint32_t>((i >> bit_shift(n_qubits, q)) & 1U);
    s.kept_index[i] = k;
    s.outcome_index[i] = z;
  }
  return s;
}

}  // namespace kernels

// Validation -----------------------------------------------------------------

void validate_targets(int n_qubits, std::span<const int> targets) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n_qubits) {
      throw std::invalid_argument("target qubit " + std::to_string(targets[i]) + " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) throw std::invalid_argument("duplicate target qubit " + std::to_string(targets[i]));
    }
  }
}

void validate_measured(int n_qubits, std::span<const int> measured) {
  if (measured.empty()) throw std::invalid_argument("measured qubit set is empty");
  validate_targets(n_qubits, measured);
  if (static_cast<int>(measured.size()) >= n_qubits) {
    throw std::invalid_argument("cannot measure every qubit: post-measurement state would be empty");
  }
}

// Operations -----------------------------------------------------------------

Ket tensor(const Ket& a, const Ket& b) {
  Amplitudes out(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a[i] * b.amplitudes();
  }
  return Ket::normalized(a.n_qubits() + b.n_qubits(), std::move(out));
}

Ket apply_gate(const Ket& state, const Matrix& gate, std::span<const int> targets) {
  const auto m = static_cast<int>(targets.size());
  if (m != 1 && m != 2) throw std::invalid_argument("apply_gate: only 1- and 2-qubit gates are supported");
  validate_targets(state.n_qubits(), targets);
  const Eigen::Index gdim = Eigen::Index{1} << m;
  if (gate.rows() != gdim || gate.cols() != gdim) throw std::invalid_argument("apply_gate: gate dimension mismatch");
  const double defect = (gate.adjoint() * gate - Matrix::Identity(gdim, gdim)).cwiseAbs().maxCoeff();
  if (!(defect <= kUnitaryTolerance)) throw std::invalid_argument("apply_gate: gate is not unitary");
  Amplitudes psi = state.amplitudes();
  if (m == 1) {
    kernels::apply_1q(psi, state.n_qubits(), targets[0], gate);
  } else {
    kernels::apply_2q(psi, state.n_qubits(), targets[0], targets[1], gate);
  }
  return Ket::normalized(state.n_qubits(), std::move(psi));
}

double fidelity(const Ket& a, const Ket& b) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("fidelity: qubit count mismatch");
  return std::min(1.0, std::norm(a.amplitudes().dot(b.amplitudes())));
}

namespace {

// Columns hold the unnormalized conditional states of each outcome.
Matrix branch_matrix(const Ket& state, const kernels::SubsystemSplit& split) {
  const Eigen::Index kept_dim = Eigen::Index{1} << split.kept.size();
  const Eigen::Index out_dim = Eigen::Index{1} << split.measured.size();
  Matrix branches = Matrix::Zero(kept_dim, out_dim);
  for (Eigen::Index i = 0; i < state.dim(); ++i) {
    branches(split.kept_index[static_cast<std::size_t>(i)], split.outcome_index[static_cast<std::size_t>(i)]) = state[i];
  }
  return branches;
}

}  // namespace

MeasurementRecord measure_subset(const Ket& state, std::span<const int> measured, Rng& rng) {
  validate_measured(state.n_qubits(), measured);
  const auto split = kernels::split_subsystem(state.n_qubits(), measured);
  const Matrix branches = branch_matrix(state, split);
  std::vector<double> probs(static_cast<std::size_t>(branches.cols()));
  for (Eigen::Index z = 0; z < branches.cols(); ++z) {
    const double p = branches.col(z).squaredNorm();
    probs[static_cast<std::size_t>(z)] = p < kBranchCutoff ? 0.0 : p;
  }
  const std::size_t z = rng.categorical(probs);
  const auto width = static_cast<int>(measured.size());
  const auto kept_n = static_cast<int>(split.kept.size());
  return {Bitstring{z, width}, probs[z],
          Ket::normalized(kept_n, branches.col(static_cast<Eigen::Index>(z)))};
}

std::vector<MeasurementRecord> enumerate_branches(const Ket& state, std::span<const int> measured) {
  validate_measured(state.n_qubits(), measured);
  const auto split = kernels::split_subsystem(state.n_qubits(), measured);
  const Matrix branches = branch_matrix(state, split);
  const auto width = static_cast<int>(measured.size());
  const auto kept_n = static_cast<int>(split.kept.size());
  std::vector<MeasurementRecord> out;
  for (Eigen::Index z = 0; z < branches.cols(); ++z) {
    const double p = branches.col(z).squaredNorm();
    if (p < kBranchCutoff) continue;
    out.push_back({Bitstring{static_cast<std::uint64_t>(z), width}, p, Ket::normalized(kept_n, branches.col(z))});
  }
  return out;
}

Ket haar_qubit(Rng& rng) {
  Amplitudes a(2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    a[i] = Complex(re, im);
  }
  return Ket::normalized(1, std::move(a));
}

Ket haar_product_state(int n_qubits, Rng& rng) {
  check_qubit_count(n_qubits);
  Amplitudes psi = haar_qubit(rng).amplitudes();
  for (int q = 1; q < n_qubits; ++q) {
    const Amplitudes next = haar_qubit(rng).amplitudes();
    Amplitudes out(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      out[2 * i] = psi[i] * next[0];
      out[2 * i + 1] = psi[i] * next[1];
    }
    psi = std::move(out);
  }
  return Ket::normalized(n_qubits, std::move(psi));
}

Ket haar_state(int n_qubits, Rng& rng) {
  check_qubit_count(n_qubits);
  Amplitudes a(dim_of(n_qubits));
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    a[i] = Complex(re, im);
  }
  return Ket::normalized(n_qubits, std::move(a));
}

Eigen::MatrixXd gram_matrix(const StateEnsemble& x, const StateEnsemble& y) {
  if (x.n_qubits() != y.n_qubits()) throw std::invalid_argument("gram_matrix: qubit count mismatch");
  const Matrix overlaps = x.state_matrix().adjoint() * y.state_matrix();
  return overlaps.cwiseAbs2().cwiseMin(1.0);
}

}  // namespace chaodiff
