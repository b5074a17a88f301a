#include "chaodiff/qae.hpp"

#include <cmath>
#include <stdexcept>

namespace chaodiff {

void QaeModel::validate() const {
  if (n_latent < 1 || n_latent >= n_total) throw std::invalid_argument("qae: need 1 <= n_latent < n_total");
  if (depth < 0) throw std::invalid_argument("qae: depth must be >= 0");
  if (params.size() != static_cast<std::size_t>(n_total * depth)) {
    throw std::invalid_argument("qae: params length must be n_total * depth");
  }
}

QaeModel QaeModel::zeros(int n_total, int n_latent, int depth) {
  QaeModel m{n_total, n_latent, depth, std::vector<double>(static_cast<std::size_t>(std::max(0, n_total * depth)), 0.0)};
  m.validate();
  return m;
}

QaeModel QaeModel::random(int n_total, int n_latent, int depth, Rng& rng) {
  QaeModel m = zeros(n_total, n_latent, depth);
  for (auto& p : m.params) p = rng.uniform(-M_PI, M_PI);
  return m;
}

Circuit encoder_circuit(const QaeModel& model) {
  model.validate();
  const int n = model.n_total;
  Circuit c(n, n * model.depth);
  for (int l = 0; l < model.depth; ++l) {
    for (int q = 0; q < n; ++q) c.ry(q, l * n + q);
    for (int q = 0; q < n; ++q) c.cnot(q, (q + 1) % n);
  }
  return c;
}

namespace {

void check_batch(const QaeModel& model, const StateEnsemble& batch) {
  if (batch.n_qubits() != model.n_total) throw std::invalid_argument("qae: batch width differs from n_total");
}

// Zeroes every amplitude whose trash bits are not all 0.
Amplitudes trash_projection(const Amplitudes& psi, int n_trash) {
  const Eigen::Index mask = (Eigen::Index{1} << n_trash) - 1;
  Amplitudes out = Amplitudes::Zero(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); i += mask + 1) out[i] = psi[i];
  return out;
}

}  // namespace

double trash_loss(const QaeModel& model, const StateEnsemble& batch) {
  check_batch(model, batch);
  const Circuit enc = encoder_circuit(model);
  double kept = 0.0;
  for (const auto& m : batch.members()) {
    Amplitudes psi = m.state.amplitudes();
    enc.apply(psi, model.params);
    kept += m.weight * trash_projection(psi, model.n_trash()).squaredNorm();
  }
  return 1.0 - kept;
}

double trash_loss_gradient(const QaeModel& model, const StateEnsemble& batch, std::vector<double>& grad) {
  check_batch(model, batch);
  const Circuit enc = encoder_circuit(model);
  grad.assign(model.params.size(), 0.0);
  double kept = 0.0;
  for (const auto& m : batch.members()) {
    Amplitudes psi = m.state.amplitudes();
    enc.apply(psi, model.params);
    const Amplitudes proj = trash_projection(psi, model.n_trash());
    kept += m.weight * proj.squaredNorm();
    // L = 1 - sum_j w_j <psi_j|P|psi_j>, so dL/d<psi_j| = -w_j P psi_j.
    accumulate_adjoint_gradient(enc, model.params, psi, -m.weight * proj, grad);
  }
  return 1.0 - kept;
}

QaeTrainResult train_qae(QaeModel model, const StateEnsemble& data, int epochs, double learning_rate,
                         AdamSettings adam) {
  model.validate();
  check_batch(model, data);
  if (epochs < 0) throw std::invalid_argument("train_qae: epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train_qae: learning_rate must be positive");
  QaeTrainResult out{model, {}};
  out.losses.reserve(static_cast<std::size_t>(epochs));
  Adam opt(model.params.size(), learning_rate, adam);
  std::vector<double> grad;
  for (int e = 0; e < epochs; ++e) {
    const double loss = trash_loss_gradient(out.model, data, grad);
    if (!std::isfinite(loss)) throw std::runtime_error("train_qae: non-finite loss at epoch " + std::to_string(e));
    out.losses.push_back(loss);
    opt.step(out.model.params, grad);
  }
  return out;
}

Ket encode(const QaeModel& model, const Ket& state) {
  if (state.n_qubits() != model.n_total) throw std::invalid_argument("encode: state width differs from n_total");
  Amplitudes psi = state.amplitudes();
  encoder_circuit(model).apply(psi, model.params);
  const int shift = model.n_trash();
  Amplitudes latent(Eigen::Index{1} << model.n_latent);
  for (Eigen::Index i = 0; i < latent.size(); ++i) latent[i] = psi[i << shift];
  if (latent.squaredNorm() < 1e-12) throw std::runtime_error("encode: trash projection probability below 1e-12");
  return Ket::normalized(model.n_latent, std::move(latent));
}

Ket decode(const QaeModel& model, const Ket& latent) {
  if (latent.n_qubits() != model.n_latent) throw std::invalid_argument("decode: state width differs from n_latent");
  const Ket full = tensor(latent, Ket::zero(model.n_trash()));
  return encoder_circuit(model).bind(model.params).inverse().apply(full);
}

StateEnsemble encode_ensemble(const QaeModel& model, const StateEnsemble& e) {
  std::vector<WeightedKet> out;
  out.reserve(e.size());
  for (const auto& m : e.members()) out.push_back({m.weight, encode(model, m.state)});
  return StateEnsemble(std::move(out));
}

StateEnsemble decode_ensemble(const QaeModel& model, const StateEnsemble& e) {
  std::vector<WeightedKet> out;
  out.reserve(e.size());
  const Circuit inv = encoder_circuit(model).bind(model.params).inverse();
  for (const auto& m : e.members()) out.push_back({m.weight, inv.apply(tensor(m.state, Ket::zero(model.n_trash())))});
  return StateEnsemble(std::move(out));
}

}  // namespace chaodiff
