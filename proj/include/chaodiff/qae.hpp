#pragma once

#include <vector>

#include "chaodiff/circuit.hpp"
#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"
#include "chaodiff/train.hpp"

namespace chaodiff {

/// Quantum autoencoder. The latent qubits are the first n_latent qubits and
/// the trash qubits are the remaining n_total - n_latent.
struct QaeModel {
  int n_total = 2;
  int n_latent = 1;
  int depth = 20;
  /// params[l * n_total + q] is the RY angle on qubit q in layer l.
  std::vector<double> params;

  int n_trash() const { return n_total - n_latent; }
  void validate() const;

  static QaeModel zeros(int n_total, int n_latent, int depth);
  /// Angles uniform in [-pi, pi].
  static QaeModel random(int n_total, int n_latent, int depth, Rng& rng);
};

/// Per layer: RY on every qubit, then CNOT(q -> q+1 mod n) for q = 0..n-1.
Circuit encoder_circuit(const QaeModel& model);

/// 1 - mean probability that the trash register reads 0..0 after encoding.
double trash_loss(const QaeModel& model, const StateEnsemble& batch);
double trash_loss_gradient(const QaeModel& model, const StateEnsemble& batch, std::vector<double>& grad);

struct QaeTrainResult {
  QaeModel model;
  std::vector<double> losses;
};

/// Full-batch Adam on the trash loss. losses[e] is the loss before update e.
QaeTrainResult train_qae(QaeModel model, const StateEnsemble& data, int epochs = 2000, double learning_rate = 0.001,
                         AdamSettings adam = {});

/// Encoder, then post-selection of the trash onto 0..0. Throws when that
/// probability is below 1e-12.
Ket encode(const QaeModel& model, const Ket& state);
/// |latent>|0..0> through the exact inverse encoder.
Ket decode(const QaeModel& model, const Ket& latent);

StateEnsemble encode_ensemble(const QaeModel& model, const StateEnsemble& e);
StateEnsemble decode_ensemble(const QaeModel& model, const StateEnsemble& e);

}  // namespace chaodiff
