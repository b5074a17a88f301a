#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chaodiff/denoiser.hpp"
#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"

namespace chaodiff {

enum class CostKind { Wasserstein, MMD };
enum class GradientMode { Adjoint, FiniteDifference };
enum class BranchMode { Sampled, Enumerated };

std::string to_string(CostKind c);
std::string to_string(GradientMode g);
std::string to_string(BranchMode b);
CostKind parse_cost(const std::string& name);
GradientMode parse_gradient_mode(const std::string& name);
BranchMode parse_branch_mode(const std::string& name);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 1000;
  std::size_t batch_size = 100;
  double learning_rate = 0.001;
  CostKind cost = CostKind::Wasserstein;
  std::uint64_t seed = 0;
  GradientMode gradient_mode = GradientMode::Adjoint;
  BranchMode branch_mode = BranchMode::Sampled;
  AdamSettings adam;
  double fd_step = 1e-5;

  /// Throws unless epochs >= 1, learning_rate > 0 and 1 <= batch_size <= n_samples.
  void validate(std::size_t n_samples) const;
};

class Adam {
 public:
  Adam(std::size_t n, double learning_rate, AdamSettings settings = {});
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_;
  AdamSettings s_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// One layer-k training problem: the forward batch S_{k-1} and the states
/// entering V_k. In sampled mode `outcomes[j]` fixes the ancilla result for input j.
struct LayerBatch {
  StateEnsemble target;
  std::vector<Ket> inputs;
  std::vector<std::uint64_t> outcomes;
};

struct CostGradient {
  double cost = 0.0;
  std::vector<double> grad;
};

/// Denoised ensemble for a layer batch: one member per input in sampled mode,
/// one member per (input, outcome) weighted by p_j(z) / M in enumerated mode.
StateEnsemble layer_output(std::span<const double> theta, const LayerBatch& batch, int n_a, int layers,
                           BranchMode mode);

double ensemble_cost(const StateEnsemble& target, const StateEnsemble& generated, CostKind kind);

/// Cost D(target, V-denoised inputs) and its gradient in theta. The sampled
/// outcomes and, for Wasserstein, the optimal plan are held fixed.
CostGradient cost_and_gradient(std::span<const double> theta, const LayerBatch& batch, int n_a, int layers,
                               const TrainConfig& cfg);

/// Samples one ancilla outcome per input at the current theta.
std::vector<std::uint64_t> sample_outcomes(std::span<const double> theta, const std::vector<Ket>& inputs, int n_a,
                                           int layers, const Rng& rng);

struct CycleReport {
  int step;
  std::vector<double> losses;
  /// D(S_{k-1}, S~_{k-1}) over the full forward ensemble after training.
  double final_distance;
  double seconds;
};

struct TrainReport {
  /// In training order, k = K first.
  std::vector<CycleReport> cycles;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  AdamSettings adam;
};

struct TrainResult {
  DenoiserStack stack;
  TrainReport report;
};

/// Trains theta_K, ..., theta_1 in turn. forward[k] is S_k for k = 0..K-1 (a
/// trailing S_K is accepted and ignored). Inputs to every cycle are fresh
/// Haar-product states sent through the already trained layers.
TrainResult train_layerwise(const std::vector<StateEnsemble>& forward, DenoiserStack stack, const TrainConfig& cfg);

}  // namespace chaodiff
