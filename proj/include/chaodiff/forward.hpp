#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chaodiff/chaos.hpp"
#include "chaodiff/circuit.hpp"
#include "chaodiff/noise.hpp"
#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"

namespace chaodiff {

enum class Scheme { CTED, RTED, RUCD };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

/// Forward diffusion settings. Data qubits M come first (high-order bits),
/// complement qubits F follow.
struct DiffusionConfig {
  Scheme scheme = Scheme::CTED;
  int n_m = 1;
  int n_f = 1;
  int steps = 1;
  double dt = 0.02;
  /// Distribution q over the 2^n_f complement basis states; empty means uniform.
  std::vector<double> complement_dist;
  std::optional<NoiseConfig> noise;
  /// Multiplies the RUCD angle scale alpha(l) = l^2 / 100.
  double rucd_alpha_factor = 1.0;

  void validate() const;
  std::vector<double> complement_probabilities() const;
};

struct DiffusionStepRecord {
  int step;
  Bitstring complement_init;
  Bitstring outcome;
  /// q(x), the probability of the sampled complement initialization.
  double complement_prob;
  /// Born probability of the outcome given that initialization.
  double born_prob;
  Ket state;
};

/// One diffusion step: the ensemble S_k and the per-sample trajectory records.
struct DiffusionStep {
  StateEnsemble ensemble;
  std::vector<DiffusionStepRecord> records;

  /// Same states weighted by q(x) p_x(z), renormalized.
  StateEnsemble enhanced_ensemble() const;
};

/// Index k holds S_k; index 0 is the input ensemble with no records.
using DiffusionTrajectory = std::vector<DiffusionStep>;

/// Each step restarts from the original sample and evolves for k dt.
DiffusionTrajectory cted_diffuse(const StateEnsemble& s0, const DiffusionConfig& cfg, const ChaoticHamiltonian& h,
                                 const Rng& rng);

/// Each step continues from the previous post-measurement state with a fresh
/// complement and evolves for dt.
DiffusionTrajectory rted_diffuse(const StateEnsemble& s0, const DiffusionConfig& cfg, const ChaoticHamiltonian& h,
                                 const Rng& rng);

/// A single RTED step from S_{k-1} to S_k using the step-k streams of `rng`.
DiffusionStep rted_step(const StateEnsemble& previous, int k, const DiffusionConfig& cfg, const ChaoticHamiltonian& h,
                        const Rng& rng);

/// Random angles for one scrambling layer.
struct RucdLayerParams {
  int layer;
  double alpha;
  /// ZYZ angles, 3 per qubit, in application order (Z, Y, Z).
  std::vector<double> g;
  double s;
};

double rucd_alpha(int layer, double factor = 1.0);
RucdLayerParams sample_rucd_layer(int n_qubits, int layer, Rng& rng, double alpha_factor = 1.0);
/// Per-qubit exp(-i g3 Z/2) exp(-i g2 Y/2) exp(-i g1 Z/2), then ZZ rotations
/// exp(-i s/(2 sqrt(n)) Z Z) on every pair. Single-qubit rotations are flagged noisy.
Circuit rucd_layer_circuit(int n_qubits, const RucdLayerParams& params);

/// Index k holds S_k after layers 1..k; angles are fresh per sample and layer.
std::vector<StateEnsemble> rucd_diffuse(const StateEnsemble& s0, const DiffusionConfig& cfg, const Rng& rng);

/// Dispatches on cfg.scheme; the Hamiltonian is ignored for RUCD.
std::vector<StateEnsemble> diffuse_ensembles(const StateEnsemble& s0, const DiffusionConfig& cfg,
                                             const ChaoticHamiltonian* h, const Rng& rng);

/// Per-unitary execution times and problem size for the cost model.
struct CostModel {
  double tau_u = 1.0;
  double tau_c = 1.0;
  double tau_r = 1.0;
  long n_samples = 1;
  long steps = 1;
};

struct ExecutionCost {
  long unitary_count;
  double total_time;
};

ExecutionCost execution_time(const CostModel& cm, Scheme scheme);

}  // namespace chaodiff
