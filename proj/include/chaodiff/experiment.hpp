#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chaodiff/chaos.hpp"
#include "chaodiff/data.hpp"
#include "chaodiff/forward.hpp"
#include "chaodiff/noise.hpp"
#include "chaodiff/train.hpp"

namespace chaodiff {

struct DatasetConfig {
  /// "circular", "multicluster" or "compressible".
  std::string kind = "circular";
  int n_m = 2;
  std::size_t n_samples = 200;
  /// Size of the held-out target ensemble; 0 means n_samples.
  std::size_t heldout = 0;
  double sigma = 0.05;
  int n_total = 4;
  int n_latent = 2;
  int reference_depth = 2;
  std::uint64_t reference_seed = 0;
};

struct SweepConfig {
  /// "p1" (RUCD gate noise) or "p2" (dephasing per step).
  std::string parameter = "p2";
  std::vector<double> values{0.0};
  /// "pipeline" trains and reports D_Wass(generated, held-out); "forward"
  /// reports D_Wass(S_step, S_0).
  std::string stage = "pipeline";
  /// 0 means the last step.
  int step = 0;
};

struct QaeConfig {
  int depth = 20;
  int epochs = 2000;
  double learning_rate = 0.001;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  DiffusionConfig diffusion;
  /// Complement sizes for `forward`; the first entry is used elsewhere.
  std::vector<int> n_f_values{2};
  IsingParameters hamiltonian;
  int n_a = 1;
  int layers = 4;
  TrainConfig train;
  std::vector<int> moments{1, 2};
  std::size_t generate_samples = 0;
  SweepConfig sweep;
  QaeConfig qae;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string output_dir = ".";

  /// Checks every module precondition; throws std::invalid_argument naming the key.
  void validate() const;
  /// Data-qubit count seen by the diffusion model.
  int model_qubits() const;
  DiffusionConfig diffusion_for(int n_m, int n_f, const std::optional<NoiseConfig>& noise) const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::string& path);

/// Named stream of the master seed for one stage and trial.
Rng stage_rng(std::uint64_t seed, const std::string& stage, int trial);

StateEnsemble make_dataset(const DatasetConfig& d, std::size_t n, const Rng& rng);

struct ForwardRow {
  std::string scheme;
  int k;
  int n_f;
  int m;
  std::string metric;
  double value;
  int trial;
};

struct LossRow {
  int cycle;
  int epoch;
  double loss;
};

struct SweepRow {
  std::string scheme;
  std::string parameter;
  double value;
  int trial;
  double d_wass;
};

struct QaeRow {
  std::string scheme;
  std::string mode;
  int trial;
  int k;
  double d_wass;
};

struct EvalRow {
  std::string metric;
  int m;
  double value;
};

extern const char* const kForwardHeader;
extern const char* const kLossHeader;
extern const char* const kSweepHeader;
extern const char* const kQaeHeader;
extern const char* const kEvalHeader;

void write_csv(std::ostream& out, const std::vector<ForwardRow>& rows);
void write_csv(std::ostream& out, const std::vector<LossRow>& rows);
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_csv(std::ostream& out, const std::vector<QaeRow>& rows);
void write_csv(std::ostream& out, const std::vector<EvalRow>& rows);

struct PipelineResult {
  std::vector<StateEnsemble> forward;
  TrainResult trained;
  Generation generation;
  /// D_Wass between the (post-processed) generated ensemble and the held-out set.
  double d_wass = 0.0;
};

/// Forward diffusion, layerwise training and generation for one trial.
/// `post` maps generated ensembles before comparison (e.g. decoding).
PipelineResult run_pipeline(const ExperimentConfig& cfg, const StateEnsemble& s0, const StateEnsemble& heldout,
                            int trial, const std::optional<NoiseConfig>& noise,
                            const std::function<StateEnsemble(const StateEnsemble&)>& post = {});

/// Runs fn(0..n-1) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

std::vector<ForwardRow> run_forward(const ExperimentConfig& cfg, int threads = 1);
std::vector<SweepRow> run_noise_sweep(const ExperimentConfig& cfg, int threads = 1);
std::vector<QaeRow> run_qae_comparison(const ExperimentConfig& cfg, int threads = 1,
                                       std::vector<QaeModel>* models = nullptr);
std::vector<EvalRow> evaluate(const StateEnsemble& a, const StateEnsemble& b, const std::vector<int>& moments);

struct TrainRun {
  Bundle bundle;
  std::vector<LossRow> losses;
};

TrainRun run_train(const ExperimentConfig& cfg);
/// Generates from the stack in `trained`; keeps its held-out target when present.
Bundle run_sample(const Bundle& trained, std::size_t n_samples, std::uint64_t seed);

}  // namespace chaodiff
