#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chaodiff/denoiser.hpp"
#include "chaodiff/qae.hpp"
#include "chaodiff/qstate.hpp"
#include "chaodiff/rng.hpp"

namespace chaodiff {

/// Three clusters around |0..0>, |1..1> and GHZ, perturbed per qubit by
/// RX, RY and RZ rotations with independent N(0, sigma^2) angles.
struct ClusterSpec {
  int n_m = 2;
  std::array<double, 3> weights{0.4, 0.4, 0.2};
  double sigma = 0.05;

  void validate() const;
};

Ket cluster_center(int n_m, int cluster);
Ket perturb_state(const Ket& state, double sigma, Rng& rng);

/// `labels`, when given, receives the cluster index of every sample.
StateEnsemble sample_multicluster(const ClusterSpec& spec, std::size_t n_samples, const Rng& rng,
                                  std::vector<int>* labels = nullptr);

/// cos(beta/2)|0..0> + sin(beta/2)|1..1> with beta uniform on [beta_lo, beta_hi).
struct CircularSpec {
  int n_m = 2;
  double beta_lo = 0.0;
  double beta_hi = 2.0 * M_PI;

  void validate() const;
};

Ket circular_state(int n_m, double beta);
StateEnsemble sample_circular(const CircularSpec& spec, std::size_t n_samples, const Rng& rng);

/// Multi-cluster latent states padded with |0..0> trash qubits and scrambled
/// by the inverse encoder of a fixed random reference autoencoder.
struct CompressibleSpec {
  int n_total = 4;
  int n_latent = 2;
  int depth = 2;
  double sigma = 0.05;
  std::uint64_t reference_seed = 0;

  void validate() const;
};

struct CompressibleDataset {
  StateEnsemble states;
  StateEnsemble latents;
  QaeModel reference;
};

QaeModel compressible_reference(const CompressibleSpec& spec);
CompressibleDataset sample_compressible(const CompressibleSpec& spec, std::size_t n_samples, const Rng& rng);

// Serialization -------------------------------------------------------------

inline constexpr int kBundleMajorVersion = 1;
inline constexpr int kBundleMinorVersion = 0;
inline constexpr double kLoadNormTolerance = 1e-8;

struct Bundle {
  std::map<std::string, StateEnsemble> ensembles;
  std::optional<DenoiserStack> denoiser;
  std::optional<QaeModel> qae;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::uint64_t> seeds;
};

nlohmann::json ensemble_to_json(const StateEnsemble& e);
/// Rejects states whose squared norm is off by more than 1e-8.
StateEnsemble ensemble_from_json(const nlohmann::json& j);
nlohmann::json stack_to_json(const DenoiserStack& s);
DenoiserStack stack_from_json(const nlohmann::json& j);
nlohmann::json qae_to_json(const QaeModel& m);
QaeModel qae_from_json(const nlohmann::json& j);

nlohmann::json bundle_to_json(const Bundle& b);
Bundle bundle_from_json(const nlohmann::json& j);

void save_bundle(const std::string& path, const Bundle& b);
Bundle load_bundle(const std::string& path);

}  // namespace chaodiff
