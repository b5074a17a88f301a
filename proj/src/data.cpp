#include "chaodiff/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chaodiff {

using nlohmann::json;

void ClusterSpec::validate() const {
  if (n_m < 1) throw std::invalid_argument("multicluster: n_m must be >= 1");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("multicluster: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("multicluster: weights must sum to 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("multicluster: sigma must be nonnegative");
}

Ket cluster_center(int n_m, int cluster) {
  switch (cluster) {
    case 0:
      return Ket::zero(n_m);
    case 1:
      return Ket::basis(n_m, (std::uint64_t{1} << n_m) - 1);
    case 2:
      return Ket::ghz(n_m);
    default:
      throw std::out_of_range("cluster index must be 0, 1 or 2");
  }
}

Ket perturb_state(const Ket& state, double sigma, Rng& rng) {
  if (sigma == 0.0) return state;
  Circuit c(state.n_qubits());
  for (int q = 0; q < state.n_qubits(); ++q) {
    c.rotation(GateKind::RX, q, sigma * rng.normal());
    c.rotation(GateKind::RY, q, sigma * rng.normal());
    c.rotation(GateKind::RZ, q, sigma * rng.normal());
  }
  return c.apply(state);
}

StateEnsemble sample_multicluster(const ClusterSpec& spec, std::size_t n_samples, const Rng& rng,
                                  std::vector<int>* labels) {
  spec.validate();
  if (n_samples == 0) throw std::invalid_argument("multicluster: need at least one sample");
  const std::array<Ket, 3> centers{cluster_center(spec.n_m, 0), cluster_center(spec.n_m, 1),
                                   cluster_center(spec.n_m, 2)};
  std::vector<Ket> states;
  states.reserve(n_samples);
  if (labels != nullptr) labels->clear();
  for (std::size_t j = 0; j < n_samples; ++j) {
    Rng stream = rng.split(j);
    const auto c = static_cast<int>(stream.categorical(spec.weights));
    states.push_back(perturb_state(centers[static_cast<std::size_t>(c)], spec.sigma, stream));
    if (labels != nullptr) labels->push_back(c);
  }
  return StateEnsemble::uniform(std::move(states));
}

void CircularSpec::validate() const {
  if (n_m < 1) throw std::invalid_argument("circular: n_m must be >= 1");
  if (!(beta_hi > beta_lo)) throw std::invalid_argument("circular: beta range is empty");
}

Ket circular_state(int n_m, double beta) {
  Amplitudes a = Amplitudes::Zero(Eigen::Index{1} << n_m);
  a[0] += std::cos(beta / 2.0);
  a[a.size() - 1] += std::sin(beta / 2.0);
  return Ket::normalized(n_m, std::move(a));
}

StateEnsemble sample_circular(const CircularSpec& spec, std::size_t n_samples, const Rng& rng) {
  spec.validate();
  if (n_samples == 0) throw std::invalid_argument("circular: need at least one sample");
  std::vector<Ket> states;
  states.reserve(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) {
    Rng stream = rng.split(j);
    states.push_back(circular_state(spec.n_m, stream.uniform(spec.beta_lo, spec.beta_hi)));
  }
  return StateEnsemble::uniform(std::move(states));
}

void CompressibleSpec::validate() const {
  if (n_latent < 1 || n_latent >= n_total) throw std::invalid_argument("compressible: need 1 <= n_latent < n_total");
  if (depth < 0) throw std::invalid_argument("compressible: depth must be >= 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("compressible: sigma must be nonnegative");
}

QaeModel compressible_reference(const CompressibleSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.reference_seed).split("reference");
  return QaeModel::random(spec.n_total, spec.n_latent, spec.depth, rng);
}

CompressibleDataset sample_compressible(const CompressibleSpec& spec, std::size_t n_samples, const Rng& rng) {
  const QaeModel reference = compressible_reference(spec);
  ClusterSpec latent_spec;
  latent_spec.n_m = spec.n_latent;
  latent_spec.sigma = spec.sigma;
  StateEnsemble latents = sample_multicluster(latent_spec, n_samples, rng);
  StateEnsemble states = decode_ensemble(reference, latents);
  return {std::move(states), std::move(latents), reference};
}

// Serialization -------------------------------------------------------------

json ensemble_to_json(const StateEnsemble& e) {
  json states = json::array();
  json weights = json::array();
  for (const auto& m : e.members()) {
    json amps = json::array();
    for (Eigen::Index i = 0; i < m.state.dim(); ++i) amps.push_back({m.state[i].real(), m.state[i].imag()});
    states.push_back(std::move(amps));
    weights.push_back(m.weight);
  }
  return {{"n_qubits", e.n_qubits()}, {"weights", weights}, {"states", states}};
}

StateEnsemble ensemble_from_json(const json& j) {
  const int n = j.at("n_qubits").get<int>();
  if (n < 1 || n > 30) throw std::runtime_error("bundle: invalid n_qubits");
  const auto& states = j.at("states");
  const auto& weights = j.at("weights");
  if (!states.is_array() || states.empty()) throw std::runtime_error("bundle: ensemble has no states");
  if (weights.size() != states.size()) throw std::runtime_error("bundle: weights and states differ in length");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<WeightedKet> members;
  members.reserve(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& amps = states[s];
    if (amps.size() != dim) throw std::runtime_error("bundle: state " + std::to_string(s) + " has wrong length");
    Amplitudes a(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      const auto& pair = amps[i];
      if (!pair.is_array() || pair.size() != 2) throw std::runtime_error("bundle: amplitudes must be [re, im] pairs");
      a[static_cast<Eigen::Index>(i)] = Complex(pair[0].get<double>(), pair[1].get<double>());
    }
    const double norm2 = a.squaredNorm();
    if (!(std::abs(norm2 - 1.0) <= kLoadNormTolerance)) {
      throw std::runtime_error("bundle: state " + std::to_string(s) + " violates unit norm (|psi|^2 = " +
                               std::to_string(norm2) + ")");
    }
    Ket k = std::abs(norm2 - 1.0) <= kNormTolerance ? Ket(n, std::move(a)) : Ket::normalized(n, std::move(a));
    members.push_back({weights[s].get<double>(), std::move(k)});
  }
  return StateEnsemble(std::move(members));
}

json stack_to_json(const DenoiserStack& s) {
  s.validate();
  return {{"steps", s.steps}, {"n_m", s.n_m}, {"n_a", s.n_a}, {"layers", s.layers}, {"thetas", s.thetas}};
}

DenoiserStack stack_from_json(const json& j) {
  DenoiserStack s{j.at("steps").get<int>(), j.at("n_m").get<int>(), j.at("n_a").get<int>(), j.at("layers").get<int>(),
                  j.at("thetas").get<std::vector<std::vector<double>>>()};
  s.validate();
  return s;
}

json qae_to_json(const QaeModel& m) {
  m.validate();
  return {{"n_total", m.n_total}, {"n_latent", m.n_latent}, {"depth", m.depth}, {"params", m.params}};
}

QaeModel qae_from_json(const json& j) {
  QaeModel m{j.at("n_total").get<int>(), j.at("n_latent").get<int>(), j.at("depth").get<int>(),
             j.at("params").get<std::vector<double>>()};
  m.validate();
  return m;
}

json bundle_to_json(const Bundle& b) {
  json ensembles = json::object();
  for (const auto& [name, e] : b.ensembles) ensembles[name] = ensemble_to_json(e);
  json j = {{"schema", "chaodiff.bundle"},
            {"version", std::to_string(kBundleMajorVersion) + "." + std::to_string(kBundleMinorVersion)},
            {"ensembles", ensembles},
            {"config", b.config},
            {"seeds", b.seeds}};
  if (b.denoiser) j["denoiser"] = stack_to_json(*b.denoiser);
  if (b.qae) j["qae"] = qae_to_json(*b.qae);
  return j;
}

Bundle bundle_from_json(const json& j) {
  if (j.value("schema", "") != "chaodiff.bundle") throw std::runtime_error("bundle: missing or unknown schema");
  const std::string version = j.at("version").get<std::string>();
  const int major = std::stoi(version.substr(0, version.find('.')));
  if (major != kBundleMajorVersion) throw std::runtime_error("bundle: unsupported major version " + version);
  Bundle b;
  for (const auto& [name, e] : j.at("ensembles").items()) b.ensembles.emplace(name, ensemble_from_json(e));
  if (j.contains("denoiser")) b.denoiser = stack_from_json(j.at("denoiser"));
  if (j.contains("qae")) b.qae = qae_from_json(j.at("qae"));
  b.config = j.value("config", json::object());
  b.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
  return b;
}

void save_bundle(const std::string& path, const Bundle& b) {
  const json j = bundle_to_json(b);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("bundle: cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("bundle: write failed for " + path);
}

Bundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("bundle: cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("bundle: corrupt file " + path + ": " + e.what());
  }
  return bundle_from_json(j);
}

}  // namespace chaodiff
