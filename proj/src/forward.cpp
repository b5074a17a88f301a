#include "chaodiff/forward.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chaodiff {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::CTED:
      return "CTED";
    case Scheme::RTED:
      return "RTED";
    case Scheme::RUCD:
      return "RUCD";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "CTED" || name == "cted") return Scheme::CTED;
  if (name == "RTED" || name == "rted") return Scheme::RTED;
  if (name == "RUCD" || name == "rucd") return Scheme::RUCD;
  throw std::invalid_argument("unknown diffusion scheme '" + name + "' (expected CTED, RTED or RUCD)");
}

void DiffusionConfig::validate() const {
  if (n_m < 1) throw std::invalid_argument("diffusion: n_m must be >= 1");
  if (steps < 1) throw std::invalid_argument("diffusion: steps must be >= 1");
  if (scheme == Scheme::RUCD) {
    if (n_f != 0) throw std::invalid_argument("diffusion: RUCD uses no complement qubits (n_f must be 0)");
  } else {
    if (n_f < 1) throw std::invalid_argument("diffusion: CTED/RTED need n_f >= 1");
    if (n_m + n_f > 20) throw std::invalid_argument("diffusion: n_m + n_f too large");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("diffusion: dt must be nonnegative");
    if (!complement_dist.empty()) {
      if (complement_dist.size() != (std::size_t{1} << n_f)) {
        throw std::invalid_argument("diffusion: complement distribution must have 2^n_f entries");
      }
      double total = 0.0;
      for (double q : complement_dist) {
        if (!(q >= 0.0)) throw std::invalid_argument("diffusion: complement distribution has a negative entry");
        total += q;
      }
      if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("diffusion: complement distribution must sum to 1");
    }
  }
  if (noise) noise->validate();
  if (!(rucd_alpha_factor >= 0.0)) throw std::invalid_argument("diffusion: rucd_alpha_factor must be nonnegative");
}

std::vector<double> DiffusionConfig::complement_probabilities() const {
  if (!complement_dist.empty()) return complement_dist;
  const std::size_t n = std::size_t{1} << n_f;
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

StateEnsemble DiffusionStep::enhanced_ensemble() const {
  if (records.empty()) return ensemble;
  double total = 0.0;
  for (const auto& r : records) total += r.complement_prob * r.born_prob;
  std::vector<WeightedKet> members;
  members.reserve(records.size());
  for (const auto& r : records) members.push_back({r.complement_prob * r.born_prob / total, r.state});
  return StateEnsemble(std::move(members));
}

namespace {

void check_inputs(const StateEnsemble& s0, const DiffusionConfig& cfg, const ChaoticHamiltonian& h, Scheme expected) {
  cfg.validate();
  if (cfg.scheme != expected) throw std::invalid_argument("diffusion: config scheme is " + to_string(cfg.scheme));
  if (s0.n_qubits() != cfg.n_m) throw std::invalid_argument("diffusion: input ensemble width differs from n_m");
  if (h.n_sites() != cfg.n_m + cfg.n_f) throw std::invalid_argument("diffusion: Hamiltonian size differs from n_m + n_f");
}

std::vector<int> complement_qubits(const DiffusionConfig& cfg) {
  std::vector<int> f(static_cast<std::size_t>(cfg.n_f));
  std::iota(f.begin(), f.end(), cfg.n_m);
  return f;
}

// Attaches a sampled complement, evolves, dephases and measures F.
DiffusionStepRecord chaotic_step(const Ket& data, int k, double t, double flip_prob, const DiffusionConfig& cfg,
                                 const ChaoticHamiltonian& h, const std::vector<double>& q, Rng stream) {
  Rng noise_stream = stream.split("noise");
  const auto x = static_cast<std::uint64_t>(stream.categorical(q));
  const Ket joint = tensor(data, Ket::basis(cfg.n_f, x));
  Amplitudes psi = t > 0.0 ? h.propagate(joint.amplitudes(), t) : joint.amplitudes();
  apply_dephasing_inplace(psi, joint.n_qubits(), flip_prob, noise_stream);
  const auto f = complement_qubits(cfg);
  auto rec = measure_subset(Ket::normalized(joint.n_qubits(), std::move(psi)), f, stream);
  return {k, Bitstring{x, cfg.n_f}, rec.outcome, q[x], rec.probability, std::move(rec.post_state)};
}

DiffusionStep collect(std::vector<DiffusionStepRecord> records) {
  std::vector<Ket> states;
  states.reserve(records.size());
  for (const auto& r : records) states.push_back(r.state);
  return {StateEnsemble::uniform(std::move(states)), std::move(records)};
}

Rng step_stream(const Rng& rng, std::size_t sample, int step) {
  return rng.split(sample).split(static_cast<std::uint64_t>(step));
}

}  // namespace

DiffusionTrajectory cted_diffuse(const StateEnsemble& s0, const DiffusionConfig& cfg, const ChaoticHamiltonian& h,
                                 const Rng& rng) {
  check_inputs(s0, cfg, h, Scheme::CTED);
  const auto q = cfg.complement_probabilities();
  const double p2 = cfg.noise ? cfg.noise->p2 : 0.0;
  DiffusionTrajectory out;
  out.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  out.push_back({s0, {}});
  for (int k = 1; k <= cfg.steps; ++k) {
    const double flip = composed_dephasing_prob(k, p2);
    std::vector<DiffusionStepRecord> records;
    records.reserve(s0.size());
    for (std::size_t j = 0; j < s0.size(); ++j) {
      records.push_back(chaotic_step(s0.state(j), k, k * cfg.dt, flip, cfg, h, q, step_stream(rng, j, k)));
    }
    out.push_back(collect(std::move(records)));
  }
  return out;
}

DiffusionStep rted_step(const StateEnsemble& previous, int k, const DiffusionConfig& cfg, const ChaoticHamiltonian& h,
                        const Rng& rng) {
  check_inputs(previous, cfg, h, Scheme::RTED);
  const auto q = cfg.complement_probabilities();
  const double p2 = cfg.noise ? cfg.noise->p2 : 0.0;
  std::vector<DiffusionStepRecord> records;
  records.reserve(previous.size());
  for (std::size_t j = 0; j < previous.size(); ++j) {
    records.push_back(chaotic_step(previous.state(j), k, cfg.dt, p2, cfg, h, q, step_stream(rng, j, k)));
  }
  return collect(std::move(records));
}

DiffusionTrajectory rted_diffuse(const StateEnsemble& s0, const DiffusionConfig& cfg, const ChaoticHamiltonian& h,
                                 const Rng& rng) {
  check_inputs(s0, cfg, h, Scheme::RTED);
  DiffusionTrajectory out;
  out.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  out.push_back({s0, {}});
  for (int k = 1; k <= cfg.steps; ++k) out.push_back(rted_step(out.back().ensemble, k, cfg, h, rng));
  return out;
}

double rucd_alpha(int layer, double factor) { return factor * static_cast<double>(layer) * layer / 100.0; }

RucdLayerParams sample_rucd_layer(int n_qubits, int layer, Rng& rng, double alpha_factor) {
  RucdLayerParams p;
  p.layer = layer;
  p.alpha = rucd_alpha(layer, alpha_factor);
  const double g_max = p.alpha * M_PI / 8.0;
  p.g.resize(static_cast<std::size_t>(3 * n_qubits));
  for (auto& g : p.g) g = rng.uniform(-g_max, g_max);
  p.s = rng.uniform(0.4 * p.alpha, 0.6 * p.alpha);
  return p;
}

Circuit rucd_layer_circuit(int n_qubits, const RucdLayerParams& params) {
  if (params.g.size() != static_cast<std::size_t>(3 * n_qubits)) throw std::invalid_argument("rucd: need 3 angles per qubit");
  Circuit c(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    const auto base = static_cast<std::size_t>(3 * q);
    c.rotation(GateKind::RZ, q, params.g[base], true);
    c.rotation(GateKind::RY, q, params.g[base + 1], true);
    c.rotation(GateKind::RZ, q, params.g[base + 2], true);
  }
  // exp(-i s/(2 sqrt n) ZZ) is a ZZ rotation by s/sqrt(n).
  const double zz = params.s / std::sqrt(static_cast<double>(n_qubits));
  for (int a = 0; a < n_qubits; ++a) {
    for (int b = a + 1; b < n_qubits; ++b) c.rzz(a, b, zz);
  }
  return c;
}

std::vector<StateEnsemble> rucd_diffuse(const StateEnsemble& s0, const DiffusionConfig& cfg, const Rng& rng) {
  cfg.validate();
  if (cfg.scheme != Scheme::RUCD) throw std::invalid_argument("rucd_diffuse: config scheme is " + to_string(cfg.scheme));
  if (s0.n_qubits() != cfg.n_m) throw std::invalid_argument("rucd_diffuse: input ensemble width differs from n_m");
  const double p1 = cfg.noise ? cfg.noise->p1 : 0.0;
  const int n = cfg.n_m;
  std::vector<Amplitudes> current;
  current.reserve(s0.size());
  for (const auto& m : s0.members()) current.push_back(m.state.amplitudes());
  std::vector<StateEnsemble> out;
  out.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  out.push_back(s0);
  for (int l = 1; l <= cfg.steps; ++l) {
    std::vector<Ket> states;
    states.reserve(current.size());
    for (std::size_t j = 0; j < current.size(); ++j) {
      Rng stream = step_stream(rng, j, l);
      Rng noise_stream = stream.split("noise");
      const auto params = sample_rucd_layer(n, l, stream, cfg.rucd_alpha_factor);
      run_with_pauli_noise(rucd_layer_circuit(n, params), current[j], p1, noise_stream);
      states.push_back(Ket::normalized(n, current[j]));
    }
    out.push_back(StateEnsemble::uniform(std::move(states)));
  }
  return out;
}

std::vector<StateEnsemble> diffuse_ensembles(const StateEnsemble& s0, const DiffusionConfig& cfg,
                                             const ChaoticHamiltonian* h, const Rng& rng) {
  if (cfg.scheme == Scheme::RUCD) return rucd_diffuse(s0, cfg, rng);
  if (h == nullptr) throw std::invalid_argument("diffuse_ensembles: chaotic schemes need a Hamiltonian");
  const auto traj = cfg.scheme == Scheme::CTED ? cted_diffuse(s0, cfg, *h, rng) : rted_diffuse(s0, cfg, *h, rng);
  std::vector<StateEnsemble> out;
  out.reserve(traj.size());
  for (const auto& step : traj) out.push_back(step.ensemble);
  return out;
}

ExecutionCost execution_time(const CostModel& cm, Scheme scheme) {
  if (cm.n_samples < 1 || cm.steps < 1) throw std::invalid_argument("execution_time: N and K must be positive");
  const double triangular = static_cast<double>(cm.n_samples) * static_cast<double>(cm.steps) *
                            static_cast<double>(cm.steps + 1) / 2.0;
  switch (scheme) {
    case Scheme::RUCD:
      return {cm.n_samples * cm.steps, cm.tau_u * triangular};
    case Scheme::CTED:
      return {cm.steps, cm.tau_c * triangular};
    case Scheme::RTED:
      return {1, cm.tau_r * triangular};
  }
  throw std::logic_error("execution_time: unknown scheme");
}

}  // namespace chaodiff
