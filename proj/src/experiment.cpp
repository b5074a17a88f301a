#include "chaodiff/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "chaodiff/metrics.hpp"
#include "chaodiff/qae.hpp"

namespace chaodiff {

using nlohmann::json;

const char* const kForwardHeader = "scheme,k,n_f,m,metric_name,value,trial";
const char* const kLossHeader = "cycle,epoch,loss";
const char* const kSweepHeader = "scheme,noise_param,value,trial,D_wass";
const char* const kQaeHeader = "scheme,mode,trial,k,D_wass";
const char* const kEvalHeader = "metric,m,value";

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("config: unknown key '" + key + "' in '" + where + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: '" + where + "." + key + "' has the wrong type");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("config: " + message);
}

}  // namespace

Rng stage_rng(std::uint64_t seed, const std::string& stage, int trial) {
  return Rng(seed).split(stage).split(static_cast<std::uint64_t>(trial));
}

int ExperimentConfig::model_qubits() const {
  return dataset.kind == "compressible" ? dataset.n_total : dataset.n_m;
}

DiffusionConfig ExperimentConfig::diffusion_for(int n_m, int n_f, const std::optional<NoiseConfig>& noise) const {
  DiffusionConfig d = diffusion;
  d.n_m = n_m;
  d.n_f = d.scheme == Scheme::RUCD ? 0 : n_f;
  if (noise) d.noise = noise;
  return d;
}

void ExperimentConfig::validate() const {
  require(dataset.kind == "circular" || dataset.kind == "multicluster" || dataset.kind == "compressible",
          "dataset.kind must be circular, multicluster or compressible");
  require(dataset.n_m >= 1 && dataset.n_m <= 10, "dataset.n_m must lie in [1, 10]");
  require(dataset.n_samples >= 1, "dataset.n_samples must be >= 1");
  require(dataset.sigma >= 0.0, "dataset.sigma must be nonnegative");
  if (dataset.kind == "compressible") {
    require(dataset.n_latent >= 1 && dataset.n_latent < dataset.n_total,
            "dataset.n_latent must satisfy 1 <= n_latent < n_total");
    require(dataset.n_total <= 10, "dataset.n_total must be <= 10");
    require(dataset.reference_depth >= 0, "dataset.reference_depth must be >= 0");
  }
  require(!n_f_values.empty(), "diffusion.n_f must list at least one value");
  require(trials >= 1, "trials must be >= 1");
  require(n_a >= 0, "denoiser.n_a must be >= 0");
  require(layers >= 0, "denoiser.layers must be >= 0");
  require(model_qubits() + n_a <= 12, "data plus ancilla qubits must be <= 12");
  for (int m : moments) require(m >= 1, "metrics.moments entries must be >= 1");
  for (int nf : n_f_values) {
    const DiffusionConfig d = diffusion_for(model_qubits(), nf, std::nullopt);
    try {
      d.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config: diffusion: ") + e.what());
    }
    if (d.scheme != Scheme::RUCD) {
      require(model_qubits() + nf <= ChaoticHamiltonian::kDefaultMaxSites,
              "n_m + n_f exceeds the dense diagonalization cap of 13 sites");
    }
  }
  if (diffusion.noise) diffusion.noise->validate();
  try {
    train.validate(dataset.n_samples);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  require(sweep.parameter == "p1" || sweep.parameter == "p2", "sweep.parameter must be p1 or p2");
  require(sweep.stage == "pipeline" || sweep.stage == "forward", "sweep.stage must be pipeline or forward");
  require(!sweep.values.empty(), "sweep.values must not be empty");
  for (double v : sweep.values) require(v >= 0.0 && v <= 0.5, "sweep.values must lie in [0, 0.5]");
  require(sweep.step >= 0 && sweep.step <= diffusion.steps, "sweep.step must lie in [0, diffusion.steps]");
  require(qae.depth >= 0, "qae.depth must be >= 0");
  require(qae.epochs >= 0, "qae.epochs must be >= 0");
  require(qae.learning_rate > 0.0, "qae.learning_rate must be positive");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  check_keys(j, {"seed", "trials", "output_dir", "dataset", "diffusion", "hamiltonian", "denoiser", "train", "noise",
                 "metrics", "sample", "sweep", "qae"},
             "root");
  read(j, "seed", c.seed, "root");
  read(j, "trials", c.trials, "root");
  read(j, "output_dir", c.output_dir, "root");

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    check_keys(d, {"kind", "n_m", "n_samples", "heldout", "sigma", "n_total", "n_latent", "reference_depth",
                   "reference_seed"},
               "dataset");
    read(d, "kind", c.dataset.kind, "dataset");
    read(d, "n_m", c.dataset.n_m, "dataset");
    read(d, "n_samples", c.dataset.n_samples, "dataset");
    read(d, "heldout", c.dataset.heldout, "dataset");
    read(d, "sigma", c.dataset.sigma, "dataset");
    read(d, "n_total", c.dataset.n_total, "dataset");
    read(d, "n_latent", c.dataset.n_latent, "dataset");
    read(d, "reference_depth", c.dataset.reference_depth, "dataset");
    read(d, "reference_seed", c.dataset.reference_seed, "dataset");
  }
  if (j.contains("diffusion")) {
    const auto& d = j.at("diffusion");
    check_keys(d, {"scheme", "n_f", "steps", "dt", "complement_dist", "rucd_alpha_factor"}, "diffusion");
    std::string scheme = to_string(c.diffusion.scheme);
    read(d, "scheme", scheme, "diffusion");
    try {
      c.diffusion.scheme = parse_scheme(scheme);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config: diffusion.scheme: ") + e.what());
    }
    if (d.contains("n_f")) {
      if (d.at("n_f").is_array()) {
        read(d, "n_f", c.n_f_values, "diffusion");
      } else {
        int nf = 0;
        read(d, "n_f", nf, "diffusion");
        c.n_f_values = {nf};
      }
    }
    read(d, "steps", c.diffusion.steps, "diffusion");
    read(d, "dt", c.diffusion.dt, "diffusion");
    read(d, "complement_dist", c.diffusion.complement_dist, "diffusion");
    read(d, "rucd_alpha_factor", c.diffusion.rucd_alpha_factor, "diffusion");
  }
  if (c.diffusion.scheme == Scheme::RUCD) c.n_f_values = {0};
  if (j.contains("hamiltonian")) {
    const auto& h = j.at("hamiltonian");
    check_keys(h, {"hx", "hy", "J"}, "hamiltonian");
    read(h, "hx", c.hamiltonian.hx, "hamiltonian");
    read(h, "hy", c.hamiltonian.hy, "hamiltonian");
    read(h, "J", c.hamiltonian.coupling, "hamiltonian");
  }
  if (j.contains("denoiser")) {
    const auto& d = j.at("denoiser");
    check_keys(d, {"n_a", "layers"}, "denoiser");
    read(d, "n_a", c.n_a, "denoiser");
    read(d, "layers", c.layers, "denoiser");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"epochs", "batch_size", "learning_rate", "cost", "gradient_mode", "branch_mode"}, "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "learning_rate", c.train.learning_rate, "train");
    std::string cost = to_string(c.train.cost);
    std::string grad = to_string(c.train.gradient_mode);
    std::string branch = to_string(c.train.branch_mode);
    read(t, "cost", cost, "train");
    read(t, "gradient_mode", grad, "train");
    read(t, "branch_mode", branch, "train");
    try {
      c.train.cost = parse_cost(cost);
      c.train.gradient_mode = parse_gradient_mode(grad);
      c.train.branch_mode = parse_branch_mode(branch);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config: train: ") + e.what());
    }
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    check_keys(n, {"p1", "p2", "gamma_phi"}, "noise");
    NoiseConfig nc;
    read(n, "p1", nc.p1, "noise");
    read(n, "p2", nc.p2, "noise");
    if (n.contains("gamma_phi")) {
      require(!n.contains("p2"), "noise: give either p2 or gamma_phi, not both");
      double gamma = 0.0;
      read(n, "gamma_phi", gamma, "noise");
      require(gamma >= 0.0, "noise.gamma_phi must be nonnegative");
      nc.p2 = dephasing_prob(c.diffusion.dt, gamma);
    }
    c.diffusion.noise = nc;
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    check_keys(m, {"moments"}, "metrics");
    read(m, "moments", c.moments, "metrics");
  }
  if (j.contains("sample")) {
    const auto& s = j.at("sample");
    check_keys(s, {"n_samples"}, "sample");
    read(s, "n_samples", c.generate_samples, "sample");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, {"parameter", "values", "stage", "step"}, "sweep");
    read(s, "parameter", c.sweep.parameter, "sweep");
    read(s, "values", c.sweep.values, "sweep");
    read(s, "stage", c.sweep.stage, "sweep");
    read(s, "step", c.sweep.step, "sweep");
  }
  if (j.contains("qae")) {
    const auto& q = j.at("qae");
    check_keys(q, {"depth", "epochs", "learning_rate"}, "qae");
    read(q, "depth", c.qae.depth, "qae");
    read(q, "epochs", c.qae.epochs, "qae");
    read(q, "learning_rate", c.qae.learning_rate, "qae");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j = {
      {"seed", seed},
      {"trials", trials},
      {"output_dir", output_dir},
      {"dataset",
       {{"kind", dataset.kind},
        {"n_m", dataset.n_m},
        {"n_samples", dataset.n_samples},
        {"heldout", dataset.heldout},
        {"sigma", dataset.sigma},
        {"n_total", dataset.n_total},
        {"n_latent", dataset.n_latent},
        {"reference_depth", dataset.reference_depth},
        {"reference_seed", dataset.reference_seed}}},
      {"diffusion",
       {{"scheme", to_string(diffusion.scheme)},
        {"n_f", n_f_values},
        {"steps", diffusion.steps},
        {"dt", diffusion.dt},
        {"complement_dist", diffusion.complement_dist},
        {"rucd_alpha_factor", diffusion.rucd_alpha_factor}}},
      {"hamiltonian", {{"hx", hamiltonian.hx}, {"hy", hamiltonian.hy}, {"J", hamiltonian.coupling}}},
      {"denoiser", {{"n_a", n_a}, {"layers", layers}}},
      {"train",
       {{"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"learning_rate", train.learning_rate},
        {"cost", to_string(train.cost)},
        {"gradient_mode", to_string(train.gradient_mode)},
        {"branch_mode", to_string(train.branch_mode)}}},
      {"metrics", {{"moments", moments}}},
      {"sample", {{"n_samples", generate_samples}}},
      {"sweep", {{"parameter", sweep.parameter}, {"values", sweep.values}, {"stage", sweep.stage}, {"step", sweep.step}}},
      {"qae", {{"depth", qae.depth}, {"epochs", qae.epochs}, {"learning_rate", qae.learning_rate}}},
  };
  if (diffusion.noise) j["noise"] = {{"p1", diffusion.noise->p1}, {"p2", diffusion.noise->p2}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

StateEnsemble make_dataset(const DatasetConfig& d, std::size_t n, const Rng& rng) {
  if (d.kind == "circular") return sample_circular({d.n_m}, n, rng);
  if (d.kind == "multicluster") {
    ClusterSpec spec;
    spec.n_m = d.n_m;
    spec.sigma = d.sigma;
    return sample_multicluster(spec, n, rng);
  }
  if (d.kind == "compressible") {
    CompressibleSpec spec{d.n_total, d.n_latent, d.reference_depth, d.sigma, d.reference_seed};
    return sample_compressible(spec, n, rng).states;
  }
  throw std::invalid_argument("unknown dataset kind '" + d.kind + "'");
}

// CSV ------------------------------------------------------------------------

namespace {

std::ostream& number(std::ostream& out) { return out << std::setprecision(12); }

}  // namespace

void write_csv(std::ostream& out, const std::vector<ForwardRow>& rows) {
  out << kForwardHeader << '\n' << number;
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.k << ',' << r.n_f << ',' << r.m << ',' << r.metric << ',' << r.value << ',' << r.trial
        << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<LossRow>& rows) {
  out << kLossHeader << '\n' << number;
  for (const auto& r : rows) out << r.cycle << ',' << r.epoch << ',' << r.loss << '\n';
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n' << number;
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.parameter << ',' << r.value << ',' << r.trial << ',' << r.d_wass << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<QaeRow>& rows) {
  out << kQaeHeader << '\n' << number;
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.mode << ',' << r.trial << ',' << r.k << ',' << r.d_wass << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << kEvalHeader << '\n' << number;
  for (const auto& r : rows) out << r.metric << ',' << r.m << ',' << r.value << '\n';
}

// Runs -----------------------------------------------------------------------

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const int count = std::min(threads, n);
  workers.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::shared_ptr<const ChaoticHamiltonian> hamiltonian_for(const ExperimentConfig& cfg, const DiffusionConfig& d) {
  if (d.scheme == Scheme::RUCD) return nullptr;
  return build_hamiltonian(d.n_m + d.n_f, cfg.hamiltonian.hx, cfg.hamiltonian.hy, cfg.hamiltonian.coupling);
}

std::size_t heldout_size(const ExperimentConfig& cfg) {
  return cfg.dataset.heldout == 0 ? cfg.dataset.n_samples : cfg.dataset.heldout;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg, const StateEnsemble& s0, const StateEnsemble& heldout,
                            int trial, const std::optional<NoiseConfig>& noise,
                            const std::function<StateEnsemble(const StateEnsemble&)>& post) {
  const int n_m = s0.n_qubits();
  const DiffusionConfig d = cfg.diffusion_for(n_m, cfg.n_f_values.front(), noise);
  const auto h = hamiltonian_for(cfg, d);
  PipelineResult r{diffuse_ensembles(s0, d, h.get(), stage_rng(cfg.seed, "forward", trial)), {}, {}, 0.0};

  Rng init = stage_rng(cfg.seed, "init", trial);
  DenoiserStack stack = DenoiserStack::random(d.steps, n_m, cfg.n_a, cfg.layers, init);
  TrainConfig tc = cfg.train;
  tc.seed = stage_rng(cfg.seed, "train", trial).seed();
  r.trained = train_layerwise(r.forward, std::move(stack), tc);
  r.generation = generate(r.trained.stack, heldout.size(), stage_rng(cfg.seed, "generate", trial));
  const StateEnsemble out = post ? post(r.generation.output()) : r.generation.output();
  r.d_wass = wasserstein1(out, heldout).distance;
  return r;
}

std::vector<ForwardRow> run_forward(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const int n_nf = static_cast<int>(cfg.n_f_values.size());
  std::vector<std::vector<ForwardRow>> cells(static_cast<std::size_t>(cfg.trials * n_nf));
  parallel_for(cfg.trials * n_nf, threads, [&](int cell) {
    const int trial = cell / n_nf;
    const int nf = cfg.n_f_values[static_cast<std::size_t>(cell % n_nf)];
    const StateEnsemble s0 = make_dataset(cfg.dataset, cfg.dataset.n_samples, stage_rng(cfg.seed, "dataset", trial));
    const DiffusionConfig d = cfg.diffusion_for(s0.n_qubits(), nf, std::nullopt);
    const auto h = hamiltonian_for(cfg, d);
    const auto traj =
        diffuse_ensembles(s0, d, h.get(), stage_rng(cfg.seed, "forward", trial).split(static_cast<std::uint64_t>(nf)));
    const std::string scheme = to_string(d.scheme);
    auto& rows = cells[static_cast<std::size_t>(cell)];
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto kk = static_cast<int>(k);
      for (int m : cfg.moments) {
        rows.push_back({scheme, kk, d.n_f, m, "delta_haar", moment_distance_haar(traj[k], m), trial});
        rows.push_back({scheme, kk, d.n_f, m, "delta_target", moment_distance(traj[k], m, s0), trial});
      }
      rows.push_back({scheme, kk, d.n_f, 0, "wasserstein", wasserstein1(traj[k], s0).distance, trial});
      rows.push_back({scheme, kk, d.n_f, 0, "mmd", mmd(traj[k], s0), trial});
    }
  });
  std::vector<ForwardRow> out;
  for (auto& c : cells) out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::vector<SweepRow> run_noise_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const bool gate_noise = cfg.sweep.parameter == "p1";
  if (gate_noise != (cfg.diffusion.scheme == Scheme::RUCD)) {
    throw std::invalid_argument("config: sweep.parameter p1 applies to RUCD and p2 to CTED/RTED");
  }
  const int n_values = static_cast<int>(cfg.sweep.values.size());
  std::vector<SweepRow> rows(static_cast<std::size_t>(n_values * cfg.trials));
  parallel_for(n_values * cfg.trials, threads, [&](int cell) {
    const int vi = cell / cfg.trials;
    const int trial = cell % cfg.trials;
    const double value = cfg.sweep.values[static_cast<std::size_t>(vi)];
    NoiseConfig noise = cfg.diffusion.noise.value_or(NoiseConfig{});
    (gate_noise ? noise.p1 : noise.p2) = value;
    const StateEnsemble s0 = make_dataset(cfg.dataset, cfg.dataset.n_samples, stage_rng(cfg.seed, "dataset", trial));
    double d_wass = 0.0;
    if (cfg.sweep.stage == "forward") {
      const DiffusionConfig d = cfg.diffusion_for(s0.n_qubits(), cfg.n_f_values.front(), noise);
      const auto h = hamiltonian_for(cfg, d);
      const auto traj = diffuse_ensembles(s0, d, h.get(), stage_rng(cfg.seed, "forward", trial));
      const int step = cfg.sweep.step == 0 ? d.steps : cfg.sweep.step;
      d_wass = wasserstein1(traj[static_cast<std::size_t>(step)], s0).distance;
    } else {
      const StateEnsemble heldout =
          make_dataset(cfg.dataset, heldout_size(cfg), stage_rng(cfg.seed, "heldout", trial));
      d_wass = run_pipeline(cfg, s0, heldout, trial, noise).d_wass;
    }
    rows[static_cast<std::size_t>(cell)] = {to_string(cfg.diffusion.scheme), cfg.sweep.parameter, value, trial, d_wass};
  });
  return rows;
}

std::vector<QaeRow> run_qae_comparison(const ExperimentConfig& cfg, int threads, std::vector<QaeModel>* models) {
  cfg.validate();
  if (cfg.dataset.kind != "compressible") throw std::invalid_argument("config: qae needs dataset.kind = compressible");
  const CompressibleSpec spec{cfg.dataset.n_total, cfg.dataset.n_latent, cfg.dataset.reference_depth,
                              cfg.dataset.sigma, cfg.dataset.reference_seed};
  std::vector<std::vector<QaeRow>> cells(static_cast<std::size_t>(cfg.trials));
  std::vector<QaeModel> trained(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, threads, [&](int trial) {
    const auto data = sample_compressible(spec, cfg.dataset.n_samples, stage_rng(cfg.seed, "dataset", trial));
    const auto heldout = sample_compressible(spec, heldout_size(cfg), stage_rng(cfg.seed, "heldout", trial)).states;
    Rng qinit = stage_rng(cfg.seed, "qae", trial);
    const QaeModel model = train_qae(QaeModel::random(spec.n_total, spec.n_latent, cfg.qae.depth, qinit), data.states,
                                     cfg.qae.epochs, cfg.qae.learning_rate)
                               .model;
    trained[static_cast<std::size_t>(trial)] = model;
    const std::string scheme = to_string(cfg.diffusion.scheme);
    const auto decoder = [&model](const StateEnsemble& e) { return decode_ensemble(model, e); };
    auto& rows = cells[static_cast<std::size_t>(trial)];
    const PipelineResult full = run_pipeline(cfg, data.states, heldout, trial, cfg.diffusion.noise);
    const PipelineResult latent =
        run_pipeline(cfg, encode_ensemble(model, data.states), heldout, trial, cfg.diffusion.noise, decoder);
    for (int k = static_cast<int>(full.generation.ensembles.size()) - 1; k >= 0; --k) {
      const auto& e = full.generation.ensembles[static_cast<std::size_t>(k)];
      rows.push_back({scheme, "full", trial, k, wasserstein1(e, heldout).distance});
    }
    for (int k = static_cast<int>(latent.generation.ensembles.size()) - 1; k >= 0; --k) {
      const auto& e = latent.generation.ensembles[static_cast<std::size_t>(k)];
      rows.push_back({scheme, "latent", trial, k, wasserstein1(decoder(e), heldout).distance});
    }
  });
  if (models != nullptr) *models = trained;
  std::vector<QaeRow> out;
  for (auto& c : cells) out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::vector<EvalRow> evaluate(const StateEnsemble& a, const StateEnsemble& b, const std::vector<int>& moments) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("evaluate: ensembles differ in qubit count");
  std::vector<EvalRow> rows{{"wasserstein", 0, wasserstein1(a, b).distance}, {"mmd", 0, mmd(a, b)}};
  for (int m : moments) {
    rows.push_back({"delta_target", m, moment_distance(a, m, b)});
    rows.push_back({"delta_haar", m, moment_distance_haar(a, m)});
  }
  return rows;
}

TrainRun run_train(const ExperimentConfig& cfg) {
  cfg.validate();
  const StateEnsemble s0 = make_dataset(cfg.dataset, cfg.dataset.n_samples, stage_rng(cfg.seed, "dataset", 0));
  const StateEnsemble heldout = make_dataset(cfg.dataset, heldout_size(cfg), stage_rng(cfg.seed, "heldout", 0));
  const PipelineResult r = run_pipeline(cfg, s0, heldout, 0, cfg.diffusion.noise);

  TrainRun run;
  run.bundle.ensembles.emplace("target", s0);
  run.bundle.ensembles.emplace("heldout", heldout);
  run.bundle.ensembles.emplace("generated", r.generation.output());
  run.bundle.denoiser = r.trained.stack;
  run.bundle.config = cfg.to_json();
  run.bundle.config["train_report"] = {
      {"seconds", r.trained.report.seconds},
      {"adam", {{"beta1", r.trained.report.adam.beta1},
                {"beta2", r.trained.report.adam.beta2},
                {"epsilon", r.trained.report.adam.epsilon}}},
      {"final_distance", json::array()},
      {"d_wass_heldout", r.d_wass}};
  for (const auto& c : r.trained.report.cycles) {
    run.bundle.config["train_report"]["final_distance"].push_back({{"step", c.step}, {"value", c.final_distance}});
    for (std::size_t e = 0; e < c.losses.size(); ++e) run.losses.push_back({c.step, static_cast<int>(e), c.losses[e]});
  }
  run.bundle.seeds = {{"master", cfg.seed}, {"train", r.trained.report.seed}};
  return run;
}

Bundle run_sample(const Bundle& trained, std::size_t n_samples, std::uint64_t seed) {
  if (!trained.denoiser) throw std::invalid_argument("sample: bundle has no trained denoiser");
  if (n_samples == 0) throw std::invalid_argument("sample: n_samples must be >= 1");
  const Generation g = generate(*trained.denoiser, n_samples, Rng(seed).split("generate"));
  Bundle out;
  out.denoiser = trained.denoiser;
  out.config = trained.config;
  out.seeds = {{"sample", seed}};
  for (std::size_t k = 0; k < g.ensembles.size(); ++k) out.ensembles.emplace("step_" + std::to_string(k), g.ensembles[k]);
  out.ensembles.emplace("generated", g.output());
  if (auto it = trained.ensembles.find("heldout"); it != trained.ensembles.end()) out.ensembles.emplace("heldout", it->second);
  return out;
}

}  // namespace chaodiff
