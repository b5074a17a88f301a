// Command-line runner for diffusion experiments.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "chaodiff/data.hpp"
#include "chaodiff/experiment.hpp"

namespace fs = std::filesystem;
using namespace chaodiff;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_config) {
  auto* c = cmd->add_option("--config", o.config, "Experiment config (JSON)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--out", o.out, "Output directory (overrides output_dir)");
  cmd->add_option("--trials", o.trials, "Override the trial count")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads for independent trials")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  return cfg;
}

template <typename Rows>
fs::path write_rows(const std::string& dir, const std::string& name, const Rows& rows) {
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, rows);
  return path;
}

const StateEnsemble& pick(const Bundle& b, const std::string& name, const std::string& path) {
  if (!name.empty()) {
    auto it = b.ensembles.find(name);
    if (it == b.ensembles.end()) throw std::runtime_error(path + " has no ensemble named '" + name + "'");
    return it->second;
  }
  if (auto it = b.ensembles.find("generated"); it != b.ensembles.end()) return it->second;
  if (b.ensembles.empty()) throw std::runtime_error(path + " has no ensembles");
  return b.ensembles.begin()->second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chaotic quantum diffusion experiments"};
  app.require_subcommand(1);

  CommonOptions forward_opts, train_opts, sweep_opts, qae_opts, sample_opts, eval_opts;
  auto* forward = app.add_subcommand("forward", "Forward diffusion metrics per step");
  add_common(forward, forward_opts, true);
  auto* train = app.add_subcommand("train", "Layerwise denoiser training");
  add_common(train, train_opts, true);
  auto* sweep = app.add_subcommand("noise-sweep", "Noise-level sweep");
  add_common(sweep, sweep_opts, true);
  auto* qae = app.add_subcommand("qae", "Autoencoder training and latent versus full comparison");
  add_common(qae, qae_opts, true);

  auto* sample = app.add_subcommand("sample", "Generate an ensemble from a trained bundle");
  add_common(sample, sample_opts, false);
  std::string sample_bundle;
  std::size_t sample_n = 0;
  sample->add_option("--bundle", sample_bundle, "Trained bundle")->required()->check(CLI::ExistingFile);
  sample->add_option("--samples", sample_n, "Number of samples (default: config sample.n_samples or 200)");

  auto* eval = app.add_subcommand("evaluate", "Distances between two bundle ensembles");
  add_common(eval, eval_opts, false);
  std::string bundle_a, bundle_b, name_a, name_b;
  eval->add_option("bundle_a", bundle_a, "Candidate bundle")->required()->check(CLI::ExistingFile);
  eval->add_option("bundle_b", bundle_b, "Reference bundle")->required()->check(CLI::ExistingFile);
  eval->add_option("--ensemble-a", name_a, "Ensemble name in the candidate (default: generated)");
  eval->add_option("--ensemble-b", name_b, "Ensemble name in the reference (default: generated)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*forward) {
      const auto cfg = resolve(forward_opts);
      std::cout << write_rows(cfg.output_dir, "forward.csv", run_forward(cfg, forward_opts.threads)).string() << '\n';
    } else if (*train) {
      const auto cfg = resolve(train_opts);
      const TrainRun run = run_train(cfg);
      const fs::path bundle = fs::path(cfg.output_dir) / "trained.json";
      save_bundle(bundle.string(), run.bundle);
      std::cout << bundle.string() << '\n' << write_rows(cfg.output_dir, "loss.csv", run.losses).string() << '\n';
    } else if (*sweep) {
      const auto cfg = resolve(sweep_opts);
      std::cout << write_rows(cfg.output_dir, "noise_sweep.csv", run_noise_sweep(cfg, sweep_opts.threads)).string()
                << '\n';
    } else if (*qae) {
      const auto cfg = resolve(qae_opts);
      std::vector<QaeModel> models;
      const auto rows = run_qae_comparison(cfg, qae_opts.threads, &models);
      Bundle b;
      b.qae = models.front();
      b.config = cfg.to_json();
      b.seeds = {{"master", cfg.seed}};
      const fs::path bundle = fs::path(cfg.output_dir) / "qae.json";
      save_bundle(bundle.string(), b);
      std::cout << bundle.string() << '\n' << write_rows(cfg.output_dir, "qae_comparison.csv", rows).string() << '\n';
    } else if (*sample) {
      const auto cfg = resolve(sample_opts);
      std::size_t n = sample_n != 0 ? sample_n : (cfg.generate_samples != 0 ? cfg.generate_samples : 200);
      const Bundle out = run_sample(load_bundle(sample_bundle), n, cfg.seed);
      const fs::path path = fs::path(cfg.output_dir) / "samples.json";
      save_bundle(path.string(), out);
      std::cout << path.string() << '\n';
    } else if (*eval) {
      const auto cfg = resolve(eval_opts);
      const Bundle a = load_bundle(bundle_a);
      const Bundle b = load_bundle(bundle_b);
      const auto rows = evaluate(pick(a, name_a, bundle_a), pick(b, name_b, bundle_b), cfg.moments);
      std::cout << write_rows(cfg.output_dir, "evaluate.csv", rows).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
