#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "chaodiff/experiment.hpp"
#include "chaodiff/metrics.hpp"

using namespace chaodiff;
using nlohmann::json;

namespace {

template <typename Rows>
std::string csv(const Rows& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

ExperimentConfig small_forward(Scheme scheme, int steps, double dt) {
  ExperimentConfig c;
  c.dataset.kind = "multicluster";
  c.dataset.n_m = 2;
  c.dataset.n_samples = 30;
  c.diffusion.scheme = scheme;
  c.diffusion.steps = steps;
  c.diffusion.dt = dt;
  c.n_f_values = {scheme == Scheme::RUCD ? 0 : 2};
  c.train.batch_size = 10;
  c.seed = 4;
  return c;
}

ExperimentConfig small_pipeline() {
  ExperimentConfig c = small_forward(Scheme::CTED, 2, 0.1);
  c.n_f_values = {1};
  c.layers = 1;
  c.train.epochs = 3;
  c.train.batch_size = 10;
  c.dataset.heldout = 15;
  return c;
}

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST(Csv, GoldenHeaders) {
  EXPECT_EQ(first_line(csv(std::vector<ForwardRow>{})), "scheme,k,n_f,m,metric_name,value,trial");
  EXPECT_EQ(first_line(csv(std::vector<LossRow>{})), "cycle,epoch,loss");
  EXPECT_EQ(first_line(csv(std::vector<SweepRow>{})), "scheme,noise_param,value,trial,D_wass");
  EXPECT_EQ(first_line(csv(std::vector<QaeRow>{})), "scheme,mode,trial,k,D_wass");
  EXPECT_EQ(first_line(csv(std::vector<EvalRow>{})), "metric,m,value");
}

TEST(Csv, RowFormat) {
  const std::vector<QaeRow> rows{{"CTED", "latent", 2, 5, 0.25}};
  EXPECT_EQ(csv(rows), "scheme,mode,trial,k,D_wass\nCTED,latent,2,5,0.25\n");
}

TEST(Config, PublishedDefaultsAccepted) {
  const auto c = load_config(std::string(CHAODIFF_CONFIG_DIR) + "/published_defaults.json");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.diffusion.steps, 50);
  EXPECT_EQ(c.train.epochs, 1000);
  EXPECT_EQ(c.dataset.n_samples, 1000u);
  EXPECT_EQ(c.train.batch_size, 100u);
}

TEST(Config, ShippedConfigsValidate) {
  for (const auto& entry : std::filesystem::directory_iterator(CHAODIFF_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path().string()).validate()) << entry.path();
  }
}

TEST(Config, RejectsPreconditionViolations) {
  auto expect_reject = [](const json& j) {
    EXPECT_THROW(ExperimentConfig::from_json(j).validate(), std::invalid_argument) << j.dump();
  };
  expect_reject({{"colour", 1}});
  expect_reject({{"dataset", {{"kind", "qm9"}}}});
  expect_reject({{"dataset", {{"n_m", 0}}}});
  expect_reject({{"diffusion", {{"scheme", "ddpm"}}}});
  expect_reject({{"diffusion", {{"scheme", "CTED"}, {"n_f", 0}}}});
  expect_reject({{"diffusion", {{"dt", -0.1}}}});
  expect_reject({{"diffusion", {{"steps", 0}}}});
  expect_reject({{"diffusion", {{"n_f", 1}, {"complement_dist", {0.2, 0.2}}}}});
  expect_reject({{"dataset", {{"n_m", 10}}}, {"diffusion", {{"n_f", 4}}}});
  expect_reject({{"train", {{"batch_size", 500}}}, {"dataset", {{"n_samples", 100}}}});
  expect_reject({{"train", {{"epochs", 0}}}});
  expect_reject({{"train", {{"learning_rate", -1.0}}}});
  expect_reject({{"train", {{"cost", "kl"}}}});
  expect_reject({{"train", {{"epochs", "many"}}}});
  expect_reject({{"noise", {{"p2", 0.7}}}});
  expect_reject({{"noise", {{"p2", 0.1}, {"gamma_phi", 1.0}}}});
  expect_reject({{"metrics", {{"moments", {0}}}}});
  expect_reject({{"sweep", {{"parameter", "p3"}}}});
  expect_reject({{"trials", 0}});
  expect_reject({{"dataset", {{"kind", "compressible"}, {"n_total", 3}, {"n_latent", 3}}}});
  EXPECT_NO_THROW(ExperimentConfig::from_json(json::object()).validate());
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = small_pipeline();
  c.diffusion.noise = NoiseConfig{0.0, 0.03};
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Forward, ZeroTimeHasZeroTargetDistance) {
  const auto rows = run_forward(small_forward(Scheme::CTED, 5, 0.0));
  int checked = 0;
  for (const auto& r : rows) {
    if (r.metric != "delta_target") continue;
    // The Gram form takes a square root of a difference, so rounding at 1e-16 becomes 1e-8.
    EXPECT_LT(r.value, 1e-7);
    ++checked;
  }
  EXPECT_EQ(checked, 6 * 2);
}

TEST(Forward, RowsAreCompleteAndDeterministic) {
  auto cfg = small_forward(Scheme::RTED, 3, 0.1);
  cfg.trials = 2;
  cfg.n_f_values = {1, 2};
  const auto a = run_forward(cfg, 1);
  EXPECT_EQ(a.size(), 2u * 2u * 4u * 6u);
  EXPECT_EQ(csv(a), csv(run_forward(cfg, 1)));
  EXPECT_EQ(csv(a), csv(run_forward(cfg, 3)));
}

TEST(Forward, CtedAndRtedCoincideAtOneStep) {
  std::vector<double> cted, rted;
  for (int trial = 0; trial < 10; ++trial) {
    for (Scheme s : {Scheme::CTED, Scheme::RTED}) {
      auto cfg = small_forward(s, 1, 0.3);
      cfg.seed = static_cast<std::uint64_t>(100 + trial);
      for (const auto& r : run_forward(cfg))
        if (r.k == 1 && r.m == 1 && r.metric == "delta_haar") (s == Scheme::CTED ? cted : rted).push_back(r.value);
    }
  }
  ASSERT_EQ(cted.size(), 10u);
  // KS critical value at alpha = 0.01 for two samples of 10.
  EXPECT_LT(ks_statistic(cted, rted), 1.628 * std::sqrt(2.0 / 10));
}

TEST(Forward, StagesUseIndependentStreams) {
  // Changing the trial count must not perturb trial 0.
  auto cfg = small_forward(Scheme::CTED, 2, 0.1);
  const auto one = run_forward(cfg);
  cfg.trials = 3;
  const auto three = run_forward(cfg);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].value, three[i].value);
}

TEST(NoiseSweep, ZeroNoiseReproducesNoiselessRun) {
  auto cfg = small_pipeline();
  cfg.sweep.values = {0.0};
  const auto rows = run_noise_sweep(cfg);
  ASSERT_EQ(rows.size(), 1u);
  const auto s0 = make_dataset(cfg.dataset, cfg.dataset.n_samples, stage_rng(cfg.seed, "dataset", 0));
  const auto heldout = make_dataset(cfg.dataset, 15, stage_rng(cfg.seed, "heldout", 0));
  EXPECT_EQ(rows[0].d_wass, run_pipeline(cfg, s0, heldout, 0, std::nullopt).d_wass);
}

TEST(NoiseSweep, ParameterMustMatchScheme) {
  auto cfg = small_pipeline();
  cfg.sweep.parameter = "p1";
  EXPECT_THROW(run_noise_sweep(cfg), std::invalid_argument);
  auto rucd = small_forward(Scheme::RUCD, 3, 0.0);
  rucd.sweep = {"p1", {0.0, 0.1}, "forward", 0};
  const auto rows = run_noise_sweep(rucd);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].parameter, "p1");
  EXPECT_GT(rows[1].d_wass, 0.0);
}

TEST(Train, SmokeRunPersistsLoadableBundle) {
  auto cfg = load_config(std::string(CHAODIFF_CONFIG_DIR) + "/smoke.json");
  const auto run = run_train(cfg);
  EXPECT_EQ(run.losses.size(), 5u);
  const auto path = std::filesystem::temp_directory_path() / "chaodiff_smoke_bundle.json";
  save_bundle(path.string(), run.bundle);
  const Bundle b = load_bundle(path.string());
  ASSERT_TRUE(b.denoiser.has_value());
  EXPECT_EQ(b.denoiser->thetas, run.bundle.denoiser->thetas);
  EXPECT_TRUE(b.ensembles.count("generated"));
  const auto rows = evaluate(b.ensembles.at("generated"), b.ensembles.at("generated"), {1, 2});
  EXPECT_EQ(rows[0].metric, "wasserstein");
  EXPECT_LT(rows[0].value, 1e-12);
  EXPECT_LT(rows[1].value, 1e-12);
  const auto sampled = run_sample(b, 7, 3);
  EXPECT_EQ(sampled.ensembles.at("generated").size(), 7u);
  EXPECT_THROW(evaluate(b.ensembles.at("generated"), StateEnsemble::uniform({Ket::zero(2)}), {1}),
               std::invalid_argument);
}

TEST(Qae, ComparisonRowsCoverBothModes) {
  ExperimentConfig c;
  c.dataset.kind = "compressible";
  c.dataset.n_samples = 12;
  c.dataset.heldout = 10;
  c.diffusion.steps = 2;
  c.diffusion.dt = 0.1;
  c.n_f_values = {1};
  c.layers = 1;
  c.train.epochs = 2;
  c.train.batch_size = 6;
  c.qae = {2, 5, 0.05};
  const auto rows = run_qae_comparison(c);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].mode, "full");
  EXPECT_EQ(rows[0].k, 2);
  EXPECT_EQ(rows[3].mode, "latent");
  EXPECT_EQ(rows[5].k, 0);
  std::ostringstream out;
  write_csv(out, rows);
  EXPECT_EQ(first_line(out.str()), kQaeHeader);
}
