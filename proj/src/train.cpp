#include "chaodiff/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chaodiff/metrics.hpp"
#include "chaodiff/transport.hpp"

namespace chaodiff {

std::string to_string(CostKind c) { return c == CostKind::Wasserstein ? "wasserstein" : "mmd"; }
std::string to_string(GradientMode g) { return g == GradientMode::Adjoint ? "adjoint" : "finite_difference"; }
std::string to_string(BranchMode b) { return b == BranchMode::Sampled ? "sampled" : "enumerated"; }

CostKind parse_cost(const std::string& name) {
  if (name == "wasserstein" || name == "Wasserstein") return CostKind::Wasserstein;
  if (name == "mmd" || name == "MMD") return CostKind::MMD;
  throw std::invalid_argument("unknown cost '" + name + "' (expected wasserstein or mmd)");
}

GradientMode parse_gradient_mode(const std::string& name) {
  if (name == "adjoint") return GradientMode::Adjoint;
  if (name == "finite_difference") return GradientMode::FiniteDifference;
  throw std::invalid_argument("unknown gradient mode '" + name + "' (expected adjoint or finite_difference)");
}

BranchMode parse_branch_mode(const std::string& name) {
  if (name == "sampled") return BranchMode::Sampled;
  if (name == "enumerated") return BranchMode::Enumerated;
  throw std::invalid_argument("unknown branch mode '" + name + "' (expected sampled or enumerated)");
}

void TrainConfig::validate(std::size_t n_samples) const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (batch_size > n_samples) {
    throw std::invalid_argument("train: batch_size " + std::to_string(batch_size) + " exceeds ensemble size " +
                                std::to_string(n_samples));
  }
  if (!(fd_step > 0.0)) throw std::invalid_argument("train: fd_step must be positive");
}

Adam::Adam(std::size_t n, double learning_rate, AdamSettings settings)
    : lr_(learning_rate), s_(settings), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = s_.beta1 * m_[i] + (1.0 - s_.beta1) * grad[i];
    v_[i] = s_.beta2 * v_[i] + (1.0 - s_.beta2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + s_.epsilon);
  }
}

namespace {

struct Member {
  std::size_t input;
  std::uint64_t outcome;
  Amplitudes chi;
  double prob;
  double weight;
};

struct LayerForward {
  std::vector<Amplitudes> full;
  std::vector<Member> members;
};

LayerForward run_layer(const Circuit& ansatz, std::span<const double> theta, const LayerBatch& batch, int n_a,
                       BranchMode mode) {
  const std::size_t m = batch.inputs.size();
  if (m == 0) throw std::invalid_argument("layer batch has no inputs");
  if (mode == BranchMode::Sampled && batch.outcomes.size() != m) {
    throw std::invalid_argument("sampled branch mode needs one ancilla outcome per input");
  }
  const int n_m = batch.inputs.front().n_qubits();
  const double w_in = 1.0 / static_cast<double>(m);
  LayerForward f;
  f.full.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    f.full.push_back(ansatz_output(ansatz, batch.inputs[j], theta, n_a));
    if (mode == BranchMode::Sampled) {
      double p = 0.0;
      Amplitudes chi = project_ancilla(f.full.back(), n_m, n_a, batch.outcomes[j], &p);
      if (p < kBranchCutoff) throw std::runtime_error("sampled ancilla outcome has vanishing probability");
      f.members.push_back({j, batch.outcomes[j], std::move(chi), p, w_in});
    } else {
      const std::uint64_t n_out = std::uint64_t{1} << n_a;
      for (std::uint64_t z = 0; z < n_out; ++z) {
        double p = 0.0;
        Amplitudes chi = project_ancilla(f.full.back(), n_m, n_a, z, &p);
        if (p < kBranchCutoff) continue;
        f.members.push_back({j, z, std::move(chi), p, w_in * p});
      }
    }
  }
  return f;
}

StateEnsemble members_to_ensemble(const std::vector<Member>& members, int n_m) {
  std::vector<WeightedKet> out;
  out.reserve(members.size());
  double total = 0.0;
  for (const auto& mb : members) total += mb.weight;
  for (const auto& mb : members) out.push_back({mb.weight / total, Ket::normalized(n_m, mb.chi)});
  return StateEnsemble(std::move(out));
}

void lift_adjoint(Amplitudes& full_adjoint, const Amplitudes& g, int n_a, std::uint64_t outcome) {
  for (Eigen::Index i = 0; i < g.size(); ++i) full_adjoint[(i << n_a) | static_cast<Eigen::Index>(outcome)] += g[i];
}

}  // namespace

StateEnsemble layer_output(std::span<const double> theta, const LayerBatch& batch, int n_a, int layers,
                           BranchMode mode) {
  const int n_m = batch.inputs.at(0).n_qubits();
  const Circuit ansatz = build_ansatz_circuit(n_m + n_a, layers);
  return members_to_ensemble(run_layer(ansatz, theta, batch, n_a, mode).members, n_m);
}

double ensemble_cost(const StateEnsemble& target, const StateEnsemble& generated, CostKind kind) {
  return kind == CostKind::Wasserstein ? wasserstein1(target, generated).distance : mmd(target, generated);
}

CostGradient cost_and_gradient(std::span<const double> theta, const LayerBatch& batch, int n_a, int layers,
                               const TrainConfig& cfg) {
  const int n_m = batch.inputs.at(0).n_qubits();
  if (batch.target.n_qubits() != n_m) throw std::invalid_argument("cost_and_gradient: target width differs from inputs");
  const Circuit ansatz = build_ansatz_circuit(n_m + n_a, layers);
  if (theta.size() != static_cast<std::size_t>(ansatz.n_params())) {
    throw std::invalid_argument("cost_and_gradient: wrong parameter length");
  }
  CostGradient out;
  out.grad.assign(theta.size(), 0.0);

  if (cfg.gradient_mode == GradientMode::FiniteDifference) {
    auto eval = [&](std::span<const double> t) {
      return ensemble_cost(batch.target, layer_output(t, batch, n_a, layers, cfg.branch_mode), cfg.cost);
    };
    out.cost = eval(theta);
    std::vector<double> shifted(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      shifted[i] = theta[i] + cfg.fd_step;
      const double up = eval(shifted);
      shifted[i] = theta[i] - cfg.fd_step;
      const double down = eval(shifted);
      shifted[i] = theta[i];
      out.grad[i] = (up - down) / (2.0 * cfg.fd_step);
    }
    return out;
  }

  const LayerForward fwd = run_layer(ansatz, theta, batch, n_a, cfg.branch_mode);
  const std::size_t ny = fwd.members.size();
  const Eigen::Index d = Eigen::Index{1} << n_m;
  Matrix y(d, static_cast<Eigen::Index>(ny));
  Eigen::VectorXd b(static_cast<Eigen::Index>(ny));
  double total = 0.0;
  for (const auto& mb : fwd.members) total += mb.weight;
  for (std::size_t j = 0; j < ny; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    y.col(jj) = fwd.members[j].chi / std::sqrt(fwd.members[j].prob);
    b[jj] = fwd.members[j].weight / total;
  }
  const Matrix x = batch.target.state_matrix();
  const Eigen::VectorXd a = batch.target.weights();
  const Matrix overlap = x.adjoint() * y;  // <x_i|y_j>
  const Eigen::MatrixXd fid = overlap.cwiseAbs2();

  // G_j = dD/d<y_j|, and db_j = dD/db_j.
  Matrix g(d, static_cast<Eigen::Index>(ny));
  Eigen::VectorXd db(static_cast<Eigen::Index>(ny));
  if (cfg.cost == CostKind::Wasserstein) {
    const TransportPlan plan = optimal_transport((1.0 - fid.array()).matrix(), a, b);
    out.cost = std::max(0.0, plan.objective);
    g = -(x * plan.coupling.cast<Complex>().cwiseProduct(overlap));
    db = plan.col_potential;
  } else {
    const Matrix oyy = y.adjoint() * y;
    const Eigen::MatrixXd fyy = oyy.cwiseAbs2();
    const Eigen::MatrixXd fxx = (x.adjoint() * x).cwiseAbs2();
    out.cost = std::max(0.0, a.dot(fxx * a) + b.dot(fyy * b) - 2.0 * a.dot(fid * b));
    g = 2.0 * y * (b.cast<Complex>().asDiagonal() * oyy) - 2.0 * x * (a.cast<Complex>().asDiagonal() * overlap);
    for (Eigen::Index j = 0; j < g.cols(); ++j) g.col(j) *= b[j];
    db = 2.0 * fyy * b - 2.0 * fid.transpose() * a;
  }

  const double w_in = 1.0 / static_cast<double>(batch.inputs.size());
  std::vector<Amplitudes> adjoints(fwd.full.size());
  for (std::size_t j = 0; j < fwd.full.size(); ++j) adjoints[j] = Amplitudes::Zero(fwd.full[j].size());
  for (std::size_t j = 0; j < ny; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const Member& mb = fwd.members[j];
    const Amplitudes gy = g.col(jj);
    const Amplitudes yj = y.col(jj);
    // Through y = chi / sqrt(p).
    Amplitudes gchi = (gy - yj * yj.dot(gy).real()) / std::sqrt(mb.prob);
    // Through the branch weight b = p / M.
    if (cfg.branch_mode == BranchMode::Enumerated) gchi += (db[jj] * w_in / total) * mb.chi;
    lift_adjoint(adjoints[mb.input], gchi, n_a, mb.outcome);
  }
  for (std::size_t j = 0; j < fwd.full.size(); ++j) {
    accumulate_adjoint_gradient(ansatz, theta, fwd.full[j], adjoints[j], out.grad);
  }
  return out;
}

std::vector<std::uint64_t> sample_outcomes(std::span<const double> theta, const std::vector<Ket>& inputs, int n_a,
                                           int layers, const Rng& rng) {
  std::vector<std::uint64_t> out(inputs.size(), 0);
  if (n_a == 0) return out;
  const int n_m = inputs.at(0).n_qubits();
  const Circuit ansatz = build_ansatz_circuit(n_m + n_a, layers);
  const std::size_t n_out = std::size_t{1} << n_a;
  std::vector<double> probs(n_out);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const Amplitudes full = ansatz_output(ansatz, inputs[j], theta, n_a);
    std::fill(probs.begin(), probs.end(), 0.0);
    for (Eigen::Index i = 0; i < full.size(); ++i) probs[static_cast<std::size_t>(i) & (n_out - 1)] += std::norm(full[i]);
    for (auto& p : probs) p = p < kBranchCutoff ? 0.0 : p;
    Rng stream = rng.split(j);
    out[j] = stream.categorical(probs);
  }
  return out;
}

namespace {

StateEnsemble draw_batch(const StateEnsemble& source, std::size_t size, Rng& rng) {
  std::vector<std::size_t> idx(source.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < size; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
  std::vector<Ket> states;
  states.reserve(size);
  for (std::size_t i = 0; i < size; ++i) states.push_back(source.state(idx[i]));
  return StateEnsemble::uniform(std::move(states));
}

std::vector<Ket> layer_inputs(const DenoiserStack& stack, int k, std::size_t n, const Rng& rng) {
  std::vector<Ket> inputs = haar_product_ensemble(stack.n_m, n, rng.split("inputs")).states();
  if (k < stack.steps) inputs = run_backward(stack, inputs, stack.steps, k + 1, rng.split("upstream"));
  return inputs;
}

void check_finite(const CostGradient& cg, int k, int epoch) {
  const std::string where = "cycle " + std::to_string(k) + ", epoch " + std::to_string(epoch);
  if (!std::isfinite(cg.cost)) throw std::runtime_error("train: non-finite loss at " + where);
  for (std::size_t i = 0; i < cg.grad.size(); ++i) {
    if (!std::isfinite(cg.grad[i])) {
      throw std::runtime_error("train: non-finite gradient at " + where + ", parameter " + std::to_string(i));
    }
  }
}

}  // namespace

TrainResult train_layerwise(const std::vector<StateEnsemble>& forward, DenoiserStack stack, const TrainConfig& cfg) {
  stack.validate();
  if (forward.size() < static_cast<std::size_t>(stack.steps)) {
    throw std::invalid_argument("train: need forward ensembles S_0 .. S_{K-1} (" + std::to_string(stack.steps) +
                                " ensembles), got " + std::to_string(forward.size()));
  }
  for (int k = 0; k < stack.steps; ++k) {
    const auto& s = forward[static_cast<std::size_t>(k)];
    if (s.n_qubits() != stack.n_m) throw std::invalid_argument("train: forward ensemble width differs from n_m");
    cfg.validate(s.size());
  }

  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  const Rng root(cfg.seed);
  TrainResult result{stack, {}};
  result.report.seed = cfg.seed;
  result.report.adam = cfg.adam;

  for (int k = stack.steps; k >= 1; --k) {
    const auto t_cycle = clock::now();
    const StateEnsemble& target = forward[static_cast<std::size_t>(k - 1)];
    std::vector<double>& theta = result.stack.theta_mut(k);
    Adam opt(theta.size(), cfg.learning_rate, cfg.adam);
    CycleReport cycle{k, {}, 0.0, 0.0};
    cycle.losses.reserve(static_cast<std::size_t>(cfg.epochs));
    const Rng cycle_rng = root.split("cycle").split(static_cast<std::uint64_t>(k));

    for (int e = 0; e < cfg.epochs; ++e) {
      const Rng er = cycle_rng.split(static_cast<std::uint64_t>(e));
      Rng batch_rng = er.split("batch");
      LayerBatch batch{draw_batch(target, cfg.batch_size, batch_rng),
                       layer_inputs(result.stack, k, cfg.batch_size, er), {}};
      if (cfg.branch_mode == BranchMode::Sampled) {
        batch.outcomes = sample_outcomes(theta, batch.inputs, stack.n_a, stack.layers, er.split("outcomes"));
      }
      const CostGradient cg = cost_and_gradient(theta, batch, stack.n_a, stack.layers, cfg);
      check_finite(cg, k, e);
      cycle.losses.push_back(cg.cost);
      opt.step(theta, cg.grad);
    }

    const Rng final_rng = root.split("final").split(static_cast<std::uint64_t>(k));
    const auto gen = run_backward(result.stack,
                                  haar_product_ensemble(stack.n_m, target.size(), final_rng.split("inputs")).states(),
                                  stack.steps, k, final_rng.split("upstream"));
    cycle.final_distance = ensemble_cost(target, StateEnsemble::uniform(gen), cfg.cost);
    cycle.seconds = std::chrono::duration<double>(clock::now() - t_cycle).count();
    result.report.cycles.push_back(std::move(cycle));
  }
  result.report.seconds = std::chrono::duration<double>(clock::now() - t_start).count();
  return result;
}

}  // namespace chaodiff
