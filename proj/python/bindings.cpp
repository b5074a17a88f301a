// Python bindings for the core operations.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chaodiff/chaos.hpp"
#include "chaodiff/data.hpp"
#include "chaodiff/denoiser.hpp"
#include "chaodiff/experiment.hpp"
#include "chaodiff/forward.hpp"
#include "chaodiff/metrics.hpp"
#include "chaodiff/noise.hpp"
#include "chaodiff/qae.hpp"

namespace py = pybind11;
using namespace chaodiff;

namespace {

int qubits_for(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw std::invalid_argument("amplitude vector length must be a power of two");
  return n;
}

StateEnsemble ensemble_from(const std::vector<Ket>& states, const std::optional<std::vector<double>>& weights) {
  if (!weights) return StateEnsemble::uniform(states);
  if (weights->size() != states.size()) throw std::invalid_argument("weights and states differ in length");
  std::vector<WeightedKet> m;
  for (std::size_t i = 0; i < states.size(); ++i) m.push_back({(*weights)[i], states[i]});
  return StateEnsemble(std::move(m));
}

std::shared_ptr<const ChaoticHamiltonian> hamiltonian(int n, double hx, double hy, double j) {
  return build_hamiltonian(n, hx, hy, j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chaotic quantum diffusion core";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
      .def("split", py::overload_cast<std::uint64_t>(&Rng::split, py::const_))
      .def("split_named", py::overload_cast<std::string_view>(&Rng::split, py::const_))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", &Rng::normal)
      .def_property_readonly("seed", &Rng::seed);

  py::class_<Ket>(m, "Ket")
      .def(py::init([](const Amplitudes& a) { return Ket(qubits_for(a.size()), a); }), py::arg("amplitudes"))
      .def_static("normalized", [](const Amplitudes& a) { return Ket::normalized(qubits_for(a.size()), a); })
      .def_static("basis", &Ket::basis)
      .def_static("zero", &Ket::zero)
      .def_static("ghz", &Ket::ghz)
      .def_static("plus", &Ket::plus)
      .def_property_readonly("n_qubits", &Ket::n_qubits)
      .def_property_readonly("amplitudes", [](const Ket& k) { return Amplitudes(k.amplitudes()); })
      .def("density", &Ket::density);

  py::class_<StateEnsemble>(m, "StateEnsemble")
      .def(py::init(&ensemble_from), py::arg("states"), py::arg("weights") = std::nullopt)
      .def("__len__", &StateEnsemble::size)
      .def_property_readonly("n_qubits", &StateEnsemble::n_qubits)
      .def_property_readonly("weights", &StateEnsemble::weights)
      .def("states", &StateEnsemble::states)
      .def("state_matrix", &StateEnsemble::state_matrix);

  m.def("tensor", &tensor);
  m.def("fidelity", &fidelity);
  m.def("haar_product_state", &haar_product_state);

  m.def("hamiltonian_matrix", &ising_matrix, py::arg("n_sites"), py::arg("hx") = 0.8090, py::arg("hy") = 0.9045,
        py::arg("coupling") = 1.0);
  m.def(
      "evolve",
      [](const Ket& s, double t, double hx, double hy, double j) {
        return evolve(s, *hamiltonian(s.n_qubits(), hx, hy, j), t);
      },
      py::arg("state"), py::arg("t"), py::arg("hx") = 0.8090, py::arg("hy") = 0.9045, py::arg("coupling") = 1.0);

  m.def("mmd", &mmd);
  m.def("wasserstein_distance", &wasserstein_distance);
  m.def("moment_distance_haar", &moment_distance_haar);
  m.def("moment_distance", &moment_distance);
  m.def("swap_test_fidelity", &swap_test_fidelity);

  m.def("dephasing_prob", &dephasing_prob, py::arg("t"), py::arg("gamma_phi"));
  m.def("composed_dephasing_prob", &composed_dephasing_prob, py::arg("k"), py::arg("p2"));

  py::enum_<Scheme>(m, "Scheme").value("CTED", Scheme::CTED).value("RTED", Scheme::RTED).value("RUCD", Scheme::RUCD);

  py::class_<DiffusionConfig>(m, "DiffusionConfig")
      .def(py::init<>())
      .def_readwrite("scheme", &DiffusionConfig::scheme)
      .def_readwrite("n_m", &DiffusionConfig::n_m)
      .def_readwrite("n_f", &DiffusionConfig::n_f)
      .def_readwrite("steps", &DiffusionConfig::steps)
      .def_readwrite("dt", &DiffusionConfig::dt)
      .def_readwrite("complement_dist", &DiffusionConfig::complement_dist)
      .def_readwrite("noise", &DiffusionConfig::noise)
      .def_readwrite("rucd_alpha_factor", &DiffusionConfig::rucd_alpha_factor)
      .def("validate", &DiffusionConfig::validate);

  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def(py::init([](double p1, double p2) { return NoiseConfig{p1, p2}; }), py::arg("p1") = 0.0, py::arg("p2") = 0.0)
      .def_readwrite("p1", &NoiseConfig::p1)
      .def_readwrite("p2", &NoiseConfig::p2);

  m.def(
      "diffuse",
      [](const StateEnsemble& s0, const DiffusionConfig& cfg, std::uint64_t seed, double hx, double hy, double j) {
        std::shared_ptr<const ChaoticHamiltonian> h;
        if (cfg.scheme != Scheme::RUCD) h = hamiltonian(cfg.n_m + cfg.n_f, hx, hy, j);
        return diffuse_ensembles(s0, cfg, h.get(), Rng(seed));
      },
      py::arg("s0"), py::arg("config"), py::arg("seed") = 0, py::arg("hx") = 0.8090, py::arg("hy") = 0.9045,
      py::arg("coupling") = 1.0);

  py::class_<CostModel>(m, "CostModel")
      .def(py::init([](double tu, double tc, double tr, long n, long k) { return CostModel{tu, tc, tr, n, k}; }),
           py::arg("tau_u") = 1.0, py::arg("tau_c") = 1.0, py::arg("tau_r") = 1.0, py::arg("n_samples") = 1,
           py::arg("steps") = 1);
  m.def("execution_time", [](const CostModel& cm, Scheme s) {
    const auto c = execution_time(cm, s);
    return py::make_tuple(c.unitary_count, c.total_time);
  });

  m.def(
      "sample_circular", [](int n_m, std::size_t n, std::uint64_t seed) { return sample_circular({n_m}, n, Rng(seed)); },
      py::arg("n_m"), py::arg("n_samples"), py::arg("seed") = 0);
  m.def(
      "sample_multicluster",
      [](int n_m, std::size_t n, double sigma, std::uint64_t seed) {
        ClusterSpec spec;
        spec.n_m = n_m;
        spec.sigma = sigma;
        return sample_multicluster(spec, n, Rng(seed));
      },
      py::arg("n_m"), py::arg("n_samples"), py::arg("sigma") = 0.05, py::arg("seed") = 0);

  py::class_<DenoiserStack>(m, "DenoiserStack")
      .def_static(
          "random",
          [](int steps, int n_m, int n_a, int layers, std::uint64_t seed) {
            Rng rng(seed);
            return DenoiserStack::random(steps, n_m, n_a, layers, rng);
          },
          py::arg("steps"), py::arg("n_m"), py::arg("n_a"), py::arg("layers"), py::arg("seed") = 0)
      .def_static("zeros", &DenoiserStack::zeros)
      .def_readwrite("thetas", &DenoiserStack::thetas)
      .def_readonly("steps", &DenoiserStack::steps)
      .def_property_readonly("n_params", &DenoiserStack::n_params);
  m.def(
      "generate",
      [](const DenoiserStack& s, std::size_t n, std::uint64_t seed) { return generate(s, n, Rng(seed)).ensembles; },
      py::arg("stack"), py::arg("n_samples"), py::arg("seed") = 0);

  py::class_<QaeModel>(m, "QaeModel")
      .def_static(
          "random",
          [](int n_total, int n_latent, int depth, std::uint64_t seed) {
            Rng rng(seed);
            return QaeModel::random(n_total, n_latent, depth, rng);
          },
          py::arg("n_total"), py::arg("n_latent"), py::arg("depth"), py::arg("seed") = 0)
      .def_readwrite("params", &QaeModel::params)
      .def_readonly("n_total", &QaeModel::n_total)
      .def_readonly("n_latent", &QaeModel::n_latent)
      .def_readonly("depth", &QaeModel::depth);
  m.def("trash_loss", &trash_loss);
  m.def(
      "train_qae",
      [](const QaeModel& model, const StateEnsemble& data, int epochs, double lr) {
        auto r = train_qae(model, data, epochs, lr);
        return py::make_tuple(r.model, r.losses);
      },
      py::arg("model"), py::arg("data"), py::arg("epochs") = 2000, py::arg("learning_rate") = 0.001);
  m.def("encode", &encode);
  m.def("decode", &decode);

  m.def("load_bundle_ensembles", [](const std::string& path) { return load_bundle(path).ensembles; });
  m.def(
      "run_forward",
      [](const std::string& config_json, int threads) {
        const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
        std::vector<py::tuple> rows;
        for (const auto& r : run_forward(cfg, threads))
          rows.push_back(py::make_tuple(r.scheme, r.k, r.n_f, r.m, r.metric, r.value, r.trial));
        return rows;
      },
      py::arg("config_json"), py::arg("threads") = 1);
}
