#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "quasilab/dynamics.hpp"
#include "quasilab/errors.hpp"
#include "quasilab/experiments.hpp"
#include "quasilab/ldp.hpp"
#include "quasilab/occupancy.hpp"
#include "quasilab/params.hpp"
#include "quasilab/reduced_chain.hpp"

namespace py = pybind11;
using namespace quasilab;

namespace {

Theta parse_theta(const std::string& name) {
  if (name == "lower") return Theta::lower;
  if (name == "upper") return Theta::upper;
  throw ValidationError("theta must be 'lower' or 'upper', got '" + name + "'");
}

py::dict cost_dict(const CostResult& c) {
  py::dict d;
  d["value"] = c.value;
  d["path"] = c.path;
  d["xi"] = c.xi;
  d["beta"] = c.beta;
  return d;
}

}  // namespace

PYBIND11_MODULE(_quasilab, m) {
  m.doc() = "Wright-Fisher sharp peak model: simulation, bounding chains, limit dynamics and rates";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<GuardError>(m, "GuardError", PyExc_RuntimeError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<CouplingViolation>(m, "CouplingViolation", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](int ell, int m_, int kappa, double q, double sigma, int K,
                       std::optional<double> a, std::optional<double> alpha) {
             ModelParams p;
             p.ell = ell;
             p.m = m_;
             p.kappa = kappa;
             p.q = q;
             p.sigma = sigma;
             p.K = K;
             p.a = a;
             p.alpha = alpha;
             return p;
           }),
           py::arg("ell"), py::arg("m"), py::arg("kappa") = 2, py::arg("q") = 0.0,
           py::arg("sigma") = 2.0, py::arg("K") = 0, py::arg("a") = py::none(),
           py::arg("alpha") = py::none())
      .def_readwrite("ell", &ModelParams::ell)
      .def_readwrite("m", &ModelParams::m)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def_readwrite("q", &ModelParams::q)
      .def_readwrite("sigma", &ModelParams::sigma)
      .def_readwrite("K", &ModelParams::K)
      .def_readwrite("a", &ModelParams::a)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def("__eq__", [](const ModelParams& x, const ModelParams& y) { return x == y; })
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(ell=" + std::to_string(p.ell) + ", m=" + std::to_string(p.m) +
               ", kappa=" + std::to_string(p.kappa) + ", q=" + std::to_string(p.q) +
               ", sigma=" + std::to_string(p.sigma) + ", K=" + std::to_string(p.K) + ")";
      });

  m.def("validate", &validate, py::arg("params"));
  m.def("violations", &violations, py::arg("params"));

  // Limit dynamics.
  m.def(
      "limit_map_F",
      [](const std::vector<double>& r, double sigma, double a) {
        return limit_map_F(r, LimitModel{sigma, a});
      },
      py::arg("r"), py::arg("sigma"), py::arg("a"));
  m.def(
      "rho_star",
      [](double sigma, double a, int K) { return rho_star(LimitModel{sigma, a}, K).rho; },
      py::arg("sigma"), py::arg("a"), py::arg("K"));
  m.def(
      "iterate_to_fixed_point",
      [](const std::vector<double>& z0, double sigma, double a, double tol, long max_iters) {
        const auto res = iterate_to_fixed_point(z0, LimitModel{sigma, a}, tol, max_iters);
        return py::make_tuple(res.point, res.iterations);
      },
      py::arg("z0"), py::arg("sigma"), py::arg("a"), py::arg("tol") = 1e-12,
      py::arg("max_iters") = 1'000'000);

  // Finite-m kernels.
  m.def("lumped_mutation", &lumped_mutation, py::arg("ell"), py::arg("kappa"), py::arg("q"),
        py::arg("b"), py::arg("c"));
  m.def(
      "occupancy_transition_prob",
      [](const ModelParams& p, const std::vector<int>& o, const std::vector<int>& o2) {
        return occupancy_transition_prob(LumpedKernel(p), o, o2);
      },
      py::arg("params"), py::arg("o"), py::arg("o2"));
  m.def(
      "reduced_transition_row",
      [](const ModelParams& p, const std::string& theta, const std::vector<int>& z) {
        const ReducedChain chain(p, parse_theta(theta));
        std::vector<std::pair<std::vector<int>, double>> out;
        for (const auto& [next, prob] : chain.transition_row(chain.state(z)))
          out.emplace_back(std::vector<int>(next.begin(), next.end()), prob);
        return out;
      },
      py::arg("params"), py::arg("theta"), py::arg("z"));

  // Rate functions and costs.
  m.def("binomial_rate", &binomial_rate, py::arg("p"), py::arg("t"));
  m.def(
      "multinomial_rate",
      [](const std::vector<double>& p, const std::vector<double>& t) { return multinomial_rate(p, t); },
      py::arg("p"), py::arg("t"));
  m.def(
      "cost_V1",
      [](const std::vector<double>& r, const std::vector<double>& t, double sigma, double a,
         int restarts, std::uint64_t seed) {
        CostOptions opts;
        opts.restarts = restarts;
        opts.seed = seed;
        return cost_dict(cost_V1(LimitModel{sigma, a}, r, t, opts));
      },
      py::arg("r"), py::arg("t"), py::arg("sigma"), py::arg("a"), py::arg("restarts") = 20,
      py::arg("seed") = 0x5eed);
  m.def(
      "psi",
      [](double sigma, double a, int l_max, bool printed_denominator, bool literal_index) {
        PsiOptions opts;
        opts.l_max = l_max;
        opts.printed_denominator = printed_denominator;
        opts.literal_index = literal_index;
        const auto res = psi(LimitModel{sigma, a}, opts);
        py::dict d;
        d["value"] = res.value;
        d["best_l"] = res.best_l;
        d["path"] = res.path;
        d["l_max_used"] = res.l_max_used;
        d["stabilized"] = res.stabilized;
        d["by_convention"] = res.by_convention;
        return d;
      },
      py::arg("sigma"), py::arg("a"), py::arg("l_max") = 20,
      py::arg("printed_denominator") = false, py::arg("literal_index") = false);
  m.def("critical_alpha", &critical_alpha, py::arg("psi"), py::arg("kappa"));

  // Experiments.
  m.def(
      "estimate_stationary",
      [](const ModelParams& p, const std::string& chain, long burn_in, long steps, int replicas,
         std::uint64_t seed) {
        StationaryOptions opts;
        opts.chain = parse_chain_kind(chain);
        opts.burn_in = burn_in;
        opts.steps = steps;
        opts.replicas = replicas;
        opts.seed = seed;
        StationaryEstimate est;
        {
          py::gil_scoped_release release;
          est = estimate_stationary(p, opts);
        }
        py::dict d;
        d["mean"] = est.mean;
        d["variance"] = est.variance;
        d["standard_error"] = est.standard_error;
        d["prefix_mean"] = est.prefix_mean;
        d["burn_in"] = est.burn_in;
        d["mixing_ok"] = est.mixing_ok;
        return d;
      },
      py::arg("params"), py::arg("chain") = "occupancy", py::arg("burn_in") = -1,
      py::arg("steps") = 10'000, py::arg("replicas") = 32, py::arg("seed") = 1);
  m.def(
      "hitting_times",
      [](const ModelParams& p, const std::string& theta, int replicas, std::int64_t cap,
         std::uint64_t seed) {
        std::vector<StoppingTimes> samples;
        {
          py::gil_scoped_release release;
          samples = hitting_times(p, parse_theta(theta), replicas, cap, seed);
        }
        py::list out;
        for (const auto& s : samples) {
          py::dict d;
          d["tau_star"] = s.tau_star;
          d["tau"] = s.tau;
          d["tau0"] = s.tau0;
          d["tau_star_censored"] = s.tau_star_censored;
          d["tau_censored"] = s.tau_censored;
          d["tau0_censored"] = s.tau0_censored;
          out.append(d);
        }
        return out;
      },
      py::arg("params"), py::arg("theta"), py::arg("replicas"), py::arg("cap"),
      py::arg("seed") = 1);
}
