#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eqolab/cli.hpp"
#include "eqolab/concentration.hpp"
#include "eqolab/harness.hpp"
#include "eqolab/mdp_json.hpp"
#include "eqolab/ucb.hpp"

namespace py = pybind11;
using namespace eqolab;

namespace {

ExperimentConfig config_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = load_config(path);
  if (overrides.empty()) return cfg;
  Json doc = cfg.doc;
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, cfg.base_dir);
}

py::dict simulate(const std::string& config, const std::vector<std::string>& overrides, int workers) {
  const ExperimentConfig cfg = config_with_overrides(config, overrides);
  RegretEnsemble e;
  {
    py::gil_scoped_release release;
    e = run_ensemble(cfg, workers);
  }
  py::array_t<double> regret({static_cast<py::ssize_t>(e.replications), static_cast<py::ssize_t>(e.checkpoints.size())});
  std::copy(e.regret.begin(), e.regret.end(), regret.mutable_data());
  py::dict out;
  out["horizon"] = e.horizon;
  out["checkpoints"] = e.checkpoints;
  out["regret"] = regret;
  out["seeds"] = e.seeds;
  out["config_hash"] = e.config_hash;
  out["fixture_hash"] = e.fixture_hash;
  return out;
}

py::dict bound_curve(const std::string& config, const std::vector<std::string>& overrides) {
  const ExperimentConfig cfg = config_with_overrides(config, overrides);
  const Instance inst = build_instance(cfg);
  const BoundCurve curve = evaluate_bound(cfg, inst);
  std::vector<double> delta, total;
  py::dict components;
  for (const BoundPoint& p : curve.points) {
    delta.push_back(p.delta);
    total.push_back(p.total);
  }
  if (!curve.points.empty()) {
    for (const auto& c : curve.points.front().components) {
      std::vector<double> col;
      for (const BoundPoint& p : curve.points) col.push_back(p.component(c.name));
      components[py::str(c.name)] = col;
    }
  }
  py::dict out;
  out["theorem"] = curve.theorem;
  out["horizon"] = curve.horizon;
  out["delta"] = delta;
  out["total"] = total;
  out["components"] = components;
  out["parameters"] = curve.parameters.dump();
  return out;
}

py::dict quantile(const std::vector<double>& column, double delta) {
  const QuantileEstimate q = empirical_quantile(column, delta);
  py::dict out;
  out["value"] = q.value;
  out["lower"] = q.lower;
  out["upper"] = q.upper;
  out["index"] = q.index;
  out["coverage"] = q.coverage;
  return out;
}

py::dict optimal(const std::string& fixture) {
  const MdpSpec m = load_mdp(fixture);
  const ValueTables vt = optimal_values(m);
  py::dict out;
  out["S"] = m.S;
  out["A"] = m.A;
  out["H"] = m.H;
  out["v_max"] = m.v_max;
  out["v_star"] = vt.v_star;
  out["q_star"] = vt.q_star;
  out["hash"] = mdp_hash(m);
  return out;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eqolab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

PYBIND11_MODULE(_eqolab, m) {
  m.doc() = "Regret simulation and bound evaluation for EQO+ agents";

  static py::exception<Error> error(m, "EqolabError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("simulate", &simulate, py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
        py::arg("workers") = 1, "Run the seeded replication ensemble described by a config file.");
  m.def("bound_curve", &bound_curve, py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
        "Evaluate the config's bound over its δ grid.");
  m.def("empirical_quantile", &quantile, py::arg("column"), py::arg("delta"));
  m.def("optimal_values", &optimal, py::arg("fixture"));
  m.def("tight_ucb", &tight_ucb, py::arg("t"), py::arg("delta"), py::arg("sigma"), py::arg("A"));
  m.def("tau2", [](const std::string& rule, double param, double delta) {
    return tau2_closed_form(parse_delta_rule(rule, param), delta);
  }, py::arg("rule"), py::arg("param"), py::arg("delta"));
  m.def("ville_threshold", &ville_threshold, py::arg("lam"), py::arg("sigma2_sum"), py::arg("delta"), py::arg("alpha") = 0.0);
  m.def("hoeffding_threshold", &hoeffding_threshold, py::arg("n"), py::arg("sigma"), py::arg("delta"));
  m.def("peeling_threshold", &peeling_threshold, py::arg("n"), py::arg("eta"), py::arg("delta"));
  m.def("run_cli", &cli, py::arg("args"), "Run the command-line tool in-process and return its exit code.");
}
