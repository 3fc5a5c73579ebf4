// Python bindings for the aoi solver library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aoi/cost.hpp"
#include "aoi/decoupled.hpp"
#include "aoi/dp.hpp"
#include "aoi/errors.hpp"
#include "aoi/experiment.hpp"
#include "aoi/sim.hpp"
#include "aoi/structure.hpp"
#include "aoi/system.hpp"

namespace py = pybind11;
using namespace aoi;

namespace {

SystemSpec make_system(const std::vector<std::pair<CostFunction, double>>& sources, bool allow_divergent) {
  std::vector<Source> s;
  s.reserve(sources.size());
  for (const auto& [f, p] : sources) s.push_back({f, p});
  return allow_divergent ? SystemSpec::allow_divergent(std::move(s)) : SystemSpec(std::move(s));
}

Policy make_policy(const SystemSpec& spec, const std::string& text) { return PolicySpec::parse(text).make(spec); }

py::object threshold_or_none(const ThresholdPolicy& t) {
  if (t.is_never()) return py::none();
  return py::int_(t.value());
}

py::dict cycle_dict(const Cycle& c) {
  py::dict d;
  d["states"] = c.states;
  d["actions"] = c.actions;
  d["average_cost"] = c.average_cost;
  d["transient_length"] = c.transient_length;
  return d;
}

py::object json_to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_aoi, m) {
  m.doc() = "Age-of-information scheduling: Whittle indices, finite-horizon DP and simulation.";
  m.attr("__version__") = version();

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object cls = py::module_::import("aoi._errors").attr("AoiError");
      const py::object instance = cls(e.what(), to_string(e.kind()));
      PyErr_SetObject(cls.ptr(), instance.ptr());
    }
  });

  py::class_<CostFunction>(m, "Cost")
      .def_static("linear", &CostFunction::linear, py::arg("weight"))
      .def_static("power", &CostFunction::power, py::arg("weight"), py::arg("exponent"))
      .def_static("exponential", &CostFunction::exponential, py::arg("base"), py::arg("weight") = 1.0)
      .def_static("logarithmic", &CostFunction::logarithmic, py::arg("weight"), py::arg("base") = py::none())
      .def_static("indicator", &CostFunction::indicator, py::arg("threshold"), py::arg("weight") = 1.0)
      .def_static("table", &CostFunction::table, py::arg("values"))
      .def_static("parse", &parse_cost_text, py::arg("text"),
                  "Compact form, e.g. 'kind=linear weight=13' or 'kind=table values=[1,2,7]'.")
      .def("__call__", &CostFunction::operator(), py::arg("age"))
      .def_property_readonly("kind", &CostFunction::kind)
      .def("describe", &CostFunction::describe)
      .def("is_bounded", &CostFunction::is_bounded)
      .def("__eq__", [](const CostFunction& a, const CostFunction& b) { return a == b; })
      .def("__repr__", [](const CostFunction& f) { return "Cost(" + f.describe() + ")"; });

  py::class_<SystemSpec>(m, "System")
      .def(py::init([](const std::vector<std::pair<CostFunction, double>>& sources, bool allow_divergent) {
             return make_system(sources, allow_divergent);
           }),
           py::arg("sources"), py::arg("allow_divergent") = false,
           "sources: list of (Cost, p) pairs, numbered from 0.")
      .def("__len__", &SystemSpec::size)
      .def_property_readonly("all_reliable", &SystemSpec::all_reliable)
      .def("cost", [](const SystemSpec& s, const AgeVector& ages) { return s.cost(ages); }, py::arg("ages"));

  m.def("is_bounded_cost", [](const CostFunction& f, double p) { return is_bounded_cost(f, p).bounded; },
        py::arg("cost"), py::arg("p"));
  m.def("whittle_index", &whittle_index, py::arg("cost"), py::arg("p"), py::arg("h"));
  m.def(
      "optimal_threshold",
      [](const CostFunction& f, double p, double charge) { return threshold_or_none(optimal_threshold({f, p, charge})); },
      py::arg("cost"), py::arg("p"), py::arg("charge"), "Smallest age with index above the charge; None for never.");
  m.def(
      "threshold_average_cost",
      [](const CostFunction& f, double p, double charge, std::optional<Age> threshold) {
        return threshold_average_cost({f, p, charge},
                                      threshold ? ThresholdPolicy::at(*threshold) : ThresholdPolicy::never());
      },
      py::arg("cost"), py::arg("p"), py::arg("charge"), py::arg("threshold"));
  m.def(
      "solve_decoupled",
      [](const CostFunction& f, double p, double charge, double tol) {
        const auto sol = solve_decoupled({f, p, charge}, tol);
        py::dict d;
        d["threshold"] = threshold_or_none(sol.policy);
        d["average_cost"] = sol.average_cost;
        d["a_max"] = sol.a_max;
        d["iterations"] = sol.iterations;
        return d;
      },
      py::arg("cost"), py::arg("p"), py::arg("charge"), py::arg("tol") = 1e-9);

  py::class_<SimulationResult>(m, "SimulationResult")
      .def_readonly("mean_cost", &SimulationResult::mean_cost)
      .def_readonly("std_error", &SimulationResult::std_error)
      .def_readonly("runs", &SimulationResult::runs)
      .def_readonly("horizon", &SimulationResult::horizon)
      .def_readonly("seed", &SimulationResult::seed)
      .def_readonly("per_source_costs", &SimulationResult::per_source_costs)
      .def("__repr__", [](const SimulationResult& r) {
        return "SimulationResult(mean_cost=" + format_double(r.mean_cost) + ", std_error=" +
               format_double(r.std_error) + ", runs=" + std::to_string(r.runs) + ")";
      });

  m.def(
      "simulate",
      [](const SystemSpec& spec, const std::string& policy, std::int64_t horizon, std::int64_t runs,
         std::uint64_t seed, unsigned threads) {
        const auto pol = make_policy(spec, policy);
        py::gil_scoped_release release;
        return simulate(spec, pol, horizon, runs, seed, SimOptions{threads});
      },
      py::arg("system"), py::arg("policy") = "whittle", py::arg("horizon") = 500, py::arg("runs") = 1,
      py::arg("seed") = 1, py::arg("threads") = 1,
      "policy uses the config grammar: whittle, round_robin, max_age, randomized(p1,...), cycle(i1,...) "
      "with 1-based cycle entries.");
  m.def(
      "detect_cycle",
      [](const SystemSpec& spec, const std::string& policy) { return cycle_dict(detect_cycle(spec, make_policy(spec, policy))); },
      py::arg("system"), py::arg("policy") = "whittle");

  py::class_<DpSolution>(m, "DpSolution")
      .def_readonly("optimal_average_cost", &DpSolution::optimal_average_cost)
      .def_readonly("horizon", &DpSolution::horizon)
      .def_readonly("a_max", &DpSolution::a_max)
      .def_readonly("truncation_report", &DpSolution::truncation_report)
      .def_readonly("warning", &DpSolution::warning)
      .def_readonly("expected_slot_costs", &DpSolution::expected_slot_costs)
      .def_readonly("optimal_path", &DpSolution::optimal_path)
      .def_readonly("optimal_actions", &DpSolution::optimal_actions);

  m.def(
      "solve_dp",
      [](const SystemSpec& spec, std::int64_t horizon, std::optional<Age> a_max, unsigned threads,
         std::int64_t memory_mb) {
        DpOptions opts;
        opts.threads = threads;
        opts.memory_budget_bytes = static_cast<std::size_t>(memory_mb) << 20;
        py::gil_scoped_release release;
        return solve_dp(spec, horizon, a_max, opts);
      },
      py::arg("system"), py::arg("horizon") = 500, py::arg("a_max") = py::none(), py::arg("threads") = 1,
      py::arg("memory_mb") = 4096);
  m.def(
      "dp_cycle", [](const DpSolution& sol, const SystemSpec& spec) { return cycle_dict(extract_cycle_policy(sol, spec)); },
      py::arg("solution"), py::arg("system"));

  m.def(
      "check_strong_switch",
      [](const std::vector<std::pair<AgeVector, SourceIndex>>& pairs) {
        StateActionSet set;
        for (const auto& [state, action] : pairs) set.pairs.push_back({state, action});
        py::list out;
        for (const auto& v : check_strong_switch(set)) {
          py::dict d;
          d["base"] = py::make_tuple(v.base.state, v.base.action);
          d["dominant"] = py::make_tuple(v.dominant.state, v.dominant.action);
          d["implied_action"] = v.implied_action;
          out.append(d);
        }
        return out;
      },
      py::arg("pairs"), "pairs: list of (ages, action) with 0-based actions. Returns one dict per violation.");
  m.def(
      "certify_theorem3",
      [](const CostFunction& f1, const CostFunction& f2, std::int64_t k_max) {
        CertifyOptions opts;
        opts.k_max = k_max;
        const auto c = certify_theorem3(f1, f2, opts);
        py::dict d;
        d["whittle_cycle"] = cycle_dict(c.whittle_cycle);
        d["best_k"] = c.best_cycle.k;
        d["best_cost"] = c.best_cycle.cost;
        d["dp_cost"] = c.dp_cost;
        d["whittle_leader"] = c.whittle_leader;
        d["whittle_k"] = c.whittle_k;
        d["index_values"] = c.index_values;
        return d;
      },
      py::arg("f1"), py::arg("f2"), py::arg("k_max") = 1000);

  m.def(
      "run_config",
      [](const std::string& path, std::optional<std::string> out_dir, unsigned threads, bool allow_divergent) {
        const auto config = load_config(path);
        ResultBundle bundle;
        {
          py::gil_scoped_release release;
          bundle = run_experiment(config, RunOptions{threads, allow_divergent});
        }
        if (out_dir) write_bundle(bundle, *out_dir);
        return json_to_python(to_json(bundle));
      },
      py::arg("path"), py::arg("out_dir") = py::none(), py::arg("threads") = 1, py::arg("allow_divergent") = false,
      "Runs a YAML config and returns the JSON sidecar as a dict; writes CSV and JSON when out_dir is given.");
  m.def(
      "config_hash", [](const std::string& path) { return config_hash(load_config(path)); }, py::arg("path"));
}
