#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "occ/bridge.hpp"
#include "occ/errors.hpp"
#include "occ/exact.hpp"
#include "occ/io.hpp"
#include "occ/meanfield.hpp"
#include "occ/order.hpp"
#include "occ/parallel.hpp"
#include "occ/simulate.hpp"

namespace py = pybind11;
using namespace occ;

namespace {

// Reports cross the boundary as JSON text; the Python side decodes them.
using Json = nlohmann::ordered_json;

const ModelSpec& occupancy_of(const ModelDocument& doc) {
  if (!doc.occupancy) throw ParameterError("this operation needs an occupancy model (colonisation/survival)");
  return *doc.occupancy;
}

const SpinSpec& spin_of(const ModelDocument& doc) {
  if (!doc.spin) throw ParameterError("this operation needs a spin model (birth/death)");
  return *doc.spin;
}

BitState start_of(const ModelDocument& doc, const std::optional<std::string>& x0) {
  if (!x0) return doc.initial_state();
  auto s = BitState::parse(*x0);
  if (s.size() != doc.n()) throw DimensionError("x0 must have one bit per site");
  return s;
}

OrderOptions order_options(double tol, std::uint64_t seed) {
  OrderOptions opt;
  opt.tol = tol;
  opt.seed = seed;
  opt.check.seed = seed;
  return opt;
}

std::vector<ProbVector> exact_marginal_path(const ModelDocument& doc, std::size_t steps,
                                            const std::optional<std::string>& x0) {
  const auto& spec = occupancy_of(doc);
  auto dist = DistVector::point_mass(start_of(doc, x0));
  std::vector<ProbVector> out;
  for (std::size_t t = 0; t <= steps; ++t) {
    if (t > 0) dist = propagate(spec, dist, 1);
    out.push_back(exact_marginals(dist));
  }
  return out;
}

std::vector<ProbVector> spin_marginal_path(const ModelDocument& doc, const std::vector<double>& times,
                                           const std::optional<std::string>& x0) {
  const auto& spec = spin_of(doc);
  auto law = DistVector::point_mass(start_of(doc, x0));
  std::vector<ProbVector> out;
  double prev = 0.0;
  for (double t : times) {
    if (t < prev) throw ParameterError("times must be increasing and >= 0");
    law = spin_law(spec, law, t - prev);
    prev = t;
    out.push_back(exact_marginals(law));
  }
  return out;
}

py::dict estimates(const McMarginals& m) {
  std::vector<std::vector<double>> mean, se;
  for (const auto& row : m.by_step) {
    mean.emplace_back();
    se.emplace_back();
    for (const auto& e : row) {
      mean.back().push_back(e.mean);
      se.back().push_back(e.se);
    }
  }
  py::dict d;
  d["mean"] = mean;
  d["se"] = se;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Occupancy processes, spin systems and their mean-field comparisons";

  py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError", PyExc_ValueError);

  py::class_<ModelDocument>(m, "Model")
      .def_static("from_json", &parse_model, py::arg("text"))
      .def_static("from_file", &load_model, py::arg("path"))
      .def_property_readonly("n", &ModelDocument::n)
      .def_property_readonly("kind",
                             [](const ModelDocument& d) { return d.kind == ModelKind::spin ? "spin" : "occupancy"; })
      .def_property_readonly("x0", [](const ModelDocument& d) { return d.initial_state().to_string(); })
      .def_readonly("description", &ModelDocument::description)
      .def("to_json", [](const ModelDocument& d) { return model_to_json(d).dump(); });

  m.def("set_num_threads", &set_num_threads, py::arg("threads"));

  m.def(
      "check_json",
      [](const ModelDocument& doc, std::size_t samples, double tol, std::uint64_t seed) {
        CheckOptions opt;
        opt.samples = samples;
        opt.tol = tol;
        opt.seed = seed;
        const auto report = doc.occupancy ? check_assumptions(*doc.occupancy, opt) : check_spin_assumptions(*doc.spin, opt);
        return to_json(report).dump();
      },
      py::arg("model"), py::arg("samples") = 4096, py::arg("tol") = 1e-9, py::arg("seed") = 0);

  m.def("exact_marginals", &exact_marginal_path, py::arg("model"), py::arg("steps"), py::arg("x0") = py::none(),
        "Exact occupancy probabilities for steps 0..steps.");
  m.def("spin_marginals", &spin_marginal_path, py::arg("model"), py::arg("times"), py::arg("x0") = py::none(),
        "Exact occupancy probabilities of a spin system at the given times.");

  m.def(
      "mean_field",
      [](const ModelDocument& doc, std::size_t steps, const std::optional<std::string>& x0) {
        return iterate(occupancy_of(doc), start_of(doc, x0).as_probabilities(), steps);
      },
      py::arg("model"), py::arg("steps"), py::arg("x0") = py::none());

  m.def(
      "mean_field_ode",
      [](const ModelDocument& doc, const std::vector<double>& times, double step, const std::optional<std::string>& x0) {
        return integrate_ode_on_grid(spin_of(doc), start_of(doc, x0).as_probabilities(), times, OdeConfig{step}).states;
      },
      py::arg("model"), py::arg("times"), py::arg("step") = 1e-3, py::arg("x0") = py::none());

  m.def(
      "simulate",
      [](const ModelDocument& doc, std::size_t steps, std::size_t reps, std::uint64_t seed,
         const std::optional<std::string>& x0) {
        const auto& spec = occupancy_of(doc);
        const auto start = start_of(doc, x0);
        McMarginals mc;
        {
          py::gil_scoped_release release;
          mc = simulate_marginals(spec, start, steps, reps, seed);
        }
        return estimates(mc);
      },
      py::arg("model"), py::arg("steps"), py::arg("reps") = 10000, py::arg("seed") = 0, py::arg("x0") = py::none());

  m.def(
      "monotone_violations",
      [](const ModelDocument& doc, std::size_t steps, std::size_t reps, std::uint64_t seed) {
        return monotone_path_check(occupancy_of(doc), doc.initial_state(), steps, reps, seed).violations;
      },
      py::arg("model"), py::arg("steps"), py::arg("reps") = 10000, py::arg("seed") = 0);

  m.def(
      "marginal_bound_json",
      [](const ModelDocument& doc, double horizon, double tol, std::uint64_t seed) {
        const auto opt = order_options(tol, seed);
        if (doc.spin) {
          std::vector<double> grid;
          for (int k = 0; k * 0.25 <= horizon + 1e-12; ++k) grid.push_back(0.25 * k);
          return to_json(spin_marginal_bound_check(*doc.spin, doc.initial_state(), grid, opt)).dump();
        }
        return to_json(marginal_bound_check(*doc.occupancy, doc.initial_state(), static_cast<std::size_t>(horizon), opt))
            .dump();
      },
      py::arg("model"), py::arg("horizon"), py::arg("tol") = 1e-10, py::arg("seed") = 0);

  m.def(
      "single_time_orthant_json",
      [](const ModelDocument& doc, std::size_t t, double tol, std::uint64_t seed) {
        const auto r = single_time_orthant_check(occupancy_of(doc), doc.initial_state(), t, order_options(tol, seed));
        Json out;
        out["harris"] = to_json(r.harris);
        out["mean_field"] = to_json(r.mean_field);
        out["combined"] = to_json(r.combined);
        return out.dump();
      },
      py::arg("model"), py::arg("t"), py::arg("tol") = 1e-10, py::arg("seed") = 0);

  m.def(
      "path_orthant_json",
      [](const ModelDocument& doc, std::size_t steps, double tol, std::uint64_t seed) {
        const auto r = path_orthant_check(occupancy_of(doc), doc.initial_state(), steps, order_options(tol, seed));
        Json out;
        out["single_site"] = to_json(r.single_site);
        out["multisite"] = to_json(r.multisite);
        out["recursion_bound"] = to_json(r.recursion_bound);
        out["decomposition_gap"] = r.decomposition_gap;
        return out.dump();
      },
      py::arg("model"), py::arg("m"), py::arg("tol") = 1e-10, py::arg("seed") = 0);

  m.def(
      "convergence",
      [](const ModelDocument& doc, double t, std::optional<std::vector<double>> deltas) {
        const auto grid = deltas ? *deltas : default_delta_grid();
        std::vector<std::tuple<double, std::string, double>> rows;
        for (const auto& r : convergence_table(spin_of(doc), doc.initial_state(), t, grid).rows)
          rows.emplace_back(r.delta, r.metric, r.value);
        return rows;
      },
      py::arg("model"), py::arg("t") = 1.0, py::arg("deltas") = py::none());

  m.def(
      "discretise",
      [](const ModelDocument& doc, double delta) {
        DiscretisationConfig cfg;
        cfg.delta = delta;
        ModelDocument out;
        out.kind = ModelKind::occupancy;
        out.occupancy = discretise(spin_of(doc), cfg);
        out.x0 = doc.x0;
        out.description = "discretised at delta = " + std::to_string(delta);
        return out;
      },
      py::arg("model"), py::arg("delta"));
}
