#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "qsfrac/audit.hpp"
#include "qsfrac/corpus.hpp"
#include "qsfrac/error.hpp"
#include "qsfrac/record_io.hpp"

namespace py = pybind11;
using namespace qsfrac;

namespace {

// A record with the mesh and model it refers to. The mesh lives on the heap
// because DOF topologies keep its address.
struct Run {
  RunConfig config;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const EnergyModel> model;
  EvolutionRecord record;
  std::vector<int> replaced;  // knots an envelope rewrote
};

Run make_run(const RunConfig& config, const std::string& strategy, int threads) {
  Run r;
  r.config = config;
  if (!strategy.empty()) r.config.set("strategy.kind", strategy);
  r.mesh = std::make_shared<const Mesh>(r.config.build_mesh());
  r.model = std::make_shared<const EnergyModel>(r.config.build_model(*r.mesh));
  EvolutionOptions o = r.config.evolution_options();
  if (threads > 0) o.threads = threads;
  r.record = run_evolution(*r.model, *r.mesh, r.config.build_grid(), r.config.initial_crack(*r.mesh),
                           r.config.strategy(), o);
  stamp_record(r.record, r.config);
  return r;
}

Run from_loaded(LoadedRecord l) {
  Run r;
  r.config = std::move(l.config);
  r.mesh = std::move(l.mesh);
  r.model = std::make_shared<const EnergyModel>(std::move(l.model));
  r.record = std::move(l.record);
  return r;
}

Run envelope(const Run& r, bool left) {
  EnvelopeResult e = left ? left_envelope(r.record, *r.model, *r.mesh) : right_envelope(r.record, *r.model, *r.mesh);
  Run out{r.config, r.mesh, r.model, std::move(e.record), std::move(e.jump_knots)};
  return out;
}

std::string audit_json(const Run& r, const std::vector<std::string>& checks, const std::string& level,
                       const std::map<std::string, double>& tol, int threads) {
  AuditSelection sel;
  sel.irreversibility = sel.balance = sel.stability = sel.structure = false;
  for (const auto& c : checks) {
    if (c == "all") {
      sel.irreversibility = sel.balance = sel.stability = sel.structure = sel.duality = true;
    } else if (c == "irreversibility") {
      sel.irreversibility = true;
    } else if (c == "balance") {
      sel.balance = true;
    } else if (c == "stability") {
      sel.stability = true;
    } else if (c == "structure") {
      sel.structure = true;
    } else if (c == "duality") {
      sel.duality = true;
    } else {
      throw ConfigError("checks", "unknown check '" + c + "'");
    }
  }
  sel.level = stability_level_from_string(level);
  RunConfig cfg = r.config;
  for (const auto& [k, v] : tol) cfg.set("tol." + k, format_double(v));
  return run_audit(r.record, *r.model, *r.mesh, sel, cfg.tolerances(), threads).to_json();
}

}  // namespace

PYBIND11_MODULE(_qsfrac, m) {
  m.doc() = "Quasi-static brittle fracture on triangulations";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<LimitError>(m, "LimitError", base.ptr());

  py::class_<RunConfig>(m, "Config")
      .def(py::init<>())
      .def_static("parse", &RunConfig::parse, py::arg("text"))
      .def_static("load", &RunConfig::load, py::arg("path"))
      .def_static("from_corpus", [](const std::string& name) { return corpus_instance(name).config(); },
                  py::arg("name"))
      .def("set", &RunConfig::set, py::arg("key"), py::arg("value"))
      .def("get", &RunConfig::get, py::arg("key"))
      .def("set_step", &RunConfig::set_step, py::arg("dt"))
      .def("effective_text", &RunConfig::effective_text)
      .def("hash", &RunConfig::hash)
      .def_static("known_keys", &RunConfig::known_keys);

  m.def("corpus", [] {
    py::dict d;
    for (const auto& inst : corpus()) d[py::str(inst.name)] = inst.summary;
    return d;
  }, "Names and summaries of the built-in instances.");

  py::class_<Run>(m, "Run")
      .def_property_readonly("config", [](const Run& r) { return r.config; })
      .def_property_readonly("times", [](const Run& r) { return r.record.grid.knots; })
      .def_property_readonly("energies", [](const Run& r) {
        py::list out;
        for (const auto& k : r.record.knots) {
          py::dict d;
          d["bulk"] = k.energy.bulk;
          d["surface"] = k.energy.surface;
          d["body"] = k.energy.body;
          d["surface_force"] = k.energy.surface_force;
          d["total"] = k.energy.total();
          out.append(d);
        }
        return out;
      })
      .def_property_readonly("cracks", [](const Run& r) {
        std::vector<std::vector<EdgeId>> out;
        for (const auto& k : r.record.knots) out.push_back(k.crack.edges());
        return out;
      })
      .def_property_readonly("crackable_edges", [](const Run& r) { return r.mesh->crackable_edges(); })
      .def_property_readonly("jump_knots", [](const Run& r) { return r.record.jump_knots(); })
      .def_property_readonly("replaced_knots", [](const Run& r) { return r.replaced; })
      .def_property_readonly("complete", [](const Run& r) { return r.record.complete; })
      .def_property_readonly("conforming", [](const Run& r) { return r.record.conforming; })
      .def_property_readonly("failure", [](const Run& r) { return r.record.failure; })
      .def_property_readonly("strategy", [](const Run& r) { return std::string(to_string(r.record.strategy)); })
      .def_property_readonly("certification",
                             [](const Run& r) { return std::string(to_string(r.record.certification)); })
      .def("body", [](const Run& r) { return record_body(r.record); }, "Per-knot record body text.")
      .def("csv", [](const Run& r) {
        std::ostringstream os;
        write_csv(os, r.record);
        return os.str();
      })
      .def("save", [](const Run& r, const std::string& path) { write_record_file(path, r.record); }, py::arg("path"))
      .def("audit_json", &audit_json, py::arg("checks"), py::arg("level") = "ORACLE",
           py::arg("tol") = std::map<std::string, double>{}, py::arg("threads") = 0)
      .def("left_envelope", [](const Run& r) { return envelope(r, true); })
      .def("right_envelope", [](const Run& r) { return envelope(r, false); });

  m.def("run", &make_run, py::arg("config"), py::arg("strategy") = "", py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("load_record", [](const std::string& path) { return from_loaded(read_record_file(path)); }, py::arg("path"));
}
