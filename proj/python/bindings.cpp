#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "perclab/errors.hpp"
#include "perclab/estimators.hpp"
#include "perclab/experiments.hpp"
#include "perclab/family.hpp"
#include "perclab/multiscale.hpp"
#include "perclab/patch.hpp"
#include "perclab/percolation.hpp"
#include "perclab/walks.hpp"

namespace py = pybind11;
using namespace perclab;

namespace {
py::dict estimate_dict(const McEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["ci_lo"] = e.ci_lo;
    d["ci_hi"] = e.ci_hi;
    d["ci_halfwidth"] = e.ci_halfwidth;
    d["replicas"] = e.replicas;
    d["seed"] = e.seed;
    d["patch_radius"] = e.patch_radius;
    return d;
}
}  // namespace

PYBIND11_MODULE(_perclab, m) {
    m.doc() = "Percolation experiments on transitive graphs";
    m.attr("__version__") = PERCLAB_VERSION;

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<GraphFamily>(m, "GraphFamily")
        .def_static("parse", &GraphFamily::parse, py::arg("name"))
        .def_property_readonly("name", &GraphFamily::name)
        .def("__repr__", [](const GraphFamily& f) { return "GraphFamily(" + f.name() + ")"; });

    py::class_<GraphPatch, std::shared_ptr<GraphPatch>>(m, "GraphPatch")
        .def_property_readonly("radius", &GraphPatch::radius)
        .def_property_readonly("degree", &GraphPatch::degree)
        .def_property_readonly("num_vertices", &GraphPatch::num_vertices)
        .def_property_readonly("num_edges", &GraphPatch::num_edges)
        .def("growth", &GraphPatch::growth, py::arg("n"))
        .def("sphere", &GraphPatch::sphere, py::arg("r"))
        .def("dist", &GraphPatch::dist, py::arg("v"))
        .def("edges", [](const GraphPatch& g) {
            std::vector<std::pair<VertexId, VertexId>> out;
            for (const auto& e : g.edges()) out.emplace_back(e.u, e.v);
            return out;
        })
        .def("to_text", [](const GraphPatch& g) { return patch_to_string(g); });

    m.def("build_patch", [](const std::string& family, int radius) {
        return std::const_pointer_cast<GraphPatch>(build_patch(GraphFamily::parse(family), radius));
    }, py::arg("family"), py::arg("radius"));
    m.def("growth_of", [](const std::string& family, int n) { return growth_of(GraphFamily::parse(family), n); },
          py::arg("family"), py::arg("n"));

    m.def("sprinkle", &sprinkle, py::arg("p"), py::arg("amount"));
    m.def("delta", &delta, py::arg("p"), py::arg("q"));

    m.def("sphere_connection", [](const std::string& family, int radius, double p, int r, std::uint64_t replicas,
                                  std::uint64_t seed) {
        return estimate_dict(est_sphere_connection(GraphFamily::parse(family), radius, p, r, replicas, seed));
    }, py::arg("family"), py::arg("radius"), py::arg("p"), py::arg("r"), py::arg("replicas"), py::arg("seed"));

    m.def("heat_kernel", [](const std::string& family, int radius, int t) {
        const PatchPtr g = cached_patch(GraphFamily::parse(family), radius);
        return heat_kernel_exact(*g, g->root(), t).mass;
    }, py::arg("family"), py::arg("radius"), py::arg("t"));

    m.def("schedule", [](double n0, double p0, double K, double burnin, int i_max) {
        const Schedule s = make_schedule(n0, p0, K, burnin, i_max);
        py::dict d;
        d["logloglog_n"] = s.logloglog_n;
        d["delta"] = s.delta;
        d["p"] = s.p;
        d["p_infinity"] = p_infinity(s);
        d["p_infinity_bound"] = p_infinity_bound(s);
        return d;
    }, py::arg("n0"), py::arg("p0"), py::arg("K") = 0.0, py::arg("burnin") = 0.0, py::arg("i_max") = 5);

    m.def("list_experiments", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : list_experiments()) out.emplace_back(e.name, e.description);
        return out;
    });

    // Returns (passed, config_hash, records as JSON text lines).
    m.def("run_config", [](const std::string& text, bool record_timing) {
        ExperimentConfig cfg = parse_config(text, "<python>");
        if (!record_timing) cfg.set("record_timing", "false");
        ExperimentResult res;
        {
            py::gil_scoped_release release;
            res = run_experiment(cfg);
        }
        std::vector<std::string> lines;
        for (const auto& r : res.records) lines.push_back(r.dump());
        return py::make_tuple(res.passed(), res.config_hash, lines);
    }, py::arg("text"), py::arg("record_timing") = true);
}
