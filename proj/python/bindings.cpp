#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pmetric/degeneration.hpp"
#include "pmetric/error.hpp"
#include "pmetric/io.hpp"
#include "pmetric/pressure_metric.hpp"
#include "pmetric/selftest.hpp"
#include "pmetric/thermo.hpp"

namespace py = pybind11;
using namespace pmetric;

namespace {

using EdgeTuple = std::tuple<std::size_t, std::size_t, std::string, double>;

MetricGraph make_graph(std::size_t vertices, const std::vector<EdgeTuple>& edges) {
    std::vector<Edge> out;
    for (const auto& [u, v, name, length] : edges) out.push_back({u, v, name, length});
    return MetricGraph(vertices, std::move(out));
}

std::vector<EdgeTuple> edges_of(const MetricGraph& g) {
    std::vector<EdgeTuple> out;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edge(e);
        out.emplace_back(edge.tail, edge.head, edge.name, edge.length);
    }
    return out;
}

double graph_entropy(const MetricGraph& g) {
    const auto ts = build_transition_structure(g);
    return topological_entropy(ts, Potential::edge_lengths(ts, g.lengths()));
}

} // namespace

PYBIND11_MODULE(_pmetric, m) {
    m.attr("__version__") = PMETRIC_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ResourceLimit>(m, "ResourceLimit", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<MetricGraph>(m, "MetricGraph")
        .def(py::init(&make_graph), py::arg("vertices"), py::arg("edges"))
        .def_property_readonly("vertex_count", &MetricGraph::vertex_count)
        .def_property_readonly("edge_count", &MetricGraph::edge_count)
        .def_property_readonly("edges", &edges_of)
        .def("lengths", &MetricGraph::lengths)
        .def("with_lengths", &MetricGraph::with_lengths, py::arg("lengths"))
        .def("to_json", &graph_to_json);

    m.def("load_graph", &load_graph, py::arg("path"));
    m.def("parse_graph", &parse_graph, py::arg("text"), py::arg("origin") = "<string>");
    m.def("entropy", &graph_entropy, py::arg("graph"));
    m.def(
        "entropy_by_counting",
        [](const MetricGraph& g, double horizon, bool periodic_points) {
            return entropy_by_counting(build_transition_structure(g), g, horizon,
                                       periodic_points ? CountMode::PeriodicPoints : CountMode::Geodesics);
        },
        py::arg("graph"), py::arg("horizon"), py::arg("periodic_points") = true);

    py::class_<ModuliPoint>(m, "ModuliPoint")
        .def(py::init<MetricGraph>(), py::arg("graph"))
        .def_property_readonly("graph", &ModuliPoint::graph)
        .def("lengths", &ModuliPoint::lengths)
        .def_property_readonly("edge_masses", &ModuliPoint::edge_masses)
        .def_property_readonly("mean_length", &ModuliPoint::mean_length);

    m.def("normalize_to_entropy_one", py::overload_cast<const MetricGraph&>(&normalize_to_entropy_one), py::arg("graph"));
    m.def(
        "tangent_basis",
        [](const ModuliPoint& p) {
            std::vector<std::vector<double>> out;
            for (const auto& v : tangent_basis(p)) out.push_back(v.rates);
            return out;
        },
        py::arg("point"));
    m.def(
        "pressure_norm", [](const ModuliPoint& p, std::vector<double> v) { return pressure_norm(p, {std::move(v)}); },
        py::arg("point"), py::arg("rates"));
    m.def(
        "metric_tensor",
        [](const ModuliPoint& p) {
            const MetricTensor t = metric_tensor(p);
            std::vector<std::vector<double>> basis;
            for (const auto& v : t.basis) basis.push_back(v.rates);
            py::dict out;
            out["gram"] = t.gram;
            out["basis"] = basis;
            out["basis_description"] = t.basis_description;
            out["min_eigenvalue"] = t.min_eigenvalue;
            return out;
        },
        py::arg("point"));
    m.def("intersection_J", &intersection_J, py::arg("l1"), py::arg("l2"), py::arg("horizon"),
          py::arg("cap") = kDefaultEnumerationCap);

    m.def("hexagon_side", &hexagon_side, py::arg("a"), py::arg("b"), py::arg("c"));
    m.def("solve_hexagon", &solve_hexagon, py::arg("a"), py::arg("b"), py::arg("c"));

    py::class_<TriangulationComplex>(m, "TriangulationComplex")
        .def_property_readonly("arcs", &TriangulationComplex::arcs)
        .def_property_readonly("segments", &TriangulationComplex::segments)
        .def("marked_segments", &TriangulationComplex::marked_segments)
        .def("dual_graph", &TriangulationComplex::dual_graph)
        .def_property_readonly("boundary_count", [](const TriangulationComplex& c) { return c.boundary_cycles().size(); });
    m.def("load_triangulation", &load_triangulation, py::arg("path"));

    py::class_<SurfaceStructure>(m, "SurfaceStructure")
        .def_readonly("ortholengths", &SurfaceStructure::ortholengths)
        .def_readonly("segment_lengths", &SurfaceStructure::segment_lengths)
        .def_readonly("max_residual", &SurfaceStructure::max_residual)
        .def("boundary_lengths", [](const SurfaceStructure& ss) {
            std::vector<double> out;
            for (std::size_t k = 0; k < ss.complex.boundary_cycles().size(); ++k) out.push_back(boundary_length(ss, k));
            return out;
        });
    m.def("surface_from_coordinates", &surface_from_coordinates, py::arg("complex"), py::arg("coords"));

    py::class_<DegenerationPath>(m, "DegenerationPath")
        .def(py::init<TriangulationComplex, std::vector<double>>(), py::arg("complex"), py::arg("b"))
        .def_property_readonly("legs", &DegenerationPath::legs)
        .def("segment_limits", &DegenerationPath::segment_limits)
        .def("limit_edge_lengths", &DegenerationPath::limit_edge_lengths)
        .def("limit_graph", &DegenerationPath::limit_graph);
    m.def("limit_graph_metric", &limit_graph_metric, py::arg("path"));
    m.def(
        "path_speed",
        [](const DegenerationPath& path, double t, std::size_t depth) {
            const SpeedSample s = path_speed(path, t, depth);
            py::dict out;
            out["t"] = s.t;
            out["speed"] = s.speed;
            out["entropy"] = s.entropy;
            out["centering_residual"] = s.centering_residual;
            return out;
        },
        py::arg("path"), py::arg("t"), py::arg("depth") = 2);
    m.def(
        "path_length",
        [](const DegenerationPath& path, double t_min, double t_max, std::size_t depth, std::size_t points) {
            const PathLengthReport r = path_length(path, t_min, t_max, depth, points);
            std::vector<double> speeds;
            for (const auto& s : r.speeds) speeds.push_back(s.speed);
            py::dict out;
            out["grid"] = r.grid;
            out["speeds"] = speeds;
            out["cumulative"] = r.cumulative;
            out["total"] = r.total;
            out["increments"] = r.increments;
            out["ratios"] = r.ratios;
            return out;
        },
        py::arg("path"), py::arg("t_min"), py::arg("t_max") = 0.2, py::arg("depth") = 2,
        py::arg("points_per_halving") = 1);

    m.def(
        "selftest",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto& c : run_selftest(seed)) {
                py::dict d;
                d["module"] = c.module;
                d["name"] = c.name;
                d["value"] = c.value;
                d["bound"] = c.bound;
                d["pass"] = c.pass;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = 0);
}
