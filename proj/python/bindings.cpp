#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hklab/checkers.hpp"
#include "hklab/errors.hpp"
#include "hklab/generators.hpp"
#include "hklab/graph_io.hpp"
#include "hklab/potential.hpp"
#include "hklab/walk.hpp"
#include "hklab/workspace.hpp"

namespace py = pybind11;
using namespace hklab;

namespace {

Grid grid_from(Workspace& ws, const std::string& grid_json, std::uint64_t seed) {
    auto j = grid_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(grid_json);
    return make_grid(ws, grid_spec_from_json(j), seed);
}

}  // namespace

PYBIND11_MODULE(_hklab, m) {
    m.doc() = "random walks on weighted pre-fractal graphs";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<TruncationError>(m, "TruncationError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<CapExceededError>(m, "CapExceededError", PyExc_MemoryError);

    py::class_<WeightedGraph>(m, "WeightedGraph")
        .def(py::init([](Vertex n, const std::vector<std::tuple<Vertex, Vertex, double>>& edges,
                         const std::map<std::string, Vertex>& labels, const std::vector<Vertex>& frontier) {
                 std::vector<Edge> es;
                 for (auto [u, v, w] : edges) es.push_back({u, v, w});
                 return WeightedGraph(n, std::move(es), labels, frontier);
             }),
             py::arg("vertex_count"), py::arg("edges"), py::arg("labels") = std::map<std::string, Vertex>{},
             py::arg("frontier") = std::vector<Vertex>{})
        .def_property_readonly("vertex_count", &WeightedGraph::vertex_count)
        .def_property_readonly("edge_count", &WeightedGraph::edge_count)
        .def_property_readonly("labels", &WeightedGraph::labels)
        .def_property_readonly("frontier",
                               [](const WeightedGraph& g) { return std::vector<Vertex>(g.frontier().begin(), g.frontier().end()); })
        .def_property_readonly("total_measure", &WeightedGraph::total_measure)
        .def("measure", &WeightedGraph::measure)
        .def("label", [](const WeightedGraph& g, const std::string& s) { return g.label(s); })
        .def("neighbors", [](const WeightedGraph& g, Vertex x) {
            g.require_vertex(x);
            return std::vector<Vertex>(g.neighbors(x).begin(), g.neighbors(x).end());
        })
        .def("weight", &WeightedGraph::weight)
        .def("without_frontier", &WeightedGraph::without_frontier)
        .def("scaled", &WeightedGraph::scaled)
        .def("to_hkgraph", [](const WeightedGraph& g) { return to_hkgraph(g); });

    m.def("parse_hkgraph", [](const std::string& text) { return parse_hkgraph(text); });
    m.def("read_graph", [](const std::filesystem::path& p) { return read_graph(p); });
    m.def("generate", [](const std::string& spec_json) {
        return generate(generator_spec_from_json(nlohmann::json::parse(spec_json)));
    }, py::arg("spec_json"));

    m.def("ball", [](const WeightedGraph& g, Vertex x, int R) {
        auto b = ball(g, x, R);
        return std::vector<Vertex>(b.members().begin(), b.members().end());
    });
    m.def("volume", &volume);
    m.def("annulus_volume", &annulus_volume);
    m.def("safe_radius", &safe_radius);
    m.def("distances", [](const WeightedGraph& g, Vertex x) { return distance_field(g, x).dist; });

    m.def("exit_time", [](const WeightedGraph& g, Vertex x, int R) { return mean_exit_field(g, x, R).at_center(); });
    m.def("exit_field", [](const WeightedGraph& g, Vertex x, int R) {
        auto f = mean_exit_field(g, x, R);
        std::map<Vertex, double> out;
        for (std::size_t i = 0; i < f.members.size(); ++i) out[f.members[i]] = f.values[i];
        return out;
    });
    m.def("exit_time_inverse", [](const WeightedGraph& g, Vertex x, double n) { return exit_time_inverse(g, x, n); });
    m.def("mc_exit_time", [](const WeightedGraph& g, Vertex x, int R, long walks, std::uint64_t seed) {
        auto r = mc_exit_time(g, x, R, walks, seed);
        return py::dict(py::arg("mean") = r.mean, py::arg("std_error") = r.std_error,
                        py::arg("walks") = r.walks, py::arg("censored") = r.censored);
    }, py::arg("g"), py::arg("x"), py::arg("R"), py::arg("walks"), py::arg("seed"));
    m.def("heat_kernel_diagonal", [](const WeightedGraph& g, Vertex x, int n_max) {
        HeatStepper s(g, x);
        std::vector<double> out{s.kernel(x)};
        for (int k = 1; k <= n_max; ++k) {
            s.step();
            out.push_back(s.kernel(x));
        }
        return out;
    });

    m.def("annulus_resistance", &annulus_resistance);
    m.def("effective_resistance", [](const WeightedGraph& g, std::vector<Vertex> A, std::vector<Vertex> B) {
        return effective_resistance(g, VertexSet(g, std::move(A)), VertexSet(g, std::move(B)));
    });
    m.def("smallest_eigenvalue", [](const WeightedGraph& g, std::vector<Vertex> B) {
        return smallest_eigenvalue(g, VertexSet(g, std::move(B))).value;
    });
    m.def("green_kernel", [](const WeightedGraph& g, std::vector<Vertex> B, Vertex y, Vertex z) {
        GreenOperator op(g, VertexSet(g, std::move(B)));
        return op.kernel(y, z);
    });

    m.def("checker_names", &checker_names);
    m.def("check", [](const WeightedGraph& g, const std::string& name, const std::string& grid_json, std::uint64_t seed,
                      int threads) {
        Workspace ws(g);
        Grid grid = grid_from(ws, grid_json, seed);
        CheckOptions opt;
        opt.seed = seed;
        opt.threads = threads;
        py::gil_scoped_release release;
        return run_checker(name, ws, grid, opt).to_json().dump();
    }, py::arg("g"), py::arg("name"), py::arg("grid_json") = "", py::arg("seed") = 1, py::arg("threads") = 1);
}
