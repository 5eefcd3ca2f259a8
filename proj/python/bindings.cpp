#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/expansion.hpp"
#include "gibbsinv/gcmc.hpp"
#include "gibbsinv/packing.hpp"
#include "gibbsinv/solver.hpp"
#include "gibbsinv/ursell.hpp"

namespace py = pybind11;
using namespace gibbsinv;

namespace {

Configuration to_points(const std::vector<std::vector<double>>& xs) {
    Configuration out;
    for (const auto& x : xs) {
        Point p{0.0, 0.0, 0.0};
        for (std::size_t c = 0; c < x.size() && c < 3; ++c) p[c] = x[c];
        out.push_back(p);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_gibbsinv, m) {
    m.doc() = "Inverse problem for hard-core Gibbs point processes";

    py::register_exception<Error>(m, "Error");
    py::register_exception<NonPhysical>(m, "NonPhysical");
    py::register_exception<SmallnessGuard>(m, "SmallnessGuard");
    py::register_exception<NoConvergence>(m, "NoConvergence");
    py::register_exception<Inadmissible>(m, "Inadmissible");

    py::class_<RadialFunction>(m, "RadialFunction")
        .def(py::init<int, double, double, std::vector<double>, double>(), py::arg("dim"), py::arg("delta"),
             py::arg("r_max"), py::arg("values"), py::arg("core_value"))
        .def_static("zeros", &RadialFunction::zeros)
        .def_property_readonly("dim", &RadialFunction::dim)
        .def_property_readonly("delta", &RadialFunction::delta)
        .def_property_readonly("r_max", &RadialFunction::r_max)
        .def_property_readonly("core_value", &RadialFunction::core_value)
        .def_property_readonly("values", [](const RadialFunction& f) {
            return std::vector<double>(f.values().begin(), f.values().end());
        })
        .def("bin_centers", &RadialFunction::bin_centers)
        .def("at_radius", &RadialFunction::at_radius)
        .def("__len__", &RadialFunction::size);

    m.def("pure_hard_core", [](int dim, double delta, double r_max) {
        return HardCorePotential::pure(dim, delta, r_max).g();
    }, py::arg("dim") = 1, py::arg("delta") = 0.05, py::arg("r_max") = 8.0);
    m.def("g_to_phi", &g_to_phi);
    m.def("phi_to_g", &phi_to_g);
    m.def("packing_norm", [](const RadialFunction& f) {
        const auto b = packing_norm(f);
        return py::make_tuple(b.lower, b.upper);
    });

    m.def("ursell_direct", [](const RadialFunction& g, const std::vector<std::vector<double>>& xs) {
        const auto pts = to_points(xs);
        return ursell_direct(g, pts);
    });
    m.def("ursell_recurrence", [](const RadialFunction& g, const std::vector<std::vector<double>>& x,
                                  const std::vector<std::vector<double>>& y) {
        const auto px = to_points(x);
        const auto py_ = to_points(y);
        return ursell_recurrence(g, px, py_);
    });

    m.def("integrate_ursell_a", [](const RadialFunction& g, int n) {
        const auto e = integrate_ursell_a(g, n, QuadratureSpec{});
        return py::make_tuple(e.value, e.error);
    });

    m.def("forward", [](double z, const RadialFunction& g, int order) {
        const ForwardResult f = forward_cluster(z, g, order, QuadratureSpec{});
        py::dict d;
        d["omega1"] = f.omega1;
        d["rho1"] = f.rho1;
        d["omega2"] = f.omega2;
        d["rho2"] = f.rho2;
        d["guard_value"] = f.guard_value;
        return d;
    }, py::arg("z"), py::arg("g"), py::arg("order") = 4);

    m.def("solve", [](double rho1, const RadialFunction& rho2, double r, int order, double tol, int max_iter) {
        SolveOptions opts;
        opts.order = order;
        opts.tol = tol;
        opts.max_iter = max_iter;
        const SolveResult res = solve_inverse(correlation_to_cluster(rho1, rho2, r), r, opts);
        py::dict d;
        d["z"] = res.z;
        d["phi"] = res.phi;
        d["g"] = res.g;
        d["iterations"] = res.trace.back().iteration;
        d["in_domain"] = res.all_iterates_in_domain;
        return d;
    }, py::arg("rho1"), py::arg("rho2"), py::arg("r") = 0.5, py::arg("order") = 3, py::arg("tol") = 1e-10,
       py::arg("max_iter") = 30);

    m.def("exact_rod_density", &exact_rod_density, py::arg("z"), py::arg("L"));
    m.def("exact_ring_density", &exact_ring_density, py::arg("z"), py::arg("L"));

    m.def("simulate", [](double z, const RadialFunction& g, double box, bool periodic, std::uint64_t sweeps,
                         std::uint64_t seed) {
        SimulationConfig cfg;
        cfg.dim = g.dim();
        cfg.z = z;
        cfg.g = g;
        cfg.box = box;
        cfg.boundary = periodic ? Boundary::periodic : Boundary::free;
        cfg.sweeps = sweeps;
        cfg.seed = seed;
        const SimulationResult s = simulate(cfg);
        return py::make_tuple(s.rho1, s.rho1_sigma);
    }, py::arg("z"), py::arg("g"), py::arg("box"), py::arg("periodic") = true, py::arg("sweeps") = 20000,
       py::arg("seed") = 1);
}
