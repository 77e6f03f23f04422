#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>

#include "carfollow/analysis.hpp"
#include "carfollow/controller.hpp"
#include "carfollow/errors.hpp"
#include "carfollow/shaping.hpp"
#include "carfollow/sim.hpp"

namespace py = pybind11;
using namespace carfollow;

namespace {

py::dict trace_to_dict(const sim::SimTrace& tr)
{
    py::dict d;
    d["scenario"] = tr.scenario;
    d["dt"] = tr.dt;
    const std::pair<const char*, double sim::TraceRow::*> cols[] = {
        {"t", &sim::TraceRow::t},         {"h", &sim::TraceRow::h},       {"h_des", &sim::TraceRow::h_des},
        {"v_P", &sim::TraceRow::v_P},     {"v_F", &sim::TraceRow::v_F},   {"v_des", &sim::TraceRow::v_des},
        {"S", &sim::TraceRow::S},         {"a_des", &sim::TraceRow::a_des}, {"a_fb", &sim::TraceRow::a_fb},
        {"a_fb_bar", &sim::TraceRow::a_fb_bar}, {"a_cf", &sim::TraceRow::a_cf}, {"u", &sim::TraceRow::u},
        {"a_F", &sim::TraceRow::a_F},
    };
    for (const auto& [name, field] : cols) {
        d[name] = tr.column(field);
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Nonlinear car-following controller";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<LookupError>(m, "ScenarioLookupError", PyExc_KeyError);
    py::register_exception<OracleError>(m, "OracleError", PyExc_RuntimeError);

    py::class_<control::ControllerParams>(m, "ControllerParams")
        .def(py::init<>())
        .def_readwrite("h0", &control::ControllerParams::h0)
        .def_readwrite("t_h", &control::ControllerParams::t_h)
        .def_readwrite("h_min", &control::ControllerParams::h_min)
        .def_readwrite("eps", &control::ControllerParams::eps)
        .def_readwrite("v_max", &control::ControllerParams::v_max)
        .def_readwrite("c", &control::ControllerParams::c)
        .def_readwrite("a_sat", &control::ControllerParams::a_sat)
        .def_readwrite("a_min", &control::ControllerParams::a_min)
        .def_readwrite("a_com", &control::ControllerParams::a_com)
        .def_readwrite("k1", &control::ControllerParams::k1)
        .def_readwrite("k2", &control::ControllerParams::k2)
        .def_readwrite("k_i", &control::ControllerParams::k_i)
        .def("validate", &control::ControllerParams::validate)
        .def("__eq__", [](const control::ControllerParams& a, const control::ControllerParams& b) { return a == b; });

    m.def("wrapper", &shaping::wrapper, py::arg("x"));
    m.def(
        "shaper", [](double x, double b, double c) { return shaping::shaper(x, {b, c}); }, py::arg("x"),
        py::arg("b") = 0.5, py::arg("c") = 1.0);
    m.def(
        "shaper_inverse", [](double y, double b, double c) { return shaping::shaper_inverse(y, {b, c}); },
        py::arg("y"), py::arg("b") = 0.5, py::arg("c") = 1.0);

    m.def(
        "control",
        [](const control::ControllerParams& p, double h, double v_P, double v_F, const std::string& kind,
           const std::string& policy) {
            const auto out = control::evaluate(p, control::parse_controller_kind(kind),
                                               control::parse_range_policy(policy), {h, v_P, v_F});
            py::dict d;
            d["a_des"] = out.a_des;
            d["a_cf"] = out.a_cf;
            d["a_fb"] = out.a_fb;
            d["a_fb_bar"] = out.a_fb_bar;
            d["S"] = out.S;
            d["v_des"] = out.v_des;
            d["h_des"] = out.h_des;
            return d;
        },
        py::arg("params"), py::arg("h"), py::arg("v_P"), py::arg("v_F"), py::arg("kind") = "nonlinear",
        py::arg("policy") = "predecessor");

    m.def(
        "eigenvalues",
        [](double k1, double k2, double t_h) {
            const auto ev = analysis::eigenvalues(analysis::linearize(k1, k2, t_h));
            return std::vector<std::complex<double>>(ev.begin(), ev.end());
        },
        py::arg("k1"), py::arg("k2"), py::arg("t_h"));
    m.def("string_stable", &analysis::string_stable, py::arg("k1"), py::arg("k2"), py::arg("t_h"));
    m.def("magnitude_M", &analysis::magnitude_M, py::arg("k1"), py::arg("k2"), py::arg("t_h"), py::arg("omega"));
    m.def("magnitude_M1", &analysis::magnitude_M1, py::arg("k1"), py::arg("k2"), py::arg("t_h"), py::arg("omega"));
    m.def(
        "count_string_stable",
        [](double t_h, std::size_t grid, double lo, double hi) {
            analysis::SweepSpec spec;
            spec.headways = {t_h};
            spec.grid = grid;
            spec.k1_lo = spec.k2_lo = lo;
            spec.k1_hi = spec.k2_hi = hi;
            const auto cells = analysis::sweep_stability(spec);
            return analysis::count_string_stable(cells, t_h);
        },
        py::arg("t_h"), py::arg("grid") = 200, py::arg("lo") = 0.02, py::arg("hi") = 4.0);

    m.def("scenario_names", &sim::builtin_scenario_names);
    m.def(
        "simulate",
        [](const std::string& name) {
            const auto sc = sim::find_scenario(name);
            sim::SimTrace tr;
            {
                py::gil_scoped_release release;
                tr = sim::run(sc);
            }
            return trace_to_dict(tr);
        },
        py::arg("scenario"));
}
