#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "subrct/design_math.hpp"
#include "subrct/driver.hpp"
#include "subrct/errors.hpp"
#include "subrct/report.hpp"
#include "subrct/variance.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Design-based subgroup analysis for randomized trials";
    m.attr("__version__") = subrct::kVersion;

    py::register_exception<subrct::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<subrct::ParseError>(m, "DataParseError", PyExc_ValueError);
    py::register_exception<subrct::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<subrct::EstimationError>(m, "EstimationError", PyExc_RuntimeError);

    py::class_<subrct::AnalyzeArtifacts>(m, "AnalyzeArtifacts")
        .def_readonly("json", &subrct::AnalyzeArtifacts::json)
        .def_readonly("csv", &subrct::AnalyzeArtifacts::csv)
        .def_readonly("format", &subrct::AnalyzeArtifacts::format);

    py::class_<subrct::SimulateArtifacts>(m, "SimulateArtifacts")
        .def_readonly("csv", &subrct::SimulateArtifacts::csv)
        .def_readonly("json", &subrct::SimulateArtifacts::json);

    py::class_<subrct::ProbeArtifacts>(m, "ProbeArtifacts")
        .def_readonly("panel_a", &subrct::ProbeArtifacts::panel_a)
        .def_readonly("panel_b", &subrct::ProbeArtifacts::panel_b)
        .def_readonly("summary", &subrct::ProbeArtifacts::summary);

    m.def("analyze", &subrct::analyze_from_text,
          py::arg("csv_text"), py::arg("config_text"), py::arg("data_label") = "<memory>",
          "Estimate subgroup effects from CSV text and a key=value config");
    m.def("simulate", &subrct::simulate_from_text,
          py::arg("config_text"), py::arg("threads") = 0,
          "Run the Monte Carlo study described by a key=value config");
    m.def("probe", &subrct::probe_from_text,
          py::arg("config_text") = "",
          "Evaluate the design-math curves (empty config for the defaults)");

    m.def("split_probability",
          [](long long n, long long n1, long long n_k) {
              return subrct::design_math::split_probability({n, n1, n_k});
          },
          py::arg("n"), py::arg("n1"), py::arg("n_k"),
          "P(both arms of a size-n_k subgroup are non-empty)");
    m.def("expected_inverse_arm_size",
          [](long long n, long long n1, long long n_k, int arm) {
              return subrct::design_math::expected_inverse_arm_size({n, n1, n_k}, arm);
          },
          py::arg("n"), py::arg("n1"), py::arg("n_k"), py::arg("arm"),
          "E(1 / subgroup arm count), conditioned on both arms non-empty");
    m.def("phi_correction", &subrct::design_math::phi_correction,
          py::arg("n_k"), py::arg("pi_k"),
          "Small-sample inflation factor (n_k - 1) / (n_k - pi_k)");
    m.def("se_ratio_actual_vs_expected",
          &subrct::design_math::se_ratio_actual_vs_expected,
          py::arg("n_k"), py::arg("p"), py::arg("delta1"),
          py::arg("phi_var"), py::arg("theta_het"),
          "SE at realized arm sizes over SE at expected arm sizes");
    m.def("bell_mccaffrey_df", &subrct::bell_mccaffrey_df,
          py::arg("n1"), py::arg("n0"), py::arg("v"), py::arg("p"),
          py::arg("pi1"), py::arg("pi0"),
          "Welch-style df for the two-arm comparison");
}
