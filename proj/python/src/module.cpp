// Copyright 2026 The chainclock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chainclock/chain_model.hpp"
#include "chainclock/clock_metrics.hpp"
#include "chainclock/de_optimizer.hpp"
#include "chainclock/errors.hpp"
#include "chainclock/quench.hpp"
#include "chainclock/serialization.hpp"
#include "chainclock/spectral.hpp"
#include "chainclock/study.hpp"

namespace py = pybind11;
using namespace chainclock;

namespace {

// Structured results cross the boundary as JSON text; the Python package
// decodes them into dicts.
std::string dump(const io::Json& json) { return json.dump(); }

StatisticsWindow make_window(const std::string& mode, double value) {
  if (mode == "asymptotic") return StatisticsWindow::asymptotic();
  if (mode == "relative") return StatisticsWindow::relative(value);
  if (mode == "absolute") return StatisticsWindow::absolute(value);
  throw InvalidInput("window mode must be asymptotic, relative or absolute, got '" + mode + "'");
}

template <class F>
py::array_t<double> map_times(py::array_t<double, py::array::c_style | py::array::forcecast> t,
                              F&& f) {
  auto out = py::array_t<double>(t.request().shape);
  const auto in = t.data();
  auto dst = out.mutable_data();
  for (py::ssize_t i = 0; i < t.size(); ++i) dst[i] = f(in[i]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dissipative spin-chain clocks";

  auto base = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<UnsupportedInput>(m, "UnsupportedInput", base.ptr());
  auto numerical = py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
  py::register_exception<ImproperDistribution>(m, "ImproperDistribution", numerical.ptr());
  py::register_exception<NoTick>(m, "NoTick", numerical.ptr());
  py::register_exception<ResumeMismatch>(m, "ResumeMismatch", PyExc_RuntimeError);

  py::class_<ChainSpec>(m, "ChainSpec")
      .def(py::init([](std::vector<double> couplings, double gamma) {
             return ChainSpec(std::move(couplings), gamma);
           }),
           py::arg("couplings"), py::arg("gamma") = 1.0)
      .def_property_readonly("n_sites", &ChainSpec::n_sites)
      .def_property_readonly("couplings", &ChainSpec::couplings)
      .def_property_readonly("gamma", &ChainSpec::gamma)
      .def("effective_matrix", [](const ChainSpec& s) { return build_effective_matrix(s); })
      .def("__eq__", [](const ChainSpec& a, const ChainSpec& b) { return a == b; })
      .def("__repr__", [](const ChainSpec& s) {
        return "ChainSpec(n_sites=" + std::to_string(s.n_sites()) +
               ", gamma=" + std::to_string(s.gamma()) + ")";
      });

  m.def("pst_couplings", &pst_couplings, py::arg("n_sites"), py::arg("j0"));

  py::class_<EffectiveSpectrum>(m, "Spectrum")
      .def(py::init([](const ChainSpec& s) { return decompose_effective(s); }), py::arg("spec"))
      .def_property_readonly("eigenvalues",
                             [](const EffectiveSpectrum& s) { return s.eigenvalues; })
      .def_property_readonly("right_vectors",
                             [](const EffectiveSpectrum& s) { return s.right_vectors; })
      .def_readonly("degenerate", &EffectiveSpectrum::degenerate)
      .def_property_readonly("gamma", &EffectiveSpectrum::gamma)
      .def("survival",
           [](const EffectiveSpectrum& s, py::array_t<double> t) {
             if (s.degenerate) return map_times(t, [&](double x) { return survival(s, x); });
             const SurvivalKernel kernel(s);
             return map_times(t, kernel);
           },
           py::arg("t"))
      .def("tick_pdf",
           [](const EffectiveSpectrum& s, py::array_t<double> t) {
             return map_times(t, [&](double x) { return tick_pdf(s, x, s.gamma()); });
           },
           py::arg("t"))
      .def("tick_pdf_paired",
           [](const EffectiveSpectrum& s, py::array_t<double> t) {
             const PairedTickPdf pdf(s);
             return map_times(t, [&](double x) { return pdf(x, s.gamma()); });
           },
           py::arg("t"))
      .def("pairing_defects", [](const EffectiveSpectrum& s) {
        return py::dict(py::arg("eigenvalue") = eigenvalue_pairing_defect(s),
                        py::arg("eigenvector") = eigenvector_pairing_defect(s),
                        py::arg("biorthogonality") = biorthogonality_defect(s));
      });

  m.def(
      "tick_statistics_json",
      [](const ChainSpec& spec, const std::string& mode, double value) {
        return dump(io::to_json(tick_statistics(decompose_effective(spec), make_window(mode, value))));
      },
      py::arg("spec"), py::arg("mode") = "relative", py::arg("value") = 2.0);

  m.def("fidelity", &fidelity_direct, py::arg("spec"), py::arg("t"));

  m.def(
      "optimize_json",
      [](std::size_t n_sites, const std::string& config, std::size_t threads) {
        const auto c = io::de_config_from_json(io::Json::parse(config), "config");
        OptimizeOptions options;
        options.threads = threads;
        OptimizationResult result;
        {
          py::gil_scoped_release release;
          result = optimize(n_sites, c, options);
        }
        return dump(io::to_json(result));
      },
      py::arg("n_sites"), py::arg("config") = "{}", py::arg("threads") = 1);

  m.def(
      "quench_sweep_json",
      [](const ChainSpec& spec, std::vector<double> grid, std::size_t threads) {
        QuenchOptions options;
        options.threads = threads;
        QuenchSweep sweep;
        {
          py::gil_scoped_release release;
          sweep = grid.empty() ? sweep_quench(spec, options) : sweep_quench(spec, grid, options);
        }
        return dump(to_json(sweep));
      },
      py::arg("spec"), py::arg("grid") = std::vector<double>{}, py::arg("threads") = 1);

  m.def(
      "fit_power_law_json",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) throw InvalidInput("fit_power_law: x and y differ in length");
        std::vector<FitPoint> points;
        for (std::size_t i = 0; i < x.size(); ++i) points.push_back({x[i], y[i]});
        return dump(to_json(fit_power_law(points)));
      },
      py::arg("x"), py::arg("y"));
}
