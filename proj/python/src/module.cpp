// Copyright 2026 The platoon-dp Authors
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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "json.hpp"
#include "platoon/arrivals.hpp"
#include "platoon/commands.hpp"
#include "platoon/cost_model.hpp"
#include "platoon/errors.hpp"
#include "platoon/poisson_solver.hpp"
#include "platoon/serialization.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Config and results cross the boundary as JSON text; the Python side wraps
// them in dicts.
json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw platoon::ConfigError(e.what());
  }
}

platoon::RunConfig config_from(const std::string& text) {
  platoon::RunConfig config;
  config.merge_json(parse(text));
  return config;
}

platoon::CostParams params_from(const std::string& text) {
  return platoon::CostParams::from_json(parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of platoon_dp";
  m.attr("__version__") = PLATOON_DP_VERSION;

  py::register_exception<platoon::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<platoon::NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<platoon::DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("constants", [](const std::string& params) {
    const auto k = platoon::compute_constants(params_from(params));
    return py::dict(py::arg("t0") = k.t0, py::arg("c_n") = k.c_n, py::arg("g0") = k.g0,
                    py::arg("theta_n") = k.theta_n, py::arg("theta_n_prime") = k.theta_n_prime);
  });
  m.def("reward_merge", [](double s, const std::string& params) {
    return platoon::reward_merge(s, params_from(params));
  });
  m.def("reward_cruise", [](double a, const std::string& params) {
    return platoon::reward_cruise(a, params_from(params));
  });
  m.def("poisson_residuals", [](double theta, double c, double lambda, const std::string& params) {
    const auto p = params_from(params);
    const auto r = platoon::poisson_residuals(theta, c, lambda, p, platoon::compute_constants(p));
    return py::make_tuple(r.r1, r.r2);
  });
  m.def("closed_form_value", [](double s, double lambda, const std::string& params) {
    const auto p = params_from(params);
    const auto k = platoon::compute_constants(p);
    return platoon::closed_form_value(s, platoon::solve_poisson(lambda, p, k), p, k);
  });

  m.def("solve", [](const std::string& config) { return platoon::cmd_solve(config_from(config)).dump(); });
  m.def("simulate", [](const std::string& config, bool vehicles) {
    auto out = platoon::cmd_simulate(config_from(config));
    std::string csv;
    if (vehicles) {
      std::ostringstream os;
      platoon::write_vehicle_csv(os, out.result);
      csv = os.str();
    }
    return py::make_tuple(out.summary.dump(), csv);
  });
  m.def("compare", [](const std::string& config) { return platoon::cmd_compare(config_from(config)); });
  m.def("sweep", [](const std::string& config) { return platoon::cmd_sweep(config_from(config)); });
  m.def("bench", [](const std::string& config) { return platoon::cmd_bench(config_from(config)); });
  m.def("config_hash", [](const std::string& config) { return config_from(config).hash(); });

  py::class_<platoon::RateEstimator>(m, "RateEstimator")
      .def(py::init<double, int>(), py::arg("beta") = 0.9, py::arg("window") = 50)
      .def("observe", &platoon::RateEstimator::observe)
      .def("estimate", &platoon::RateEstimator::estimate)
      .def_property_readonly("count", &platoon::RateEstimator::count);
}
