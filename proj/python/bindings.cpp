// Copyright 2026 The shardrisk Authors.
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
#include <vector>

#include "shardrisk/cli.hpp"
#include "shardrisk/failure.hpp"
#include "shardrisk/partitions.hpp"
#include "shardrisk/probcore.hpp"
#include "shardrisk/saddle.hpp"
#include "shardrisk/simulate.hpp"
#include "shardrisk/sizing.hpp"

namespace py = pybind11;
using namespace shardrisk;

namespace {

// "1/3", "0.25" or a number.
Rate to_rate(const py::object& v) {
  if (py::isinstance<py::str>(v)) return Rate::parse(v.cast<std::string>());
  if (py::isinstance<py::int_>(v)) return Rate::fraction(v.cast<std::int64_t>(), 1);
  return Rate::of(v.cast<double>());
}

CommitteeLayout to_layout(const std::vector<std::int64_t>& sizes) { return CommitteeLayout(sizes); }

FailureQuery average_query(const std::vector<std::int64_t>& sizes, const py::object& p,
                           const py::object& threshold) {
  return FailureQuery{to_layout(sizes), AverageAdversary::uniform(to_rate(p)), to_rate(threshold)};
}

FailureQuery exact_query(const std::vector<std::int64_t>& sizes, std::int64_t m,
                         const py::object& threshold) {
  return FailureQuery{to_layout(sizes), ExactAdversary{m}, to_rate(threshold)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Failure probabilities of random committee partitions";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<DeltaResult>(m, "DeltaResult")
      .def_readonly("delta", &DeltaResult::delta)
      .def_readonly("log_delta", &DeltaResult::log_delta)
      .def_readonly("log_survival", &DeltaResult::log_survival)
      .def_property_readonly("method", [](const DeltaResult& r) { return std::string(method_tag(r.method)); })
      .def_property_readonly("clamped", [](const DeltaResult& r) { return r.diagnostics.clamped; })
      .def_property_readonly("precondition_satisfied",
                             [](const DeltaResult& r) { return r.diagnostics.precondition_satisfied; })
      .def_property_readonly("raw_log_value", [](const DeltaResult& r) { return r.diagnostics.raw_log_value; })
      .def_property_readonly("excluded_committees",
                             [](const DeltaResult& r) { return r.diagnostics.excluded_committees; })
      .def("__repr__", [](const DeltaResult& r) {
        std::ostringstream s;
        s.precision(17);
        s << "DeltaResult(method='" << method_tag(r.method) << "', delta=" << r.delta << ")";
        return s.str();
      });

  m.def("split_layout", [](std::int64_t nodes, std::int64_t committees) {
    const auto l = CommitteeLayout::from_split(nodes, committees);
    return std::vector<std::int64_t>(l.sizes().begin(), l.sizes().end());
  }, py::arg("nodes"), py::arg("committees"));

  m.def("delta_exact_binomial",
        [](const std::vector<std::int64_t>& sizes, const py::object& p, const py::object& threshold) {
          return delta_exact_binomial(average_query(sizes, p, threshold));
        },
        py::arg("sizes"), py::arg("adversary_frac"), py::arg("threshold"));

  m.def("delta_exact_hypergeometric",
        [](const std::vector<std::int64_t>& sizes, std::int64_t adversaries, const py::object& threshold) {
          return delta_exact_hypergeometric(exact_query(sizes, adversaries, threshold));
        },
        py::arg("sizes"), py::arg("adversaries"), py::arg("threshold"));

  m.def("theorem1_bounds",
        [](const std::vector<std::int64_t>& sizes, const py::object& p, const py::object& threshold) {
          const auto b = theorem1_bounds(average_query(sizes, p, threshold));
          py::dict d;
          d["lower"] = b.lower;
          d["upper_ferrante"] = b.upper_ferrante;
          d["upper_ash"] = b.upper_ash;
          return d;
        },
        py::arg("sizes"), py::arg("adversary_frac"), py::arg("threshold"));

  m.def("union_bound_fixed_sizes",
        [](const std::vector<std::int64_t>& sizes, const py::object& p, const py::object& threshold) {
          return union_bound_fixed_sizes(average_query(sizes, p, threshold));
        },
        py::arg("sizes"), py::arg("adversary_frac"), py::arg("threshold"));

  m.def("delta_asymptotic",
        [](const std::vector<std::int64_t>& sizes, std::int64_t adversaries, const py::object& threshold) {
          SaddleSolution sol;
          const CommitteeLayout layout = to_layout(sizes);
          const DeltaResult r = delta_asymptotic(layout, adversaries, to_rate(threshold), sol);
          py::dict d;
          d["result"] = r;
          d["q"] = sol.q;
          d["psi"] = sol.psi;
          d["variance_sum"] = sol.variance_sum;
          d["mean_residual"] = sol.mean_residual;
          d["converged"] = sol.converged;
          return d;
        },
        py::arg("sizes"), py::arg("adversaries"), py::arg("threshold"));

  m.def("max_committees",
        [](std::int64_t nodes, const py::object& delta, const py::object& threshold, const py::object& p) {
          const SizingResult r = max_committees(nodes, to_rate(delta), to_rate(threshold), to_rate(p));
          py::dict d;
          d["K"] = r.K;
          d["n"] = r.n;
          d["r"] = r.r;
          d["prob"] = r.prob;
          d["iterations"] = r.iterations;
          return d;
        },
        py::arg("nodes"), py::arg("delta"), py::arg("threshold"), py::arg("adversary_frac"));

  m.def("min_committee_size",
        [](std::int64_t committees, const py::object& delta, const py::object& threshold, const py::object& p,
           const std::string& model) {
          if (model != "average" && model != "exact") throw DomainError("model must be average or exact");
          const MinSizeResult r =
              min_committee_size(committees, to_rate(delta), to_rate(threshold), to_rate(p),
                                 model == "exact" ? AdversaryMode::kExact : AdversaryMode::kAverage);
          py::dict d;
          d["n"] = r.n;
          d["raw_n"] = r.raw_n;
          d["delta"] = r.delta;
          d["method"] = std::string(method_tag(r.method));
          return d;
        },
        py::arg("committees"), py::arg("delta"), py::arg("threshold"), py::arg("adversary_frac"),
        py::arg("model") = "average");

  m.def("size_bracket",
        [](std::int64_t committees, const py::object& delta, const py::object& threshold, const py::object& p) {
          const SizeBracket b = size_bracket(committees, to_rate(delta), to_rate(threshold), to_rate(p));
          return py::make_tuple(b.lower, b.upper);
        },
        py::arg("committees"), py::arg("delta"), py::arg("threshold"), py::arg("adversary_frac"));

  m.def("estimate_delta",
        [](const std::vector<std::int64_t>& sizes, const py::object& threshold, const py::object& adversary_frac,
           const py::object& adversaries, std::int64_t samples, std::uint64_t seed, int workers) {
          if (adversary_frac.is_none() == adversaries.is_none()) {
            throw DomainError("give exactly one of adversary_frac and adversaries");
          }
          SimulationPlan plan{adversaries.is_none()
                                  ? average_query(sizes, adversary_frac, threshold)
                                  : exact_query(sizes, adversaries.cast<std::int64_t>(), threshold),
                              samples, seed, workers};
          DeltaEstimate e;
          {
            py::gil_scoped_release release;
            e = estimate_delta(plan);
          }
          py::dict d;
          d["failures"] = e.failures;
          d["samples"] = e.samples;
          d["delta_hat"] = e.delta_hat;
          d["std_error"] = e.std_error;
          d["ci"] = py::make_tuple(e.ci_low, e.ci_high);
          return d;
        },
        py::arg("sizes"), py::arg("threshold"), py::arg("adversary_frac") = py::none(),
        py::arg("adversaries") = py::none(), py::arg("samples") = 100000, py::arg("seed") = 0,
        py::arg("workers") = 1);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out;
          std::ostringstream err;
          const int code = cli::run(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one command-line invocation; returns (exit_code, stdout, stderr).");
}
