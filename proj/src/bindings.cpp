// Python surface: the numeric kernels plus the file-driven pipeline stages.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "proce/metrics.hpp"
#include "proce/moo.hpp"
#include "proce/nn.hpp"
#include "proce/pipeline.hpp"
#include "proce/version.hpp"

namespace py = pybind11;

namespace {

using proce::Json;

proce::ObjectiveVector to_objectives(const std::array<double, 3>& v) {
  proce::ObjectiveVector o;
  o.pred = v[0];
  o.proto = v[1];
  o.dist_final = v[2];
  return o;
}

proce::Population to_population(
    const std::vector<std::array<double, 3>>& objectives) {
  proce::Population pop;
  pop.members.reserve(objectives.size());
  for (const auto& v : objectives) {
    proce::Candidate c;
    c.objectives = to_objectives(v);
    pop.members.push_back(std::move(c));
  }
  return pop;
}

py::dict ttest_dict(const proce::TTestResult& r) {
  py::dict d;
  d["t"] = r.t;
  d["df"] = r.df;
  d["p"] = r.p;
  d["degenerate"] = r.degenerate;
  return d;
}

Json echo_for(const char* command) {
  return Json{{"command", std::string("python:") + command},
              {"tool_version", proce::kVersion}};
}

}  // namespace

PYBIND11_MODULE(_proce, m) {
  m.doc() = "Causality-preserving counterfactual explanations";
  m.attr("__version__") = proce::kVersion;

  // Numeric kernels.
  m.def("sigmoid", &proce::sigmoid, py::arg("z"),
        "Numerically stable logistic function with outputs in open (0,1)");
  m.def("cross_entropy", &proce::cross_entropy, py::arg("p"), py::arg("y"),
        "Binary cross-entropy with probability clamping");
  m.def(
      "dominates",
      [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return proce::dominates(to_objectives(a), to_objectives(b));
      },
      py::arg("a"), py::arg("b"),
      "Pareto dominance over minimized objective triples");
  m.def(
      "non_dominated_sort",
      [](const std::vector<std::array<double, 3>>& objectives) {
        return proce::non_dominated_sort(to_population(objectives)).fronts;
      },
      py::arg("objectives"),
      "Front partition as index lists, best front first");
  m.def(
      "crowding_distance",
      [](const std::vector<std::array<double, 3>>& objectives,
         const std::vector<std::size_t>& front, bool standard) {
        return proce::crowding_distance(to_population(objectives), front,
                                        standard);
      },
      py::arg("objectives"), py::arg("front"), py::arg("standard") = false,
      "Crowding distances for one front (nearest-pair form by default)");
  m.def(
      "paired_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return ttest_dict(proce::paired_t_test(a, b));
      },
      py::arg("a"), py::arg("b"), "Two-sided paired Student t-test");
  m.def("student_t_two_sided_p", &proce::student_t_two_sided_p, py::arg("t"),
        py::arg("df"), "Two-sided tail probability of the t distribution");
  m.def("incomplete_beta", &proce::incomplete_beta, py::arg("a"), py::arg("b"),
        py::arg("x"), "Regularized incomplete beta I_x(a, b)");

  // Pipeline stages; every argument mirrors the CLI flag of the same name.
  m.def(
      "gen_simple_bn",
      [](const std::string& out, std::size_t n, std::uint64_t seed) {
        proce::GenSimpleBnOptions opts;
        opts.out_csv = out;
        opts.n = n;
        opts.seed = seed;
        const proce::GenSimpleBnResult r =
            proce::run_gen_simple_bn(opts, echo_for("gen_simple_bn"));
        py::dict d;
        d["csv"] = r.csv_path;
        d["schema"] = r.schema_path;
        d["graph"] = r.graph_path;
        d["n"] = r.n;
        d["positive_fraction"] = r.positive_fraction;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("out"), py::arg("n") = 10000, py::arg("seed") = 0);
  m.def(
      "train",
      [](const std::string& data, const std::string& schema,
         const std::string& out, const std::string& preset,
         std::size_t embedding_dim, std::size_t classifier_epochs,
         std::size_t ae_epochs, std::uint64_t seed) {
        proce::TrainOptions opts;
        opts.data_csv = data;
        opts.schema_path = schema;
        opts.out_dir = out;
        opts.preset = proce::classifier_preset_from_name(preset);
        opts.embedding_dim = embedding_dim;
        opts.classifier_epochs = classifier_epochs;
        opts.ae_epochs = ae_epochs;
        opts.seed = seed;
        const proce::TrainSummary s = proce::run_train(opts, echo_for("train"));
        py::dict d;
        d["train_rows"] = s.train_rows;
        d["test_rows"] = s.test_rows;
        d["train_accuracy"] = s.train_accuracy;
        d["test_accuracy"] = s.test_accuracy;
        return d;
      },
      py::arg("data"), py::arg("schema"), py::arg("out"),
      py::arg("preset") = "net3", py::arg("embedding_dim") = 256,
      py::arg("classifier_epochs") = 150, py::arg("ae_epochs") = 60,
      py::arg("seed") = 0);
  m.def(
      "fit_scm",
      [](const std::string& data, const std::string& graph,
         const std::string& out, const std::string& schema,
         const std::string& bundle) {
        proce::FitScmOptions opts;
        opts.data_csv = data;
        opts.graph_path = graph;
        opts.out_path = out;
        opts.schema_path = schema;
        opts.bundle_dir = bundle;
        const proce::StructuralModel model =
            proce::run_fit_scm(opts, echo_for("fit_scm"));
        py::dict d;
        py::list eqs;
        for (const proce::StructuralEquation& eq : model.equations) {
          py::dict e;
          e["child"] = eq.child;
          e["parents"] = eq.parents;
          e["r_squared"] = eq.r_squared;
          eqs.append(e);
        }
        d["equations"] = eqs;
        d["warnings"] = model.warnings;
        return d;
      },
      py::arg("data"), py::arg("graph"), py::arg("out"),
      py::arg("schema") = std::string(), py::arg("bundle") = std::string());
  m.def(
      "explain",
      [](const std::string& bundle, const std::string& scm,
         const std::string& out, std::size_t count,
         const std::vector<std::size_t>& indices, std::size_t generations,
         std::size_t population, std::size_t k_neighbors, std::uint64_t seed,
         std::size_t jobs) {
        proce::ExplainOptions opts;
        opts.bundle_dir = bundle;
        opts.scm_path = scm;
        opts.out_dir = out;
        opts.count = count;
        opts.indices = indices;
        opts.ga.generations = generations;
        opts.ga.population_size = population;
        opts.k_neighbors = k_neighbors;
        opts.ga.seed = seed;
        opts.jobs = jobs;
        const proce::ExplainSummary s =
            proce::run_explain(opts, echo_for("explain"));
        py::dict d;
        d["total"] = s.total;
        d["valid"] = s.valid;
        d["mean_runtime_seconds"] = s.mean_runtime_seconds;
        d["reports"] = s.report_paths;
        return d;
      },
      py::arg("bundle"), py::arg("scm"), py::arg("out"), py::arg("count") = 0,
      py::arg("indices") = std::vector<std::size_t>{},
      py::arg("generations") = 100, py::arg("population") = 100,
      py::arg("k_neighbors") = 25, py::arg("seed") = 0, py::arg("jobs") = 1);
  m.def(
      "evaluate",
      [](const std::string& reports, const std::string& bundle,
         const std::string& out, const std::string& constraints,
         const std::string& compare, const std::string& method,
         const std::string& dataset) {
        proce::EvaluateOptions opts;
        opts.reports_dir = reports;
        opts.bundle_dir = bundle;
        opts.out_csv = out;
        opts.constraints_path = constraints;
        opts.compare_path = compare;
        opts.method_tag = method;
        opts.dataset_tag = dataset;
        const proce::EvaluateSummary s =
            proce::run_evaluate(opts, echo_for("evaluate"));
        py::dict d;
        d["n"] = s.metrics.n;
        d["tcv"] = s.metrics.tcv;
        d["ccv"] = s.metrics.ccv;
        d["cat_proximity"] = s.metrics.cat_prox;
        d["con_proximity"] = s.metrics.con_prox;
        d["im1"] = s.metrics.im1;
        d["im2"] = s.metrics.im2;
        d["im2_x10"] = s.metrics.im2_x10;
        d["csv"] = s.csv_path;
        d["json"] = s.json_path;
        py::list comparisons;
        for (const proce::MetricComparison& c : s.comparisons) {
          py::dict e;
          e["metric"] = c.metric;
          e["test"] = ttest_dict(c.test);
          comparisons.append(e);
        }
        d["comparisons"] = comparisons;
        return d;
      },
      py::arg("reports"), py::arg("bundle"), py::arg("out"),
      py::arg("constraints") = std::string(),
      py::arg("compare") = std::string(), py::arg("method") = "proce",
      py::arg("dataset") = "data");
}
