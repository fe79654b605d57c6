// Python bindings for the main popgraph operations: cohort synthesis, graph
// construction, homophily, training/evaluation, the benchmark matrix, and
// graph export/layout.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "popgraph/benchmark.hpp"
#include "popgraph/builders.hpp"
#include "popgraph/cohort.hpp"
#include "popgraph/errors.hpp"
#include "popgraph/export.hpp"
#include "popgraph/metrics.hpp"
#include "popgraph/models.hpp"
#include "popgraph/synthetic.hpp"
#include "popgraph/train.hpp"

namespace py = pybind11;
using namespace popgraph;

namespace {

struct TrainedModel {
    ModelConfig config;
    ModelParams params;
    LabelStats stats;
};

py::dict degree_dict(const DegreeStats& d) {
    py::dict out;
    out["mean"] = d.mean;
    out["min"] = d.min;
    out["max"] = d.max;
    out["isolated"] = d.isolated;
    return out;
}

BuilderConfig builder_config(const std::string& method, std::size_t k, double mu, double theta,
                             double budget_min, double budget_max, std::size_t reference_n,
                             std::uint64_t seed) {
    BuilderConfig cfg;
    cfg.method = builder_from_name(method);
    cfg.k = k;
    cfg.mu = mu;
    cfg.theta = theta;
    cfg.edge_budget_min = budget_min;
    cfg.edge_budget_max = budget_max;
    cfg.reference_n = reference_n;
    cfg.seed = seed;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "population-graph construction and GNN benchmarks for age regression";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<Cohort>(m, "Cohort")
        .def_readonly("n", &Cohort::n)
        .def_readonly("age", &Cohort::age)
        .def_readonly("imaging", &Cohort::imaging)
        .def_readonly("phenotypes", &Cohort::phenotypes)
        .def_property_readonly("imaging_features",
                               [](const Cohort& c) { return c.schema.imaging_features; })
        .def_property_readonly("phenotype_names", [](const Cohort& c) {
            std::vector<std::string> names;
            for (const auto& [name, kind] : c.schema.phenotypes) names.push_back(name);
            return names;
        });

    py::class_<Split>(m, "Split")
        .def_readonly("train", &Split::train)
        .def_readonly("val", &Split::val)
        .def_readonly("test", &Split::test);

    py::class_<PopulationGraph>(m, "Graph")
        .def_readonly("n", &PopulationGraph::n)
        .def_readonly("edges", &PopulationGraph::edges)
        .def_readonly("weights", &PopulationGraph::weights)
        .def_readonly("labels", &PopulationGraph::labels)
        .def_readonly("builder", &PopulationGraph::builder)
        .def_property_readonly("edge_count", &PopulationGraph::edge_count);

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_property_readonly("arch",
                               [](const TrainedModel& t) {
                                   return std::string(architecture_name(t.config.arch));
                               })
        .def("evaluate",
             [](const TrainedModel& t, const PopulationGraph& g,
                const std::vector<std::size_t>& indices) {
                 const EvalResult r = evaluate(t.params, t.config, g, indices, t.stats);
                 return py::make_tuple(r.mae_years,
                                       r.r2 ? py::cast(*r.r2) : py::none());
             },
             py::arg("graph"), py::arg("indices"))
        .def("predict", [](const TrainedModel& t, const PopulationGraph& g) {
            const GraphOps ops = prepare_graph(t.config, g);
            std::vector<double> out = predict(t.config, t.params, ops, g);
            for (double& v : out) v = v * t.stats.stdev + t.stats.mean;
            return out;
        })
        .def("save", [](const TrainedModel& t, const std::string& path) {
            save_checkpoint(t.config, t.params, path);
        });

    m.def(
        "generate_synthetic",
        [](std::size_t n, std::size_t imaging_features, std::size_t categorical,
           std::size_t continuous, double snr, std::uint64_t seed) {
            SyntheticConfig cfg;
            cfg.n = n;
            cfg.imaging_features = imaging_features;
            cfg.categorical_phenotypes = categorical;
            cfg.continuous_phenotypes = continuous;
            cfg.snr = snr;
            cfg.seed = seed;
            return generate_synthetic(cfg);
        },
        py::arg("n") = 1000, py::arg("imaging_features") = 68, py::arg("categorical") = 8,
        py::arg("continuous") = 12, py::arg("snr") = 5.0, py::arg("seed") = 0);

    m.def(
        "load_cohort",
        [](const std::string& csv, const std::string& schema) {
            return load_cohort(csv, load_schema(schema));
        },
        py::arg("csv"), py::arg("schema"));

    m.def(
        "write_cohort",
        [](const Cohort& c, const std::string& csv, const std::string& schema) {
            write_cohort(c, csv);
            write_schema(c.schema, schema);
        },
        py::arg("cohort"), py::arg("csv"), py::arg("schema"));

    m.def(
        "split",
        [](std::size_t n, std::array<double, 3> fractions, std::uint64_t seed) {
            return split_cohort(n, fractions, seed);
        },
        py::arg("n"), py::arg("fractions") = std::array<double, 3>{0.75, 0.05, 0.20},
        py::arg("seed") = 0);

    m.def(
        "build_graph",
        [](const Cohort& cohort, const std::string& method, std::size_t k, double mu, double theta,
           double budget_min, double budget_max, std::size_t reference_n, std::uint64_t seed) {
            return build_graph(cohort, builder_config(method, k, mu, theta, budget_min, budget_max,
                                                      reference_n, seed));
        },
        py::arg("cohort"), py::arg("method") = "knn-imaging", py::arg("k") = 5,
        py::arg("mu") = 18.0, py::arg("theta") = 0.1, py::arg("budget_min") = 40000.0,
        py::arg("budget_max") = 50000.0, py::arg("reference_n") = 6500, py::arg("seed") = 0);

    m.def("homophily", [](const PopulationGraph& g) -> py::object {
        const auto h = homophily(g);
        return h ? py::cast(*h) : py::none();
    });

    m.def("degree_stats", [](const PopulationGraph& g) { return degree_dict(degree_stats(g)); });

    m.def("budget_edge_count", &budget_edge_count, py::arg("graph"));

    m.def(
        "train",
        [](const PopulationGraph& graph, const Split& split, const std::string& arch,
           std::size_t hidden, std::size_t fc, std::size_t cheb_order, std::size_t heads,
           double lr, std::size_t epochs, double weight_decay, const std::string& loss,
           std::uint64_t seed) {
            ModelConfig mc;
            mc.arch = architecture_from_name(arch);
            mc.hidden = hidden;
            mc.fc = fc;
            mc.cheb_order = cheb_order;
            mc.heads = heads;
            mc.seed = seed;
            TrainConfig tc;
            tc.learning_rate = lr;
            tc.epochs = epochs;
            tc.weight_decay = weight_decay;
            tc.loss = loss_from_name(loss);
            tc.seed = seed;
            TrainResult r = train_model(mc, graph, split, tc);
            py::list history;
            for (const EpochRecord& e : r.history) {
                py::dict rec;
                rec["train_loss"] = e.train_loss;
                rec["val_mae"] = e.val_mae_years;
                history.append(rec);
            }
            TrainedModel model{mc, std::move(r.best_params), r.stats};
            return py::make_tuple(py::cast(std::move(model)), r.best_epoch, r.best_val_mae,
                                  history);
        },
        py::arg("graph"), py::arg("split"), py::arg("arch") = "gcn", py::arg("hidden") = 512,
        py::arg("fc") = 128, py::arg("cheb_order") = 3, py::arg("heads") = 1,
        py::arg("lr") = 1e-3, py::arg("epochs") = 150, py::arg("weight_decay") = 0.01,
        py::arg("loss") = "mse", py::arg("seed") = 0);

    m.def(
        "benchmark",
        [](const Cohort& cohort, const std::vector<std::string>& builders,
           const std::vector<std::string>& models, std::size_t repeats, std::uint64_t seed,
           std::size_t hidden, std::size_t fc, std::size_t epochs, std::size_t k,
           double budget_min, double budget_max, std::size_t reference_n,
           const std::string& report_path, const std::string& values_path) {
            BenchmarkConfig cfg;
            cfg.builders.clear();
            for (const std::string& b : builders) cfg.builders.push_back(builder_from_name(b));
            cfg.models.clear();
            for (const std::string& mname : models)
                cfg.models.push_back(architecture_from_name(mname));
            cfg.repeats = repeats;
            cfg.seed = seed;
            cfg.model_base.hidden = hidden;
            cfg.model_base.fc = fc;
            cfg.train_base.epochs = epochs;
            cfg.builder_base.k = k;
            cfg.builder_base.edge_budget_min = budget_min;
            cfg.builder_base.edge_budget_max = budget_max;
            cfg.builder_base.reference_n = reference_n;
            const BenchmarkReport report = benchmark_matrix(cohort, cfg);
            if (!report_path.empty()) write_report_text(report, report_path);
            if (!values_path.empty()) write_report_json(report, values_path);
            py::list cells;
            for (const CellResult& c : report.cells) {
                py::dict cell;
                cell["builder"] = c.builder;
                cell["model"] = c.model;
                cell["ok"] = c.ok;
                if (c.ok) {
                    cell["mae"] = c.mae_mean;
                    cell["r2"] = c.r2_mean ? py::cast(*c.r2_mean) : py::none();
                } else {
                    cell["error"] = c.error;
                }
                cells.append(cell);
            }
            py::list graphs;
            for (const GraphSummary& g : report.graphs) {
                py::dict gd;
                gd["builder"] = g.builder;
                gd["edges"] = g.edges;
                gd["homophily"] = g.homophily ? py::cast(*g.homophily) : py::none();
                graphs.append(gd);
            }
            py::dict out;
            out["cells"] = cells;
            out["graphs"] = graphs;
            return out;
        },
        py::arg("cohort"),
        py::arg("builders") = std::vector<std::string>{"no-edges", "random", "clinical-sim",
                                                       "parisot", "knn-imaging", "knn-nonimaging",
                                                       "knn-all"},
        py::arg("models") = std::vector<std::string>{"gcn", "sage", "gat", "cheb"},
        py::arg("repeats") = 3, py::arg("seed") = 0, py::arg("hidden") = 512, py::arg("fc") = 128,
        py::arg("epochs") = 150, py::arg("k") = 5, py::arg("budget_min") = 40000.0,
        py::arg("budget_max") = 50000.0, py::arg("reference_n") = 6500,
        py::arg("report_path") = std::string(), py::arg("values_path") = std::string());

    m.def(
        "export_graph",
        [](const PopulationGraph& g, const std::string& format, const std::string& path,
           bool include_labels) {
            export_graph(g, format_from_name(format), path, include_labels);
        },
        py::arg("graph"), py::arg("format"), py::arg("path"), py::arg("include_labels") = true);

    m.def("load_graph_csv",
          [](const std::string& path) { return load_graph_csv(path); }, py::arg("path"));

    m.def(
        "layout",
        [](const PopulationGraph& g, std::size_t iterations, std::uint64_t seed) {
            return layout_graph(g, iterations, seed);
        },
        py::arg("graph"), py::arg("iterations") = 50, py::arg("seed") = 0);
}
