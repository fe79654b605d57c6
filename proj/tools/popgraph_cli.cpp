// popgraph command line: synthetic cohorts, graph construction, training,
// and the full builder-by-model benchmark.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
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

namespace {

using namespace popgraph;

struct GenerateArgs {
    SyntheticConfig cfg;
    std::string out;
    std::string schema_out;
};

struct BuildArgs {
    std::string cohort;
    std::string schema;
    std::string method = "knn-imaging";
    BuilderConfig cfg;
    std::string out;
    bool labels = true;
};

struct TrainArgs {
    std::string cohort;
    std::string schema;
    std::string graph;
    std::string arch = "gcn";
    ModelConfig model;
    TrainConfig train;
    std::string loss = "mse";
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    std::vector<double> fractions{0.75, 0.05, 0.20};
    std::string checkpoint;
    std::string metrics;
};

struct BenchmarkArgs {
    std::string cohort;
    std::string schema;
    SyntheticConfig synth;
    bool use_synthetic = true;
    BenchmarkConfig cfg;
    std::string builders = "no-edges,random,clinical-sim,parisot,knn-imaging,knn-nonimaging,knn-all";
    std::string models = "gcn,sage,gat,cheb";
    std::string loss = "mse";
    std::string report;
    std::string values;
};

struct ExportArgs {
    std::string graph;
    std::string format = "graphml";
    std::string out;
    bool labels = true;
};

struct LayoutArgs {
    std::string graph;
    std::size_t iterations = 50;
    std::uint64_t seed = 0;
    std::string out;
};

template <typename T>
void kv(const char* key, const T& value) {
    std::cout << "  " << key << " = " << value << "\n";
}

Cohort load_cohort_files(const std::string& cohort_path, const std::string& schema_path) {
    const PhenotypeSchema schema = load_schema(schema_path);
    return load_cohort(cohort_path, schema);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int run_generate(const GenerateArgs& a) {
    std::cout << "generate:\n";
    kv("n", a.cfg.n);
    kv("imaging_features", a.cfg.imaging_features);
    kv("categorical_phenotypes", a.cfg.categorical_phenotypes);
    kv("continuous_phenotypes", a.cfg.continuous_phenotypes);
    kv("snr", a.cfg.snr);
    kv("seed", a.cfg.seed);
    kv("out", a.out);
    const std::string schema_path =
        a.schema_out.empty() ? a.out + ".schema.txt" : a.schema_out;
    kv("schema", schema_path);

    const Cohort c = generate_synthetic(a.cfg);
    write_cohort(c, a.out);
    write_schema(c.schema, schema_path);
    std::cout << "wrote " << c.n << " subjects\n";
    return 0;
}

int run_build(const BuildArgs& a) {
    std::cout << "build-graph:\n";
    kv("cohort", a.cohort);
    kv("schema", a.schema);
    kv("method", a.method);
    kv("mu", a.cfg.mu);
    kv("theta", a.cfg.theta);
    kv("k", a.cfg.k);
    kv("edge_budget_min", a.cfg.edge_budget_min);
    kv("edge_budget_max", a.cfg.edge_budget_max);
    kv("reference_n", a.cfg.reference_n);
    kv("seed", a.cfg.seed);
    kv("out", a.out);

    const Cohort c = load_cohort_files(a.cohort, a.schema);
    BuilderConfig cfg = a.cfg;
    cfg.method = builder_from_name(a.method);
    const PopulationGraph g = build_graph(c, cfg);
    export_graph(g, GraphFormat::edge_csv, a.out, a.labels);

    const HomophilyReport r = graph_report(g);
    std::cout << "builder " << r.builder << ": " << r.edges << " edges";
    if (r.ratio)
        std::cout << ", homophily " << *r.ratio;
    else
        std::cout << ", homophily absent (no edges)";
    std::cout << ", mean degree " << r.degrees.mean << ", isolated " << r.degrees.isolated << "\n";
    return 0;
}

int run_train(const TrainArgs& a) {
    std::cout << "train:\n";
    kv("cohort", a.cohort);
    kv("schema", a.schema);
    kv("graph", a.graph);
    kv("arch", a.arch);
    kv("hidden", a.model.hidden);
    kv("fc", a.model.fc);
    kv("cheb_order", a.model.cheb_order);
    kv("heads", a.model.heads);
    kv("learning_rate", a.train.learning_rate);
    kv("epochs", a.train.epochs);
    kv("weight_decay", a.train.weight_decay);
    kv("loss", a.loss);
    kv("seed", a.seed);
    kv("split_seed", a.split_seed);
    kv("checkpoint", a.checkpoint);
    kv("metrics", a.metrics);

    const Cohort c = load_cohort_files(a.cohort, a.schema);
    PopulationGraph g = load_graph_csv(a.graph);
    if (g.n != c.n)
        throw ValidationError("train: graph has " + std::to_string(g.n) + " nodes but cohort has " +
                              std::to_string(c.n) + " subjects");
    g.feature_dim = c.schema.imaging_features;
    g.features = c.imaging;
    g.labels = c.age;

    if (a.fractions.size() != 3)
        throw ValidationError("train: --fractions needs exactly three values");
    const Split split =
        split_cohort(c, {a.fractions[0], a.fractions[1], a.fractions[2]}, a.split_seed);

    ModelConfig mc = a.model;
    mc.arch = architecture_from_name(a.arch);
    mc.seed = a.seed;
    TrainConfig tc = a.train;
    tc.loss = loss_from_name(a.loss);
    tc.seed = a.seed;

    const TrainResult r = train_model(mc, g, split, tc);
    const EvalResult test = evaluate(r.best_params, mc, g, split.test, r.stats);

    if (!a.checkpoint.empty()) save_checkpoint(mc, r.best_params, a.checkpoint);
    if (!a.metrics.empty()) {
        nlohmann::json j;
        j["arch"] = a.arch;
        j["best_epoch"] = r.best_epoch;
        j["best_val_mae"] = r.best_val_mae;
        j["test_mae"] = test.mae_years;
        j["test_r2"] = test.r2 ? nlohmann::json(*test.r2) : nlohmann::json(nullptr);
        j["label_mean"] = r.stats.mean;
        j["label_std"] = r.stats.stdev;
        j["history"] = nlohmann::json::array();
        for (const EpochRecord& e : r.history)
            j["history"].push_back({{"train_loss", e.train_loss}, {"val_mae", e.val_mae_years}});
        std::ofstream os(a.metrics);
        if (!os) throw DataError("train: cannot open '" + a.metrics + "' for writing");
        os << j.dump(1) << "\n";
    }
    std::cout << "best epoch " << r.best_epoch << ", val MAE " << r.best_val_mae
              << " years, test MAE " << test.mae_years << " years";
    if (test.r2) std::cout << ", test R^2 " << *test.r2;
    std::cout << "\n";
    return 0;
}

int run_benchmark(const BenchmarkArgs& a) {
    std::cout << "benchmark:\n";
    kv("builders", a.builders);
    kv("models", a.models);
    kv("repeats", a.cfg.repeats);
    kv("seed", a.cfg.seed);
    kv("epochs", a.cfg.train_base.epochs);
    kv("loss", a.loss);
    kv("jobs", a.cfg.jobs);

    Cohort cohort;
    if (!a.cohort.empty()) {
        kv("cohort", a.cohort);
        kv("schema", a.schema);
        cohort = load_cohort_files(a.cohort, a.schema);
    } else {
        kv("synthetic_n", a.synth.n);
        kv("snr", a.synth.snr);
        SyntheticConfig sc = a.synth;
        sc.seed = a.cfg.seed;
        cohort = generate_synthetic(sc);
    }

    BenchmarkConfig cfg = a.cfg;
    cfg.train_base.loss = loss_from_name(a.loss);
    cfg.builders.clear();
    for (const std::string& b : split_list(a.builders)) cfg.builders.push_back(builder_from_name(b));
    cfg.models.clear();
    for (const std::string& m : split_list(a.models)) cfg.models.push_back(architecture_from_name(m));

    const BenchmarkReport report = benchmark_matrix(cohort, cfg);
    write_report_text(report, std::cout);
    std::cout << "total wall time " << report.total_wall_seconds << " s\n";
    if (!a.report.empty()) write_report_text(report, a.report);
    if (!a.values.empty()) write_report_json(report, a.values);

    for (const CellResult& c : report.cells)
        if (!c.ok) return 3;
    return 0;
}

int run_export(const ExportArgs& a) {
    std::cout << "export:\n";
    kv("graph", a.graph);
    kv("format", a.format);
    kv("out", a.out);
    kv("labels", a.labels);
    const PopulationGraph g = load_graph_csv(a.graph);
    export_graph(g, format_from_name(a.format), a.out, a.labels);
    std::cout << "wrote " << g.n << " nodes, " << g.edge_count() << " edges\n";
    return 0;
}

int run_layout(const LayoutArgs& a) {
    std::cout << "layout:\n";
    kv("graph", a.graph);
    kv("iterations", a.iterations);
    kv("seed", a.seed);
    kv("out", a.out);
    const PopulationGraph g = load_graph_csv(a.graph);
    write_layout_csv(layout_graph(g, a.iterations, a.seed), a.out);
    std::cout << "wrote coordinates for " << g.n << " nodes\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"population-graph benchmarks for brain age regression"};
    app.require_subcommand(1);
    app.set_config("--config", "", "plain-text config file with [subcommand] sections");

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic cohort CSV + schema");
    generate->add_option("--n", gen.cfg.n, "subjects")->capture_default_str();
    generate->add_option("--imaging", gen.cfg.imaging_features, "imaging feature count")
        ->capture_default_str();
    generate->add_option("--categorical", gen.cfg.categorical_phenotypes,
                         "categorical phenotype count")
        ->capture_default_str();
    generate->add_option("--continuous", gen.cfg.continuous_phenotypes,
                         "continuous phenotype count")
        ->capture_default_str();
    generate->add_option("--levels", gen.cfg.categorical_levels, "categorical levels")
        ->capture_default_str();
    generate->add_option("--snr", gen.cfg.snr, "signal-to-noise ratio")->capture_default_str();
    generate->add_option("--seed", gen.cfg.seed, "random seed")->capture_default_str();
    generate->add_option("--out", gen.out, "cohort CSV path")->required();
    generate->add_option("--schema", gen.schema_out, "schema sidecar path (default <out>.schema.txt)");

    BuildArgs build;
    CLI::App* buildg = app.add_subcommand("build-graph", "build a population graph from a cohort");
    buildg->add_option("--cohort", build.cohort, "cohort CSV")->required();
    buildg->add_option("--schema", build.schema, "schema sidecar")->required();
    buildg->add_option("--method", build.method,
                       "no-edges|random|clinical-sim|parisot|knn-imaging|knn-nonimaging|knn-all")
        ->capture_default_str();
    buildg->add_option("--mu", build.cfg.mu, "clinical match threshold (count units)")
        ->capture_default_str();
    buildg->add_option("--theta", build.cfg.theta, "unit-step threshold")->capture_default_str();
    buildg->add_option("--k", build.cfg.k, "neighbors per node")->capture_default_str();
    buildg->add_option("--edge-budget-min", build.cfg.edge_budget_min)->capture_default_str();
    buildg->add_option("--edge-budget-max", build.cfg.edge_budget_max)->capture_default_str();
    buildg->add_option("--reference-n", build.cfg.reference_n, "cohort size the budget is quoted at")
        ->capture_default_str();
    buildg->add_option("--seed", build.cfg.seed, "random seed")->capture_default_str();
    buildg->add_flag("--labels,!--no-labels", build.labels, "write ages into the node sidecar")
        ->capture_default_str();
    buildg->add_option("--out", build.out, "edge CSV path")->required();

    TrainArgs train;
    CLI::App* traincmd = app.add_subcommand("train", "train one model on one graph");
    traincmd->add_option("--cohort", train.cohort, "cohort CSV")->required();
    traincmd->add_option("--schema", train.schema, "schema sidecar")->required();
    traincmd->add_option("--graph", train.graph, "edge CSV from build-graph")->required();
    traincmd->add_option("--arch", train.arch, "mlp|gcn|sage|gat|cheb")->capture_default_str();
    traincmd->add_option("--hidden", train.model.hidden)->capture_default_str();
    traincmd->add_option("--fc", train.model.fc)->capture_default_str();
    traincmd->add_option("--cheb-order", train.model.cheb_order)->capture_default_str();
    traincmd->add_option("--heads", train.model.heads)->capture_default_str();
    traincmd->add_option("--slope", train.model.leaky_slope, "leaky relu slope")
        ->capture_default_str();
    traincmd->add_option("--lr", train.train.learning_rate)->capture_default_str();
    traincmd->add_option("--epochs", train.train.epochs)->capture_default_str();
    traincmd->add_option("--weight-decay", train.train.weight_decay)->capture_default_str();
    traincmd->add_option("--loss", train.loss, "mse|mae")->capture_default_str();
    traincmd->add_option("--seed", train.seed, "model init seed")->capture_default_str();
    traincmd->add_option("--split-seed", train.split_seed)->capture_default_str();
    traincmd->add_option("--fractions", train.fractions, "train/val/test fractions")
        ->expected(3)
        ->capture_default_str();
    traincmd->add_option("--checkpoint", train.checkpoint, "checkpoint output path");
    traincmd->add_option("--metrics", train.metrics, "metrics JSON output path");

    BenchmarkArgs bench;
    CLI::App* benchcmd = app.add_subcommand("benchmark", "run the builder x model matrix");
    benchcmd->add_option("--cohort", bench.cohort, "cohort CSV (else synthetic)");
    benchcmd->add_option("--schema", bench.schema, "schema sidecar");
    benchcmd->add_option("--n", bench.synth.n, "synthetic cohort size")->capture_default_str();
    benchcmd->add_option("--snr", bench.synth.snr, "synthetic snr")->capture_default_str();
    benchcmd->add_option("--builders", bench.builders, "comma list")->capture_default_str();
    benchcmd->add_option("--models", bench.models, "comma list")->capture_default_str();
    benchcmd->add_option("--repeats", bench.cfg.repeats, "seeds per cell")->capture_default_str();
    benchcmd->add_option("--seed", bench.cfg.seed, "global seed")->capture_default_str();
    benchcmd->add_option("--jobs", bench.cfg.jobs, "parallel cells (0 = hardware)")
        ->capture_default_str();
    benchcmd->add_option("--mu", bench.cfg.builder_base.mu)->capture_default_str();
    benchcmd->add_option("--theta", bench.cfg.builder_base.theta)->capture_default_str();
    benchcmd->add_option("--k", bench.cfg.builder_base.k)->capture_default_str();
    benchcmd->add_option("--edge-budget-min", bench.cfg.builder_base.edge_budget_min)
        ->capture_default_str();
    benchcmd->add_option("--edge-budget-max", bench.cfg.builder_base.edge_budget_max)
        ->capture_default_str();
    benchcmd->add_option("--reference-n", bench.cfg.builder_base.reference_n)
        ->capture_default_str();
    benchcmd->add_option("--hidden", bench.cfg.model_base.hidden)->capture_default_str();
    benchcmd->add_option("--fc", bench.cfg.model_base.fc)->capture_default_str();
    benchcmd->add_option("--cheb-order", bench.cfg.model_base.cheb_order)->capture_default_str();
    benchcmd->add_option("--heads", bench.cfg.model_base.heads)->capture_default_str();
    benchcmd->add_option("--lr", bench.cfg.train_base.learning_rate)->capture_default_str();
    benchcmd->add_option("--epochs", bench.cfg.train_base.epochs)->capture_default_str();
    benchcmd->add_option("--weight-decay", bench.cfg.train_base.weight_decay)
        ->capture_default_str();
    benchcmd->add_option("--loss", bench.loss, "mse|mae")->capture_default_str();
    benchcmd->add_option("--report", bench.report, "report text output path");
    benchcmd->add_option("--values", bench.values, "report JSON output path");

    ExportArgs exp;
    CLI::App* expcmd = app.add_subcommand("export", "convert a graph file");
    expcmd->add_option("--graph", exp.graph, "edge CSV from build-graph")->required();
    expcmd->add_option("--format", exp.format, "edge-csv|graphml|dot")->capture_default_str();
    expcmd->add_option("--out", exp.out, "output path")->required();
    expcmd->add_flag("--labels,!--no-labels", exp.labels, "include age attributes")
        ->capture_default_str();

    LayoutArgs lay;
    CLI::App* laycmd = app.add_subcommand("layout", "force-directed 2D coordinates");
    laycmd->add_option("--graph", lay.graph, "edge CSV from build-graph")->required();
    laycmd->add_option("--iterations", lay.iterations)->capture_default_str();
    laycmd->add_option("--seed", lay.seed)->capture_default_str();
    laycmd->add_option("--out", lay.out, "coordinates CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*generate) return run_generate(gen);
        if (*buildg) return run_build(build);
        if (*traincmd) return run_train(train);
        if (*benchcmd) return run_benchmark(bench);
        if (*expcmd) return run_export(exp);
        if (*laycmd) return run_layout(lay);
        std::cerr << "no subcommand given\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
