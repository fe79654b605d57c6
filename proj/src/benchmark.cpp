#include "popgraph/benchmark.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"

namespace popgraph {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

CellResult run_cell(const std::string& builder, Architecture model,
                    const PopulationGraph& graph, const Split& split,
                    const BenchmarkConfig& config) {
    CellResult cell;
    cell.builder = builder;
    cell.model = architecture_name(model);
    const auto start = Clock::now();
    try {
        double mae_sum = 0.0, r2_sum = 0.0;
        std::size_t r2_count = 0;
        for (std::size_t rep = 0; rep < config.repeats; ++rep) {
            const std::uint64_t seed =
                derive_seed(config.seed, builder + "/" + cell.model, rep);
            ModelConfig mc = config.model_base;
            mc.arch = model;
            mc.seed = seed;
            TrainConfig tc = config.train_base;
            tc.seed = seed;

            TrainResult tr = train_model(mc, graph, split, tc);
            EvalResult ev = evaluate(tr.best_params, mc, graph, split.test, tr.stats);

            cell.seeds.push_back(seed);
            cell.mae_runs.push_back(ev.mae_years);
            cell.r2_runs.push_back(ev.r2);
            cell.histories.push_back(std::move(tr.history));
            mae_sum += ev.mae_years;
            if (ev.r2) {
                r2_sum += *ev.r2;
                r2_count++;
            }
        }
        cell.mae_mean = mae_sum / static_cast<double>(config.repeats);
        if (r2_count > 0) cell.r2_mean = r2_sum / static_cast<double>(r2_count);
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    cell.wall_seconds = seconds_since(start);
    return cell;
}

} // namespace

BenchmarkReport benchmark_matrix(const Cohort& cohort, const BenchmarkConfig& config) {
    const auto total_start = Clock::now();
    if (config.repeats < 1) throw ValidationError("benchmark: repeats must be >= 1");

    BenchmarkReport report;
    report.cohort_n = cohort.n;
    report.config = config;

    const Split split = split_cohort(cohort, config.split_fractions,
                                     derive_seed(config.seed, "split"));

    // Build each graph once; homophily is a per-graph quantity. A failed
    // builder poisons only its own cells.
    std::vector<PopulationGraph> graphs(config.builders.size());
    std::vector<std::string> build_errors(config.builders.size());
    for (std::size_t b = 0; b < config.builders.size(); ++b) {
        const BuilderMethod method = config.builders[b];
        BuilderConfig bc = config.builder_base;
        bc.method = method;
        bc.seed = derive_seed(config.seed, builder_name(method));
        GraphSummary summary;
        summary.builder = builder_name(method);
        try {
            graphs[b] = build_graph(cohort, bc);
            summary.homophily = homophily(graphs[b]);
            summary.edges = graphs[b].edge_count();
            summary.degrees = degree_stats(graphs[b]);
        } catch (const std::exception& e) {
            build_errors[b] = e.what();
            summary.error = e.what();
        }
        report.graphs.push_back(std::move(summary));
    }

    // The no-edges baseline pairs with the MLP; every other builder runs the
    // full model list.
    struct Job {
        std::size_t graph_index;
        Architecture model;
    };
    std::vector<Job> jobs;
    for (std::size_t b = 0; b < config.builders.size(); ++b) {
        if (config.builders[b] == BuilderMethod::no_edges) {
            jobs.push_back({b, Architecture::mlp});
        } else {
            for (const Architecture model : config.models) jobs.push_back({b, model});
        }
    }

    report.cells.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const std::size_t b = jobs[j].graph_index;
            if (!build_errors[b].empty()) {
                CellResult cell;
                cell.builder = builder_name(config.builders[b]);
                cell.model = architecture_name(jobs[j].model);
                cell.ok = false;
                cell.error = "builder failed: " + build_errors[b];
                report.cells[j] = std::move(cell);
                continue;
            }
            report.cells[j] = run_cell(graphs[b].builder, jobs[j].model, graphs[b], split, config);
        }
    };

    std::size_t workers = config.jobs;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    report.total_wall_seconds = seconds_since(total_start);
    return report;
}

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    while (s.size() < width) s.push_back(' ');
    return s;
}

} // namespace

namespace {

std::string joined_names(const BenchmarkConfig& cfg) {
    std::string builders, models;
    for (const BuilderMethod b : cfg.builders) {
        if (!builders.empty()) builders += ",";
        builders += builder_name(b);
    }
    for (const Architecture m : cfg.models) {
        if (!models.empty()) models += ",";
        models += architecture_name(m);
    }
    return "builders=" + builders + " models=" + models;
}

} // namespace

void write_report_text(const BenchmarkReport& report, std::ostream& os) {
    const BenchmarkConfig& cfg = report.config;
    os << "popgraph benchmark report\n";
    os << "cohort_n=" << report.cohort_n << " seed=" << cfg.seed << " repeats=" << cfg.repeats
       << "\n";
    os << joined_names(cfg) << "\n";
    os << "model: hidden=" << cfg.model_base.hidden << " fc=" << cfg.model_base.fc
       << " cheb_order=" << cfg.model_base.cheb_order << " heads=" << cfg.model_base.heads << "\n";
    os << "train: lr=" << cfg.train_base.learning_rate << " epochs=" << cfg.train_base.epochs
       << " weight_decay=" << cfg.train_base.weight_decay
       << " loss=" << loss_name(cfg.train_base.loss) << "\n";
    os << "builder: k=" << cfg.builder_base.k << " mu=" << cfg.builder_base.mu
       << " theta=" << cfg.builder_base.theta << " budget=[" << cfg.builder_base.edge_budget_min
       << "," << cfg.builder_base.edge_budget_max << "]@" << cfg.builder_base.reference_n << "\n\n";

    os << "graphs:\n";
    os << "  " << pad("builder", 16) << pad("edges", 10) << pad("homophily", 12)
       << pad("mean_deg", 10) << pad("min", 6) << pad("max", 6) << "isolated\n";
    for (const GraphSummary& g : report.graphs) {
        os << "  " << pad(g.builder, 16) << pad(std::to_string(g.edges), 10)
           << pad(g.homophily ? fixed(*g.homophily) : "-", 12)
           << pad(fixed(g.degrees.mean, 2), 10) << pad(std::to_string(g.degrees.min), 6)
           << pad(std::to_string(g.degrees.max), 6) << g.degrees.isolated << "\n";
    }

    // Column set: models that actually appear in the cells, mlp last.
    std::vector<std::string> columns;
    for (const CellResult& c : report.cells)
        if (std::find(columns.begin(), columns.end(), c.model) == columns.end() &&
            c.model != "mlp")
            columns.push_back(c.model);
    for (const CellResult& c : report.cells)
        if (c.model == "mlp" && std::find(columns.begin(), columns.end(), "mlp") == columns.end())
            columns.push_back("mlp");

    auto find_cell = [&](const std::string& builder, const std::string& model) -> const CellResult* {
        for (const CellResult& c : report.cells)
            if (c.builder == builder && c.model == model) return &c;
        return nullptr;
    };

    auto emit_metric = [&](const char* title, auto value_of) {
        os << "\n" << title << ":\n";
        os << "  " << pad("builder", 16);
        for (const std::string& m : columns) os << pad(m, 10);
        os << "\n";
        for (const GraphSummary& g : report.graphs) {
            os << "  " << pad(g.builder, 16);
            for (const std::string& m : columns) {
                const CellResult* c = find_cell(g.builder, m);
                if (!c)
                    os << pad("-", 10);
                else if (!c->ok)
                    os << pad("error", 10);
                else
                    os << pad(value_of(*c), 10);
            }
            os << "\n";
        }
    };

    emit_metric("test MAE (years)", [](const CellResult& c) { return fixed(c.mae_mean, 3); });
    emit_metric("test R^2", [](const CellResult& c) {
        return c.r2_mean ? fixed(*c.r2_mean, 3) : std::string("-");
    });

    bool any_error = false;
    for (const CellResult& c : report.cells) any_error = any_error || !c.ok;
    for (const GraphSummary& g : report.graphs) any_error = any_error || !g.error.empty();
    if (any_error) {
        os << "\nfailures:\n";
        for (const GraphSummary& g : report.graphs)
            if (!g.error.empty()) os << "  " << g.builder << " (builder): " << g.error << "\n";
        for (const CellResult& c : report.cells)
            if (!c.ok) os << "  " << c.builder << "/" << c.model << ": " << c.error << "\n";
    }
}

void write_report_text(const BenchmarkReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("report: cannot open '" + path.string() + "' for writing");
    write_report_text(report, os);
    if (!os) throw DataError("report: write failed for '" + path.string() + "'");
}

void write_report_json(const BenchmarkReport& report, const std::filesystem::path& path) {
    const BenchmarkConfig& cfg = report.config;
    nlohmann::json j;
    j["cohort_n"] = report.cohort_n;
    j["seed"] = cfg.seed;
    j["repeats"] = cfg.repeats;
    {
        nlohmann::json jc;
        std::vector<std::string> builders, models;
        for (const BuilderMethod b : cfg.builders) builders.emplace_back(builder_name(b));
        for (const Architecture m : cfg.models) models.emplace_back(architecture_name(m));
        jc["builders"] = builders;
        jc["models"] = models;
        jc["split_fractions"] = cfg.split_fractions;
        jc["hidden"] = cfg.model_base.hidden;
        jc["fc"] = cfg.model_base.fc;
        jc["cheb_order"] = cfg.model_base.cheb_order;
        jc["heads"] = cfg.model_base.heads;
        jc["leaky_slope"] = cfg.model_base.leaky_slope;
        jc["learning_rate"] = cfg.train_base.learning_rate;
        jc["epochs"] = cfg.train_base.epochs;
        jc["weight_decay"] = cfg.train_base.weight_decay;
        jc["loss"] = loss_name(cfg.train_base.loss);
        jc["k"] = cfg.builder_base.k;
        jc["mu"] = cfg.builder_base.mu;
        jc["theta"] = cfg.builder_base.theta;
        jc["edge_budget_min"] = cfg.builder_base.edge_budget_min;
        jc["edge_budget_max"] = cfg.builder_base.edge_budget_max;
        jc["reference_n"] = cfg.builder_base.reference_n;
        j["config"] = jc;
    }
    j["graphs"] = nlohmann::json::array();
    for (const GraphSummary& g : report.graphs) {
        nlohmann::json jg;
        jg["builder"] = g.builder;
        jg["edges"] = g.edges;
        if (g.homophily)
            jg["homophily"] = *g.homophily;
        else
            jg["homophily"] = nullptr;
        jg["degree_mean"] = g.degrees.mean;
        jg["degree_min"] = g.degrees.min;
        jg["degree_max"] = g.degrees.max;
        jg["isolated"] = g.degrees.isolated;
        if (!g.error.empty()) jg["error"] = g.error;
        j["graphs"].push_back(jg);
    }
    j["cells"] = nlohmann::json::array();
    for (const CellResult& c : report.cells) {
        nlohmann::json jc;
        jc["builder"] = c.builder;
        jc["model"] = c.model;
        jc["ok"] = c.ok;
        if (!c.ok) jc["error"] = c.error;
        if (c.ok) {
            jc["mae_mean"] = c.mae_mean;
            jc["r2_mean"] = c.r2_mean ? nlohmann::json(*c.r2_mean) : nlohmann::json(nullptr);
            jc["mae_runs"] = c.mae_runs;
            jc["r2_runs"] = nlohmann::json::array();
            for (const auto& r : c.r2_runs)
                jc["r2_runs"].push_back(r ? nlohmann::json(*r) : nlohmann::json(nullptr));
            jc["seeds"] = c.seeds;
            jc["histories"] = nlohmann::json::array();
            for (const auto& hist : c.histories) {
                nlohmann::json jh = nlohmann::json::array();
                for (const EpochRecord& e : hist)
                    jh.push_back({{"train_loss", e.train_loss}, {"val_mae", e.val_mae_years}});
                jc["histories"].push_back(jh);
            }
        }
        j["cells"].push_back(jc);
    }
    std::ofstream os(path);
    if (!os) throw DataError("report: cannot open '" + path.string() + "' for writing");
    os << j.dump(1) << "\n";
    if (!os) throw DataError("report: write failed for '" + path.string() + "'");
}

} // namespace popgraph
