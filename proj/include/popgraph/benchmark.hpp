#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "popgraph/builders.hpp"
#include "popgraph/metrics.hpp"
#include "popgraph/train.hpp"

namespace popgraph {

struct BenchmarkConfig {
    std::vector<BuilderMethod> builders = {
        BuilderMethod::no_edges,      BuilderMethod::random,
        BuilderMethod::clinical_sim,  BuilderMethod::parisot,
        BuilderMethod::knn_imaging,   BuilderMethod::knn_nonimaging,
        BuilderMethod::knn_all,
    };
    std::vector<Architecture> models = {
        Architecture::gcn, Architecture::sage, Architecture::gat, Architecture::cheb,
    };
    std::size_t repeats = 3;
    std::uint64_t seed = 0;
    std::size_t jobs = 0; // 0 = hardware concurrency
    std::array<double, 3> split_fractions{0.75, 0.05, 0.20};

    BuilderConfig builder_base;
    ModelConfig model_base;
    TrainConfig train_base;
};

struct CellResult {
    std::string builder;
    std::string model;
    bool ok = false;
    std::string error;
    double mae_mean = 0.0;
    std::optional<double> r2_mean;
    std::vector<double> mae_runs;
    std::vector<std::optional<double>> r2_runs;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<EpochRecord>> histories; // per repeat
    double wall_seconds = 0.0; // console only, never serialized
};

struct GraphSummary {
    std::string builder;
    std::optional<double> homophily;
    std::size_t edges = 0;
    DegreeStats degrees;
    std::string error; // nonempty when the builder itself failed
};

struct BenchmarkReport {
    std::vector<GraphSummary> graphs;
    std::vector<CellResult> cells; // builder-major, model-minor order
    std::size_t cohort_n = 0;
    BenchmarkConfig config; // full provenance, serialized with the results
    double total_wall_seconds = 0.0; // console only
};

// Builds each graph once, scores homophily once per graph, then trains every
// (builder, model) cell with independently derived seeds. The no-edges
// builder pairs with the MLP baseline only. Cell failures are recorded
// without aborting the rest. Cells run on a small thread pool; results are
// deterministic regardless of schedule.
BenchmarkReport benchmark_matrix(const Cohort& cohort, const BenchmarkConfig& config);

// Aligned results table and a machine-readable JSON file.
// Neither includes wall-clock times, so reruns are byte-identical.
void write_report_text(const BenchmarkReport& report, std::ostream& os);
void write_report_text(const BenchmarkReport& report, const std::filesystem::path& path);
void write_report_json(const BenchmarkReport& report, const std::filesystem::path& path);

} // namespace popgraph
