#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "popgraph/cohort.hpp"
#include "popgraph/graph.hpp"
#include "popgraph/models.hpp"

namespace popgraph {

enum class LossKind { mse, mae };

const char* loss_name(LossKind k);
LossKind loss_from_name(const std::string& name);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 150;
    double weight_decay = 0.01;
    LossKind loss = LossKind::mse;
    std::uint64_t seed = 0;

    void validate() const;
};

// Train-set mean/std of age; models consume standardized labels and metrics
// rescale back to years.
struct LabelStats {
    double mean = 0.0;
    double stdev = 1.0;
};

LabelStats label_stats(std::span<const double> labels, std::span<const std::size_t> indices);

struct EpochRecord {
    double train_loss = 0.0;    // on standardized labels
    double val_mae_years = 0.0; // after the epoch's step
};

struct TrainResult {
    ModelParams best_params; // epoch with minimal validation MAE, earliest on ties
    std::size_t best_epoch = 0;
    double best_val_mae = 0.0;
    std::vector<EpochRecord> history;
    LabelStats stats;
};

// Transductive node regression: every epoch runs a full-graph forward, the
// loss covers train indices only, and validation MAE (in years) picks the
// parameters to keep.
TrainResult train_model(const ModelConfig& model_config, const PopulationGraph& graph,
                        const Split& split, const TrainConfig& train_config);

struct EvalResult {
    double mae_years = 0.0;
    std::optional<double> r2; // absent when the index set has constant labels
};

EvalResult evaluate(const ModelParams& params, const ModelConfig& config,
                    const PopulationGraph& graph, std::span<const std::size_t> indices,
                    const LabelStats& stats);

} // namespace popgraph
