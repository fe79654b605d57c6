#include "popgraph/train.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "popgraph/adamw.hpp"
#include "popgraph/errors.hpp"

namespace popgraph {

const char* loss_name(LossKind k) { return k == LossKind::mse ? "mse" : "mae"; }

LossKind loss_from_name(const std::string& name) {
    if (name == "mse") return LossKind::mse;
    if (name == "mae") return LossKind::mae;
    throw ValidationError("train: unknown loss '" + name + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
    if (learning_rate <= 0.0) throw ValidationError("train: learning_rate must be positive");
    if (weight_decay < 0.0) throw ValidationError("train: weight_decay must be nonnegative");
}

LabelStats label_stats(std::span<const double> labels, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ValidationError("train: empty index set for label statistics");
    double mean = 0.0;
    for (const std::size_t i : indices) mean += labels[i];
    mean /= static_cast<double>(indices.size());
    double var = 0.0;
    for (const std::size_t i : indices) var += (labels[i] - mean) * (labels[i] - mean);
    var /= static_cast<double>(indices.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    return {mean, sd};
}

namespace {

double mae_years(std::span<const double> pred_std, const PopulationGraph& graph,
                 std::span<const std::size_t> indices, const LabelStats& stats) {
    double acc = 0.0;
    for (const std::size_t i : indices) {
        const double years = pred_std[i] * stats.stdev + stats.mean;
        acc += std::abs(years - graph.labels[i]);
    }
    return acc / static_cast<double>(indices.size());
}

} // namespace

TrainResult train_model(const ModelConfig& model_config, const PopulationGraph& graph,
                        const Split& split, const TrainConfig& train_config) {
    model_config.validate();
    train_config.validate();
    if (graph.feature_dim == 0) throw ValidationError("train: graph carries no node features");
    if (graph.labels.size() != graph.n) throw ValidationError("train: graph carries no labels");
    for (const auto& set : {split.train, split.val, split.test})
        for (const std::size_t i : set)
            if (i >= graph.n)
                throw ValidationError("train: split index " + std::to_string(i) +
                                      " out of range for " + std::to_string(graph.n) + " nodes");
    if (split.train.empty() || split.val.empty())
        throw ValidationError("train: train and validation sets must be nonempty");

    const GraphOps ops = prepare_graph(model_config, graph);
    const LabelStats stats = label_stats(graph.labels, split.train);

    std::vector<double> target_std(split.train.size());
    for (std::size_t r = 0; r < split.train.size(); ++r)
        target_std[r] = (graph.labels[split.train[r]] - stats.mean) / stats.stdev;

    ModelParams params = init_params(model_config, graph.feature_dim);
    AdamW optimizer(AdamWConfig{train_config.learning_rate, 0.9, 0.999, 1e-8,
                                train_config.weight_decay});

    TrainResult result;
    result.stats = stats;
    result.best_val_mae = std::numeric_limits<double>::infinity();
    result.history.reserve(train_config.epochs);

    for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
        double train_loss;
        {
            Trace tr;
            BoundParams bound = bind_params(tr, params);
            Tensor x = tr.tensor({graph.n, graph.feature_dim}, graph.features);
            Tensor pred = model_forward(tr, model_config, ops, x, bound);
            Tensor pred_train = tr.gather_rows(pred, split.train);
            Tensor target = tr.tensor({split.train.size(), 1}, target_std);
            Tensor loss = train_config.loss == LossKind::mse ? tr.mse_loss(pred_train, target)
                                                             : tr.mae_loss(pred_train, target);
            train_loss = loss.values()[0];
            if (!std::isfinite(train_loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
            tr.backward(loss);

            std::vector<Param*> ptrs = params.pointers();
            std::vector<const std::vector<double>*> grads;
            grads.reserve(ptrs.size());
            for (const Tensor& leaf : bound.leaves) grads.push_back(&leaf.grad());
            try {
                optimizer.step(ptrs, grads);
            } catch (const NumericError& e) {
                throw NumericError("train: aborted at epoch " + std::to_string(epoch) + ": " +
                                   e.what());
            }
        }

        const std::vector<double> pred = predict(model_config, params, ops, graph);
        const double val_mae = mae_years(pred, graph, split.val, stats);
        result.history.push_back({train_loss, val_mae});
        if (val_mae < result.best_val_mae) {
            result.best_val_mae = val_mae;
            result.best_epoch = epoch;
            result.best_params = params;
        }
    }
    return result;
}

EvalResult evaluate(const ModelParams& params, const ModelConfig& config,
                    const PopulationGraph& graph, std::span<const std::size_t> indices,
                    const LabelStats& stats) {
    if (indices.empty()) throw ValidationError("evaluate: empty index set");
    const GraphOps ops = prepare_graph(config, graph);
    const std::vector<double> pred = predict(config, params, ops, graph);

    EvalResult out;
    out.mae_years = mae_years(pred, graph, indices, stats);

    double mean = 0.0;
    for (const std::size_t i : indices) mean += graph.labels[i];
    mean /= static_cast<double>(indices.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (const std::size_t i : indices) {
        const double years = pred[i] * stats.stdev + stats.mean;
        ss_res += (years - graph.labels[i]) * (years - graph.labels[i]);
        ss_tot += (graph.labels[i] - mean) * (graph.labels[i] - mean);
    }
    if (ss_tot > 0.0)
        out.r2 = 1.0 - ss_res / ss_tot;
    return out;
}

} // namespace popgraph
