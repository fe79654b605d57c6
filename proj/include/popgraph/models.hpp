#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "popgraph/graph.hpp"
#include "popgraph/sparse.hpp"
#include "popgraph/tensor.hpp"

namespace popgraph {

enum class Architecture { mlp, gcn, sage, gat, cheb };

const char* architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

// Shared skeleton: one graph (or dense) layer of `hidden` units, a fully
// connected layer of `fc` units, then a scalar regression head.
struct ModelConfig {
    Architecture arch = Architecture::gcn;
    std::size_t hidden = 512;
    std::size_t fc = 128;
    std::size_t cheb_order = 3; // Chebyshev polynomial terms
    std::size_t heads = 1;      // GAT attention heads (outputs concatenated)
    double leaky_slope = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ModelParams {
    std::vector<Param> params;

    Param& at(std::string_view name);
    const Param& at(std::string_view name) const;
    bool has(std::string_view name) const;
    std::vector<Param*> pointers();
};

// Glorot-uniform weights, zero biases, drawn in a fixed order from the
// config seed.
ModelParams init_params(const ModelConfig& config, std::size_t in_features);

// A_hat = Dhat^{-1/2} (A + I) Dhat^{-1/2}; isolated nodes keep a unit
// self-loop.
SparseMatrix normalize_adjacency(const PopulationGraph& graph);

// L_tilde = (2/lambda_max) L_sym - I with lambda_max fixed at 2, i.e.
// -D^{-1/2} A D^{-1/2} with zero rows/cols for isolated nodes.
SparseMatrix scaled_laplacian(const PopulationGraph& graph);

// D^{-1} A; rows of isolated nodes are empty, giving a zero neighbor mean.
SparseMatrix mean_aggregator(const PopulationGraph& graph);

// Directed edges (both orientations plus self-loops) in CSR order keyed by
// destination; src/dst arrays align with the pattern's nnz order.
struct GatStructure {
    SparseMatrix pattern; // rows = destination, cols = source, values unused
    std::vector<std::size_t> src;
    std::vector<std::size_t> dst;
};

GatStructure gat_structure(const PopulationGraph& graph);

// Operators prepared once per (graph, architecture).
struct GraphOps {
    Architecture arch = Architecture::mlp;
    SparseMatrix gcn_adj;
    SparseMatrix sage_mean;
    SparseMatrix cheb_lap;
    GatStructure gat;
};

GraphOps prepare_graph(const ModelConfig& config, const PopulationGraph& graph);

// Layers. Each applies its bias and ReLU.
Tensor gcn_layer(Trace& tr, const SparseMatrix& adj, Tensor x, Tensor w, Tensor b);
Tensor sage_layer(Trace& tr, const SparseMatrix& mean_agg, Tensor x,
                  Tensor w_self, Tensor w_neigh, Tensor b);
Tensor gat_head(Trace& tr, const GatStructure& st, Tensor x,
                Tensor w, Tensor a_src, Tensor a_dst, double slope);
Tensor gat_layer(Trace& tr, const GatStructure& st, Tensor x,
                 std::span<const Tensor> w, std::span<const Tensor> a_src,
                 std::span<const Tensor> a_dst, Tensor b, double slope);
Tensor cheb_layer(Trace& tr, const SparseMatrix& lap, Tensor x,
                  std::span<const Tensor> w, Tensor b);

// Parameter leaves bound into a trace, aligned with ModelParams order.
struct BoundParams {
    std::vector<Tensor> leaves;
    const ModelParams* source = nullptr;

    Tensor at(std::string_view name) const;
};

BoundParams bind_params(Trace& tr, const ModelParams& params);

// Full forward pass: graph layer -> fc(ReLU) -> scalar head. Returns n x 1.
Tensor model_forward(Trace& tr, const ModelConfig& config, const GraphOps& ops,
                     Tensor x, const BoundParams& bound);

// Convenience inference path; returns the n predictions.
std::vector<double> predict(const ModelConfig& config, const ModelParams& params,
                            const GraphOps& ops, const PopulationGraph& graph);

// Text checkpoint of config plus named arrays; hexfloat values, so the
// round-trip is bit exact.
void save_checkpoint(const ModelConfig& config, const ModelParams& params,
                     const std::filesystem::path& path);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path& path);

} // namespace popgraph
