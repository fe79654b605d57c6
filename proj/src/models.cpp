#include "popgraph/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"

namespace popgraph {

const char* architecture_name(Architecture a) {
    switch (a) {
    case Architecture::mlp: return "mlp";
    case Architecture::gcn: return "gcn";
    case Architecture::sage: return "sage";
    case Architecture::gat: return "gat";
    case Architecture::cheb: return "cheb";
    }
    return "?";
}

Architecture architecture_from_name(const std::string& name) {
    if (name == "mlp") return Architecture::mlp;
    if (name == "gcn") return Architecture::gcn;
    if (name == "sage") return Architecture::sage;
    if (name == "gat") return Architecture::gat;
    if (name == "cheb") return Architecture::cheb;
    throw ValidationError("model: unknown architecture '" + name + "'");
}

void ModelConfig::validate() const {
    if (hidden < 1 || fc < 1) throw ValidationError("model: layer widths must be >= 1");
    if (cheb_order < 1) throw ValidationError("model: cheb_order must be >= 1");
    if (heads < 1) throw ValidationError("model: heads must be >= 1");
    if (hidden % heads != 0)
        throw ValidationError("model: hidden width " + std::to_string(hidden) +
                              " is not divisible by " + std::to_string(heads) + " heads");
    if (!std::isfinite(leaky_slope) || leaky_slope < 0.0)
        throw ValidationError("model: leaky_slope must be finite and nonnegative");
}

Param& ModelParams::at(std::string_view name) {
    for (Param& p : params)
        if (p.name == name) return p;
    throw ValidationError("model: no parameter named '" + std::string(name) + "'");
}

const Param& ModelParams::at(std::string_view name) const {
    for (const Param& p : params)
        if (p.name == name) return p;
    throw ValidationError("model: no parameter named '" + std::string(name) + "'");
}

bool ModelParams::has(std::string_view name) const {
    for (const Param& p : params)
        if (p.name == name) return true;
    return false;
}

std::vector<Param*> ModelParams::pointers() {
    std::vector<Param*> out;
    out.reserve(params.size());
    for (Param& p : params) out.push_back(&p);
    return out;
}

namespace {

Param glorot(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Param p{name, {rows, cols}, std::vector<double>(rows * cols)};
    for (double& v : p.value) v = rng.uniform(-limit, limit);
    return p;
}

Param zeros_param(const std::string& name, std::size_t rows, std::size_t cols) {
    return Param{name, {rows, cols}, std::vector<double>(rows * cols, 0.0)};
}

} // namespace

ModelParams init_params(const ModelConfig& config, std::size_t in_features) {
    config.validate();
    if (in_features == 0) throw ValidationError("model: input feature width must be >= 1");
    Rng rng(config.seed);
    ModelParams mp;
    switch (config.arch) {
    case Architecture::mlp:
    case Architecture::gcn:
        mp.params.push_back(glorot("W1", in_features, config.hidden, rng));
        mp.params.push_back(zeros_param("b1", 1, config.hidden));
        break;
    case Architecture::sage:
        mp.params.push_back(glorot("W_self", in_features, config.hidden, rng));
        mp.params.push_back(glorot("W_neigh", in_features, config.hidden, rng));
        mp.params.push_back(zeros_param("b1", 1, config.hidden));
        break;
    case Architecture::gat: {
        const std::size_t width = config.hidden / config.heads;
        for (std::size_t h = 0; h < config.heads; ++h) {
            const std::string suffix = "_" + std::to_string(h);
            mp.params.push_back(glorot("W1" + suffix, in_features, width, rng));
            mp.params.push_back(glorot("a_src" + suffix, width, 1, rng));
            mp.params.push_back(glorot("a_dst" + suffix, width, 1, rng));
        }
        mp.params.push_back(zeros_param("b1", 1, config.hidden));
        break;
    }
    case Architecture::cheb:
        for (std::size_t k = 0; k < config.cheb_order; ++k)
            mp.params.push_back(glorot("W1_" + std::to_string(k), in_features, config.hidden, rng));
        mp.params.push_back(zeros_param("b1", 1, config.hidden));
        break;
    }
    mp.params.push_back(glorot("W2", config.hidden, config.fc, rng));
    mp.params.push_back(zeros_param("b2", 1, config.fc));
    mp.params.push_back(glorot("W3", config.fc, 1, rng));
    mp.params.push_back(zeros_param("b3", 1, 1));
    return mp;
}

// ----- Graph operators ---------------------------------------------------------

SparseMatrix normalize_adjacency(const PopulationGraph& graph) {
    const std::size_t n = graph.n;
    std::vector<double> dhat(n, 1.0); // self-loop contributes 1
    for (const auto& [i, j] : graph.edges) {
        dhat[i] += 1.0;
        dhat[j] += 1.0;
    }
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(2 * graph.edges.size() + n);
    for (std::size_t i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0 / dhat[i]);
    for (const auto& [i, j] : graph.edges) {
        const double v = 1.0 / std::sqrt(dhat[i] * dhat[j]);
        trip.emplace_back(i, j, v);
        trip.emplace_back(j, i, v);
    }
    return SparseMatrix::from_triplets(n, n, std::move(trip));
}

SparseMatrix scaled_laplacian(const PopulationGraph& graph) {
    // With lambda_max fixed at 2, (2/lambda_max) L_sym - I = -D^{-1/2} A D^{-1/2}.
    const std::size_t n = graph.n;
    std::vector<double> deg(n, 0.0);
    for (const auto& [i, j] : graph.edges) {
        deg[i] += 1.0;
        deg[j] += 1.0;
    }
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(2 * graph.edges.size());
    for (const auto& [i, j] : graph.edges) {
        const double v = -1.0 / std::sqrt(deg[i] * deg[j]);
        trip.emplace_back(i, j, v);
        trip.emplace_back(j, i, v);
    }
    return SparseMatrix::from_triplets(n, n, std::move(trip));
}

SparseMatrix mean_aggregator(const PopulationGraph& graph) {
    const std::size_t n = graph.n;
    const std::vector<std::size_t> deg = graph.degrees();
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(2 * graph.edges.size());
    for (const auto& [i, j] : graph.edges) {
        trip.emplace_back(i, j, 1.0 / static_cast<double>(deg[i]));
        trip.emplace_back(j, i, 1.0 / static_cast<double>(deg[j]));
    }
    return SparseMatrix::from_triplets(n, n, std::move(trip));
}

GatStructure gat_structure(const PopulationGraph& graph) {
    const std::size_t n = graph.n;
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(2 * graph.edges.size() + n);
    for (std::size_t i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
    for (const auto& [i, j] : graph.edges) {
        trip.emplace_back(i, j, 1.0); // dst=i attends to src=j
        trip.emplace_back(j, i, 1.0);
    }
    GatStructure st;
    st.pattern = SparseMatrix::from_triplets(n, n, std::move(trip));
    st.src.reserve(st.pattern.nnz());
    st.dst.reserve(st.pattern.nnz());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t e = st.pattern.row_offsets()[r]; e < st.pattern.row_offsets()[r + 1]; ++e) {
            st.dst.push_back(r);
            st.src.push_back(st.pattern.col_indices()[e]);
        }
    return st;
}

GraphOps prepare_graph(const ModelConfig& config, const PopulationGraph& graph) {
    GraphOps ops;
    ops.arch = config.arch;
    switch (config.arch) {
    case Architecture::mlp: break;
    case Architecture::gcn: ops.gcn_adj = normalize_adjacency(graph); break;
    case Architecture::sage: ops.sage_mean = mean_aggregator(graph); break;
    case Architecture::gat: ops.gat = gat_structure(graph); break;
    case Architecture::cheb: ops.cheb_lap = scaled_laplacian(graph); break;
    }
    return ops;
}

// ----- Layers -------------------------------------------------------------------

Tensor gcn_layer(Trace& tr, const SparseMatrix& adj, Tensor x, Tensor w, Tensor b) {
    return tr.relu(tr.add_rowvec(tr.matmul(tr.spmm(adj, x), w), b));
}

Tensor sage_layer(Trace& tr, const SparseMatrix& mean_agg, Tensor x,
                  Tensor w_self, Tensor w_neigh, Tensor b) {
    Tensor self_part = tr.matmul(x, w_self);
    Tensor neigh_part = tr.matmul(tr.spmm(mean_agg, x), w_neigh);
    return tr.relu(tr.add_rowvec(tr.add(self_part, neigh_part), b));
}

Tensor gat_head(Trace& tr, const GatStructure& st, Tensor x,
                Tensor w, Tensor a_src, Tensor a_dst, double slope) {
    Tensor h = tr.matmul(x, w);
    Tensor c_src = tr.matmul(h, a_src);
    Tensor c_dst = tr.matmul(h, a_dst);
    Tensor scores = tr.leaky_relu(
        tr.add(tr.gather_rows(c_dst, st.dst), tr.gather_rows(c_src, st.src)), slope);
    Tensor alpha = tr.segment_softmax(scores, st.dst);
    return tr.spmm_weighted(st.pattern, alpha, h);
}

Tensor gat_layer(Trace& tr, const GatStructure& st, Tensor x,
                 std::span<const Tensor> w, std::span<const Tensor> a_src,
                 std::span<const Tensor> a_dst, Tensor b, double slope) {
    if (w.empty() || w.size() != a_src.size() || w.size() != a_dst.size())
        throw ValidationError("gat: per-head parameter lists disagree");
    Tensor out = gat_head(tr, st, x, w[0], a_src[0], a_dst[0], slope);
    for (std::size_t h = 1; h < w.size(); ++h)
        out = tr.concat_columns(out, gat_head(tr, st, x, w[h], a_src[h], a_dst[h], slope));
    return tr.relu(tr.add_rowvec(out, b));
}

Tensor cheb_layer(Trace& tr, const SparseMatrix& lap, Tensor x,
                  std::span<const Tensor> w, Tensor b) {
    if (w.empty()) throw ValidationError("cheb: at least one weight matrix required");
    // T_0 X = X, T_1 X = L X, T_k X = 2 L T_{k-1} X - T_{k-2} X; the
    // polynomials act on X, never materialized as matrices.
    Tensor acc = tr.matmul(x, w[0]);
    Tensor prev_prev = x;
    Tensor prev;
    if (w.size() > 1) {
        prev = tr.spmm(lap, x);
        acc = tr.add(acc, tr.matmul(prev, w[1]));
    }
    for (std::size_t k = 2; k < w.size(); ++k) {
        Tensor cur = tr.sub(tr.scale(tr.spmm(lap, prev), 2.0), prev_prev);
        acc = tr.add(acc, tr.matmul(cur, w[k]));
        prev_prev = prev;
        prev = cur;
    }
    return tr.relu(tr.add_rowvec(acc, b));
}

// ----- Forward --------------------------------------------------------------------

BoundParams bind_params(Trace& tr, const ModelParams& params) {
    BoundParams bound;
    bound.source = &params;
    bound.leaves.reserve(params.params.size());
    for (const Param& p : params.params) bound.leaves.push_back(tr.param(p));
    return bound;
}

Tensor BoundParams::at(std::string_view name) const {
    for (std::size_t i = 0; i < source->params.size(); ++i)
        if (source->params[i].name == name) return leaves[i];
    throw ValidationError("model: no bound parameter named '" + std::string(name) + "'");
}

Tensor model_forward(Trace& tr, const ModelConfig& config, const GraphOps& ops,
                     Tensor x, const BoundParams& bound) {
    if (ops.arch != config.arch)
        throw ValidationError("model: graph operators were prepared for a different architecture");
    Tensor h1;
    switch (config.arch) {
    case Architecture::mlp:
        h1 = tr.relu(tr.add_rowvec(tr.matmul(x, bound.at("W1")), bound.at("b1")));
        break;
    case Architecture::gcn:
        h1 = gcn_layer(tr, ops.gcn_adj, x, bound.at("W1"), bound.at("b1"));
        break;
    case Architecture::sage:
        h1 = sage_layer(tr, ops.sage_mean, x, bound.at("W_self"), bound.at("W_neigh"),
                        bound.at("b1"));
        break;
    case Architecture::gat: {
        std::vector<Tensor> w, asrc, adst;
        for (std::size_t h = 0; h < config.heads; ++h) {
            const std::string suffix = "_" + std::to_string(h);
            w.push_back(bound.at("W1" + suffix));
            asrc.push_back(bound.at("a_src" + suffix));
            adst.push_back(bound.at("a_dst" + suffix));
        }
        h1 = gat_layer(tr, ops.gat, x, w, asrc, adst, bound.at("b1"), config.leaky_slope);
        break;
    }
    case Architecture::cheb: {
        std::vector<Tensor> w;
        for (std::size_t k = 0; k < config.cheb_order; ++k)
            w.push_back(bound.at("W1_" + std::to_string(k)));
        h1 = cheb_layer(tr, ops.cheb_lap, x, w, bound.at("b1"));
        break;
    }
    }
    Tensor h2 = tr.relu(tr.add_rowvec(tr.matmul(h1, bound.at("W2")), bound.at("b2")));
    return tr.add_rowvec(tr.matmul(h2, bound.at("W3")), bound.at("b3"));
}

std::vector<double> predict(const ModelConfig& config, const ModelParams& params,
                            const GraphOps& ops, const PopulationGraph& graph) {
    if (graph.feature_dim == 0)
        throw ValidationError("model: graph carries no node features");
    Trace tr;
    BoundParams bound = bind_params(tr, params);
    Tensor x = tr.tensor({graph.n, graph.feature_dim}, graph.features);
    Tensor out = model_forward(tr, config, ops, x, bound);
    return out.values();
}

// ----- Checkpoints -----------------------------------------------------------------

namespace {

std::string hexfloat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_double_token(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw DataError("checkpoint: bad numeric token '" + tok + "' in " + context);
    return v;
}

} // namespace

void save_checkpoint(const ModelConfig& config, const ModelParams& params,
                     const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("checkpoint: cannot open '" + path.string() + "' for writing");
    os << "popgraph-checkpoint 1\n";
    os << "arch " << architecture_name(config.arch) << "\n";
    os << "hidden " << config.hidden << "\n";
    os << "fc " << config.fc << "\n";
    os << "cheb_order " << config.cheb_order << "\n";
    os << "heads " << config.heads << "\n";
    os << "leaky_slope " << hexfloat(config.leaky_slope) << "\n";
    os << "seed " << config.seed << "\n";
    os << "params " << params.params.size() << "\n";
    for (const Param& p : params.params) {
        os << "param " << p.name << " " << p.shape.size();
        for (const std::size_t d : p.shape) os << " " << d;
        os << "\n";
        for (std::size_t i = 0; i < p.value.size(); ++i)
            os << hexfloat(p.value[i]) << (((i + 1) % 8 == 0 || i + 1 == p.value.size()) ? "\n" : " ");
    }
    os << "end\n";
    if (!os) throw DataError("checkpoint: write failed for '" + path.string() + "'");
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("checkpoint: cannot open '" + path.string() + "'");
    std::string word;
    int version = 0;
    is >> word >> version;
    if (word != "popgraph-checkpoint" || version != 1)
        throw DataError("checkpoint: '" + path.string() + "' is not a version-1 checkpoint");

    ModelConfig config;
    std::size_t count = 0;
    for (;;) {
        if (!(is >> word)) throw DataError("checkpoint: truncated header");
        if (word == "arch") {
            std::string a;
            is >> a;
            config.arch = architecture_from_name(a);
        } else if (word == "hidden") {
            is >> config.hidden;
        } else if (word == "fc") {
            is >> config.fc;
        } else if (word == "cheb_order") {
            is >> config.cheb_order;
        } else if (word == "heads") {
            is >> config.heads;
        } else if (word == "leaky_slope") {
            std::string tok;
            is >> tok;
            config.leaky_slope = parse_double_token(tok, "leaky_slope");
        } else if (word == "seed") {
            is >> config.seed;
        } else if (word == "params") {
            is >> count;
            break;
        } else {
            throw DataError("checkpoint: unexpected header field '" + word + "'");
        }
    }

    ModelParams mp;
    for (std::size_t p = 0; p < count; ++p) {
        std::size_t ndim = 0;
        Param param;
        if (!(is >> word >> param.name >> ndim) || word != "param")
            throw DataError("checkpoint: expected parameter header, got '" + word + "'");
        std::size_t total = 1;
        param.shape.resize(ndim);
        for (std::size_t d = 0; d < ndim; ++d) {
            is >> param.shape[d];
            total *= param.shape[d];
        }
        param.value.resize(total);
        for (std::size_t i = 0; i < total; ++i) {
            std::string tok;
            if (!(is >> tok)) throw DataError("checkpoint: truncated values for '" + param.name + "'");
            param.value[i] = parse_double_token(tok, "parameter " + param.name);
        }
        mp.params.push_back(std::move(param));
    }
    is >> word;
    if (word != "end") throw DataError("checkpoint: missing end marker");
    config.validate();
    return {config, std::move(mp)};
}

} // namespace popgraph
