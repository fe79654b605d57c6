#include "popgraph/builders.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"

namespace popgraph {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;

void attach_cohort(PopulationGraph& g, const Cohort& cohort, const char* tag) {
    g.feature_dim = cohort.schema.imaging_features;
    g.features = cohort.imaging;
    g.labels = cohort.age;
    g.builder = tag;
}

// Row-normalized copy of a feature matrix; zero rows stay zero so their
// cosine similarity is 0 against everything.
RowMat unit_rows(const double* data, std::size_t n, std::size_t dim) {
    ConstMap x(data, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    RowMat out = x;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
    }
    return out;
}

RowMat knn_basis(const Cohort& cohort, KnnSource source) {
    const std::size_t n = cohort.n;
    const std::size_t m = cohort.schema.imaging_features;
    const std::size_t k = cohort.schema.count();
    switch (source) {
    case KnnSource::imaging:
        return unit_rows(cohort.imaging.data(), n, m);
    case KnnSource::nonimaging:
        return unit_rows(cohort.phenotypes.data(), n, k);
    case KnnSource::all: {
        RowMat joined(n, m + k);
        joined.leftCols(static_cast<Eigen::Index>(m)) =
            ConstMap(cohort.imaging.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
        joined.rightCols(static_cast<Eigen::Index>(k)) =
            ConstMap(cohort.phenotypes.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
        for (Eigen::Index i = 0; i < joined.rows(); ++i) {
            const double norm = joined.row(i).norm();
            if (norm > 0.0) joined.row(i) /= norm;
        }
        return joined;
    }
    }
    throw ValidationError("knn: unknown source");
}

} // namespace

const char* builder_name(BuilderMethod m) {
    switch (m) {
    case BuilderMethod::no_edges: return "no-edges";
    case BuilderMethod::random: return "random";
    case BuilderMethod::clinical_sim: return "clinical-sim";
    case BuilderMethod::parisot: return "parisot";
    case BuilderMethod::knn_imaging: return "knn-imaging";
    case BuilderMethod::knn_nonimaging: return "knn-nonimaging";
    case BuilderMethod::knn_all: return "knn-all";
    }
    return "?";
}

BuilderMethod builder_from_name(const std::string& name) {
    if (name == "no-edges") return BuilderMethod::no_edges;
    if (name == "random") return BuilderMethod::random;
    if (name == "clinical-sim") return BuilderMethod::clinical_sim;
    if (name == "parisot") return BuilderMethod::parisot;
    if (name == "knn-imaging") return BuilderMethod::knn_imaging;
    if (name == "knn-nonimaging") return BuilderMethod::knn_nonimaging;
    if (name == "knn-all") return BuilderMethod::knn_all;
    throw ValidationError("builder: unknown method '" + name + "'");
}

void BuilderConfig::validate(std::size_t phenotype_count) const {
    if (k < 1) throw ValidationError("builder: k must be >= 1");
    // mu is only meaningful for the clinical builder, which checks it
    // against the phenotype count it actually sees.
    if (method == BuilderMethod::clinical_sim &&
        (mu < 0.0 || mu > static_cast<double>(phenotype_count)))
        throw ValidationError("builder: mu must lie in [0, " + std::to_string(phenotype_count) + "]");
    if (theta <= 0.0) throw ValidationError("builder: theta must be positive");
    if (edge_budget_min > edge_budget_max)
        throw ValidationError("builder: edge budget min exceeds max");
    if (edge_budget_min < 0.0) throw ValidationError("builder: edge budget must be nonnegative");
    if (reference_n < 2) throw ValidationError("builder: reference_n must be >= 2");
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw ShapeError("cosine: vector lengths disagree: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

KroneckerSim kronecker_sim(std::span<const double> q_i, std::span<const double> q_j,
                           const PhenotypeSchema& schema, double theta) {
    const std::size_t k = schema.count();
    if (q_i.size() != k || q_j.size() != k)
        throw ShapeError("kronecker: phenotype vectors must have length " + std::to_string(k));
    std::size_t matches = 0;
    for (std::size_t c = 0; c < k; ++c) {
        if (schema.phenotypes[c].second == PhenotypeKind::categorical) {
            if (q_i[c] == q_j[c]) ++matches;
        } else {
            if (std::abs(q_i[c] - q_j[c]) <= theta) ++matches;
        }
    }
    return {matches, static_cast<double>(matches) / static_cast<double>(k)};
}

double parisot_weight(const Cohort& cohort, std::size_t i, std::size_t j, double theta) {
    const double cos = cosine_similarity(cohort.img_row(i), cohort.img_row(j));
    const auto ks = kronecker_sim(cohort.phen_row(i), cohort.phen_row(j), cohort.schema, theta);
    return cos * static_cast<double>(ks.matches);
}

double scaled_budget(double budget_at_reference, std::size_t n, std::size_t reference_n) {
    const double pairs_n = static_cast<double>(n) * static_cast<double>(n - 1);
    const double pairs_ref = static_cast<double>(reference_n) * static_cast<double>(reference_n - 1);
    return budget_at_reference * pairs_n / pairs_ref;
}

double scaled_budget_midpoint(std::size_t n, const BuilderConfig& config) {
    const double mid = 0.5 * (config.edge_budget_min + config.edge_budget_max);
    return scaled_budget(mid, n, config.reference_n);
}

double er_edge_probability(std::size_t n, const BuilderConfig& config) {
    const double budget = scaled_budget_midpoint(n, config);
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
    return pairs > 0.0 ? 2.0 * budget / pairs : 0.0;
}

PopulationGraph build_no_edges(const Cohort& cohort) {
    PopulationGraph g = make_graph(cohort.n, {});
    attach_cohort(g, cohort, "no-edges");
    return g;
}

PopulationGraph build_random_er(const Cohort& cohort, const BuilderConfig& config) {
    config.validate(cohort.schema.count());
    const std::size_t n = cohort.n;
    const double max_budget = scaled_budget(config.edge_budget_max, n, config.reference_n);
    const double all_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    if (max_budget > all_pairs)
        throw ValidationError("random: edge budget " + std::to_string(max_budget) +
                              " exceeds the " + std::to_string(all_pairs) + " available pairs");
    const double p = er_edge_probability(n, config);
    Rng rng(config.seed);
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i + 1 < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);
    PopulationGraph g = make_graph(n, std::move(edges));
    attach_cohort(g, cohort, "random");
    return g;
}

PopulationGraph build_clinical_similarity(const Cohort& cohort, const BuilderConfig& config) {
    config.validate(cohort.schema.count());
    const std::size_t n = cohort.n;
    const std::size_t k = cohort.schema.count();
    if (config.mu < 0.0 || config.mu > static_cast<double>(k))
        throw ValidationError("builder: mu must lie in [0, " + std::to_string(k) + "]");
    std::vector<bool> categorical(k);
    for (std::size_t c = 0; c < k; ++c)
        categorical[c] = cohort.schema.phenotypes[c].second == PhenotypeKind::categorical;

    std::vector<Edge> edges;
    const double* q = cohort.phenotypes.data();
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
        const double* qi = q + static_cast<std::size_t>(i) * k;
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double* qj = q + static_cast<std::size_t>(j) * k;
            std::size_t matches = 0;
            for (std::size_t c = 0; c < k; ++c) {
                if (categorical[c] ? (qi[c] == qj[c]) : (std::abs(qi[c] - qj[c]) <= config.theta))
                    ++matches;
            }
            if (static_cast<double>(matches) >= config.mu) edges.emplace_back(i, j);
        }
    }
    PopulationGraph g = make_graph(n, std::move(edges));
    attach_cohort(g, cohort, "clinical-sim");
    return g;
}

PopulationGraph build_parisot(const Cohort& cohort, const BuilderConfig& config) {
    config.validate(cohort.schema.count());
    const std::size_t n = cohort.n;
    const std::size_t k = cohort.schema.count();
    const auto budget = static_cast<std::size_t>(std::llround(scaled_budget_midpoint(n, config)));

    std::vector<bool> categorical(k);
    for (std::size_t c = 0; c < k; ++c)
        categorical[c] = cohort.schema.phenotypes[c].second == PhenotypeKind::categorical;

    struct Entry {
        double w;
        std::uint32_t i, j;

        // Ties prefer the smaller index pair.
        bool better_than(const Entry& o) const {
            if (w != o.w) return w > o.w;
            return std::make_pair(i, j) < std::make_pair(o.i, o.j);
        }
    };
    // Keep the best `budget` entries; the heap top is the worst kept one.
    struct WorstOnTop {
        bool operator()(const Entry& a, const Entry& b) const { return a.better_than(b); }
    };
    std::priority_queue<Entry, std::vector<Entry>, WorstOnTop> heap;

    const RowMat unit = unit_rows(cohort.imaging.data(), n, cohort.schema.imaging_features);
    const double* q = cohort.phenotypes.data();
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
        const double* qi = q + static_cast<std::size_t>(i) * k;
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double* qj = q + static_cast<std::size_t>(j) * k;
            std::size_t matches = 0;
            for (std::size_t c = 0; c < k; ++c) {
                if (categorical[c] ? (qi[c] == qj[c]) : (std::abs(qi[c] - qj[c]) <= config.theta))
                    ++matches;
            }
            if (matches == 0) continue;
            const double w = unit.row(i).dot(unit.row(j)) * static_cast<double>(matches);
            if (w <= 0.0) continue;
            const Entry e{w, i, j};
            if (heap.size() < budget) {
                heap.push(e);
            } else if (budget > 0 && e.better_than(heap.top())) {
                heap.pop();
                heap.push(e);
            }
        }
    }

    std::vector<Edge> edges;
    std::vector<double> weights;
    edges.reserve(heap.size());
    weights.reserve(heap.size());
    while (!heap.empty()) {
        const Entry e = heap.top();
        heap.pop();
        edges.emplace_back(e.i, e.j);
        weights.push_back(e.w);
    }
    PopulationGraph g = make_graph(n, std::move(edges), std::move(weights));
    attach_cohort(g, cohort, "parisot");
    return g;
}

PopulationGraph build_knn(const Cohort& cohort, const BuilderConfig& config, KnnSource source) {
    config.validate(cohort.schema.count());
    const std::size_t n = cohort.n;
    if (config.k >= n)
        throw ValidationError("knn: k=" + std::to_string(config.k) + " requires more than " +
                              std::to_string(n) + " nodes");

    const RowMat unit = knn_basis(cohort, source);
    const char* tag = source == KnnSource::imaging      ? "knn-imaging"
                      : source == KnnSource::nonimaging ? "knn-nonimaging"
                                                        : "knn-all";

    std::vector<Edge> edges;
    edges.reserve(n * config.k);

    // Process rows in blocks so the similarity buffer stays small.
    const std::size_t block = 256;
    RowMat sims;
    std::vector<std::uint32_t> candidates(n);
    for (std::size_t start = 0; start < n; start += block) {
        const std::size_t stop = std::min(start + block, n);
        sims.noalias() = unit.middleRows(static_cast<Eigen::Index>(start),
                                         static_cast<Eigen::Index>(stop - start)) *
                         unit.transpose();
        for (std::size_t i = start; i < stop; ++i) {
            const double* row = sims.data() + (i - start) * n;
            for (std::uint32_t c = 0; c < n; ++c) candidates[c] = c;
            candidates[i] = candidates[n - 1]; // drop self
            const auto take = static_cast<std::ptrdiff_t>(config.k);
            // Highest similarity first; ties to the smaller node index.
            auto better = [&](std::uint32_t a, std::uint32_t b) {
                if (row[a] != row[b]) return row[a] > row[b];
                return a < b;
            };
            std::nth_element(candidates.begin(), candidates.begin() + take - 1,
                             candidates.end() - 1, better);
            for (std::ptrdiff_t t = 0; t < take; ++t) {
                const std::uint32_t j = candidates[static_cast<std::size_t>(t)];
                edges.emplace_back(static_cast<std::uint32_t>(i), j);
            }
        }
    }
    for (auto& [i, j] : edges)
        if (i > j) std::swap(i, j);
    PopulationGraph g = make_graph(n, std::move(edges)); // union symmetrization via dedup
    attach_cohort(g, cohort, tag);
    return g;
}

PopulationGraph build_graph(const Cohort& cohort, const BuilderConfig& config) {
    switch (config.method) {
    case BuilderMethod::no_edges: return build_no_edges(cohort);
    case BuilderMethod::random: return build_random_er(cohort, config);
    case BuilderMethod::clinical_sim: return build_clinical_similarity(cohort, config);
    case BuilderMethod::parisot: return build_parisot(cohort, config);
    case BuilderMethod::knn_imaging: return build_knn(cohort, config, KnnSource::imaging);
    case BuilderMethod::knn_nonimaging: return build_knn(cohort, config, KnnSource::nonimaging);
    case BuilderMethod::knn_all: return build_knn(cohort, config, KnnSource::all);
    }
    throw ValidationError("builder: unknown method");
}

std::size_t budget_edge_count(const PopulationGraph& graph) {
    if (graph.builder.rfind("knn", 0) == 0) return 2 * graph.edge_count();
    return graph.edge_count();
}

} // namespace popgraph
