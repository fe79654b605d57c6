#include "popgraph/graph.hpp"

#include <algorithm>
#include <string>

#include "popgraph/errors.hpp"

namespace popgraph {

void PopulationGraph::validate() const {
    if (!features.empty() && features.size() != n * feature_dim)
        throw ValidationError("graph: feature matrix size mismatch");
    if (!labels.empty() && labels.size() != n)
        throw ValidationError("graph: label vector size mismatch");
    if (!weights.empty() && weights.size() != edges.size())
        throw ValidationError("graph: weight vector size mismatch");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        if (i >= j) throw ValidationError("graph: edge endpoints must satisfy i < j");
        if (j >= n)
            throw ValidationError("graph: edge endpoint " + std::to_string(j) +
                                  " out of range for " + std::to_string(n) + " nodes");
        if (e > 0 && !(edges[e - 1] < edges[e]))
            throw ValidationError("graph: edges must be sorted and unique");
    }
}

std::vector<std::size_t> PopulationGraph::degrees() const {
    std::vector<std::size_t> deg(n, 0);
    for (const auto& [i, j] : edges) {
        deg[i]++;
        deg[j]++;
    }
    return deg;
}

PopulationGraph make_graph(std::size_t n, std::vector<Edge> edges, std::vector<double> weights) {
    if (!weights.empty() && weights.size() != edges.size())
        throw ValidationError("graph: weight vector size mismatch");
    // Orient, then sort edges (carrying weights along), then deduplicate.
    for (auto& [i, j] : edges) {
        if (i == j) throw ValidationError("graph: self-loop at node " + std::to_string(i));
        if (i > j) std::swap(i, j);
    }
    std::vector<std::size_t> order(edges.size());
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });

    PopulationGraph g;
    g.n = n;
    g.edges.reserve(edges.size());
    if (!weights.empty()) g.weights.reserve(edges.size());
    for (const std::size_t e : order) {
        if (!g.edges.empty() && g.edges.back() == edges[e]) continue;
        g.edges.push_back(edges[e]);
        if (!weights.empty()) g.weights.push_back(weights[e]);
    }
    g.validate();
    return g;
}

} // namespace popgraph
