#include "popgraph/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "popgraph/errors.hpp"

namespace popgraph {

DegreeStats degree_stats(const PopulationGraph& graph) {
    DegreeStats s;
    if (graph.n == 0) return s;
    const std::vector<std::size_t> deg = graph.degrees();
    std::size_t total = 0;
    s.min = deg[0];
    s.max = deg[0];
    for (const std::size_t d : deg) {
        total += d;
        s.min = std::min(s.min, d);
        s.max = std::max(s.max, d);
        if (d == 0) s.isolated++;
    }
    s.mean = static_cast<double>(total) / static_cast<double>(graph.n);
    return s;
}

std::optional<double> homophily(const PopulationGraph& graph) {
    if (graph.edges.empty()) return std::nullopt;
    if (graph.labels.size() != graph.n)
        throw ValidationError("homophily: graph carries no labels");
    double lo = graph.labels[0], hi = graph.labels[0];
    for (const double y : graph.labels) {
        if (!std::isfinite(y)) throw ValidationError("homophily: non-finite label");
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    if (hi == lo) return 1.0; // all neighbors agree perfectly
    const double range = hi - lo;
    double acc = 0.0;
    for (const auto& [i, j] : graph.edges)
        acc += 1.0 - std::abs(graph.labels[i] - graph.labels[j]) / range;
    return acc / static_cast<double>(graph.edges.size());
}

HomophilyReport graph_report(const PopulationGraph& graph) {
    HomophilyReport r;
    r.builder = graph.builder;
    r.ratio = homophily(graph);
    r.edges = graph.edge_count();
    r.degrees = degree_stats(graph);
    return r;
}

} // namespace popgraph
