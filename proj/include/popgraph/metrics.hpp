#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "popgraph/graph.hpp"

namespace popgraph {

struct DegreeStats {
    double mean = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
    std::size_t isolated = 0;
};

DegreeStats degree_stats(const PopulationGraph& graph);

// Regression homophily: mean over edges of 1 - |y_i - y_j| / (y_max - y_min),
// with the range taken over all graph labels. Empty edge set -> absent;
// constant labels -> 1.
std::optional<double> homophily(const PopulationGraph& graph);

struct HomophilyReport {
    std::string builder;
    std::optional<double> ratio;
    std::size_t edges = 0;
    DegreeStats degrees;
};

HomophilyReport graph_report(const PopulationGraph& graph);

} // namespace popgraph
