#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace popgraph {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Undirected graph over cohort subjects. Edges are stored once as (i, j)
// with i < j, sorted and unique; weights, when present, align with edges.
struct PopulationGraph {
    std::size_t n = 0;
    std::size_t feature_dim = 0;
    std::vector<double> features; // n x feature_dim, the cohort imaging matrix
    std::vector<double> labels;   // age in years
    std::vector<Edge> edges;
    std::vector<double> weights; // empty or edges.size()
    std::string builder;         // provenance tag

    std::size_t edge_count() const { return edges.size(); }
    bool weighted() const { return !weights.empty(); }

    // Checks self-loop freedom, ordering, uniqueness, endpoint bounds and
    // array sizes; throws ValidationError on violation.
    void validate() const;

    // Undirected degree of every node.
    std::vector<std::size_t> degrees() const;
};

// Canonicalizes an edge list (orients pairs, sorts, deduplicates) and wires
// up a graph over the cohort-shaped node arrays.
PopulationGraph make_graph(std::size_t n, std::vector<Edge> edges,
                           std::vector<double> weights = {});

} // namespace popgraph
