#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "popgraph/graph.hpp"

namespace popgraph {

enum class GraphFormat { edge_csv, graphml, dot };

const char* format_name(GraphFormat f);
GraphFormat format_from_name(const std::string& name);

// edge_csv writes "src,dst[,weight]" rows plus a "<stem>.nodes.csv" sidecar
// with one record per node (and its age when labels are included). graphml
// and dot are single files with age as a node attribute.
void export_graph(const PopulationGraph& graph, GraphFormat format,
                  const std::filesystem::path& path, bool include_labels = true);

std::filesystem::path nodes_sidecar_path(const std::filesystem::path& edges_path);

// Reads an edge_csv export back; features stay empty, labels are filled when
// the sidecar carries ages.
PopulationGraph load_graph_csv(const std::filesystem::path& edges_path);

// Fruchterman-Reingold in the unit square; positions are clamped to [0,1]^2
// each iteration. Deterministic given the seed; a single node sits at the
// center.
std::vector<std::array<double, 2>> layout_graph(const PopulationGraph& graph,
                                                std::size_t iterations = 50,
                                                std::uint64_t seed = 0);

void write_layout_csv(const std::vector<std::array<double, 2>>& coords,
                      const std::filesystem::path& path);

} // namespace popgraph
