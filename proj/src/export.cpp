#include "popgraph/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"

namespace popgraph {

const char* format_name(GraphFormat f) {
    switch (f) {
    case GraphFormat::edge_csv: return "edge-csv";
    case GraphFormat::graphml: return "graphml";
    case GraphFormat::dot: return "dot";
    }
    return "?";
}

GraphFormat format_from_name(const std::string& name) {
    if (name == "edge-csv" || name == "csv") return GraphFormat::edge_csv;
    if (name == "graphml") return GraphFormat::graphml;
    if (name == "dot") return GraphFormat::dot;
    throw ValidationError("export: unknown format '" + name + "'");
}

std::filesystem::path nodes_sidecar_path(const std::filesystem::path& edges_path) {
    std::filesystem::path p = edges_path;
    p.replace_extension();
    p += ".nodes.csv";
    return p;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_edge_csv(const PopulationGraph& g, const std::filesystem::path& path,
                    bool include_labels) {
    std::ofstream os(path);
    if (!os) throw DataError("export: cannot open '" + path.string() + "' for writing");
    os << (g.weighted() ? "src,dst,weight\n" : "src,dst\n");
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        os << g.edges[e].first << "," << g.edges[e].second;
        if (g.weighted()) os << "," << num(g.weights[e]);
        os << "\n";
    }
    if (!os) throw DataError("export: write failed for '" + path.string() + "'");

    std::ofstream ns(nodes_sidecar_path(path));
    if (!ns) throw DataError("export: cannot open node sidecar for '" + path.string() + "'");
    const bool ages = include_labels && g.labels.size() == g.n;
    ns << (ages ? "node,age\n" : "node\n");
    for (std::size_t i = 0; i < g.n; ++i) {
        ns << i;
        if (ages) ns << "," << num(g.labels[i]);
        ns << "\n";
    }
    if (!ns) throw DataError("export: write failed for node sidecar of '" + path.string() + "'");
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

void write_graphml(const PopulationGraph& g, const std::filesystem::path& path,
                   bool include_labels) {
    std::ofstream os(path);
    if (!os) throw DataError("export: cannot open '" + path.string() + "' for writing");
    const bool ages = include_labels && g.labels.size() == g.n;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
          "         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
          "         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
          "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n";
    if (ages)
        os << "  <key id=\"age\" for=\"node\" attr.name=\"age\" attr.type=\"double\"/>\n";
    if (g.weighted())
        os << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
    os << "  <graph id=\"" << xml_escape(g.builder.empty() ? "popgraph" : g.builder)
       << "\" edgedefault=\"undirected\">\n";
    for (std::size_t i = 0; i < g.n; ++i) {
        if (ages)
            os << "    <node id=\"n" << i << "\"><data key=\"age\">" << num(g.labels[i])
               << "</data></node>\n";
        else
            os << "    <node id=\"n" << i << "\"/>\n";
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        os << "    <edge source=\"n" << g.edges[e].first << "\" target=\"n" << g.edges[e].second
           << "\"";
        if (g.weighted())
            os << "><data key=\"weight\">" << num(g.weights[e]) << "</data></edge>\n";
        else
            os << "/>\n";
    }
    os << "  </graph>\n</graphml>\n";
    if (!os) throw DataError("export: write failed for '" + path.string() + "'");
}

void write_dot(const PopulationGraph& g, const std::filesystem::path& path, bool include_labels) {
    std::ofstream os(path);
    if (!os) throw DataError("export: cannot open '" + path.string() + "' for writing");
    const bool ages = include_labels && g.labels.size() == g.n;
    os << "graph popgraph {\n";
    for (std::size_t i = 0; i < g.n; ++i) {
        os << "  " << i;
        if (ages) os << " [age=\"" << num(g.labels[i]) << "\"]";
        os << ";\n";
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        os << "  " << g.edges[e].first << " -- " << g.edges[e].second;
        if (g.weighted()) os << " [weight=\"" << num(g.weights[e]) << "\"]";
        os << ";\n";
    }
    os << "}\n";
    if (!os) throw DataError("export: write failed for '" + path.string() + "'");
}

} // namespace

void export_graph(const PopulationGraph& graph, GraphFormat format,
                  const std::filesystem::path& path, bool include_labels) {
    switch (format) {
    case GraphFormat::edge_csv: write_edge_csv(graph, path, include_labels); return;
    case GraphFormat::graphml: write_graphml(graph, path, include_labels); return;
    case GraphFormat::dot: write_dot(graph, path, include_labels); return;
    }
    throw ValidationError("export: unknown format");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

PopulationGraph load_graph_csv(const std::filesystem::path& edges_path) {
    std::ifstream ns(nodes_sidecar_path(edges_path));
    if (!ns)
        throw DataError("graph: missing node sidecar '" + nodes_sidecar_path(edges_path).string() +
                        "'");
    std::string line;
    if (!std::getline(ns, line)) throw DataError("graph: empty node sidecar");
    const bool ages = split_csv(line).size() >= 2;
    PopulationGraph g;
    while (std::getline(ns, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (ages) {
            if (cells.size() < 2) throw DataError("graph: malformed node record '" + line + "'");
            g.labels.push_back(std::strtod(cells[1].c_str(), nullptr));
        }
        g.n += 1;
    }

    std::ifstream es(edges_path);
    if (!es) throw DataError("graph: cannot open '" + edges_path.string() + "'");
    if (!std::getline(es, line)) throw DataError("graph: '" + edges_path.string() + "' is empty");
    const bool weighted = split_csv(line).size() >= 3;
    std::vector<Edge> edges;
    std::vector<double> weights;
    std::size_t row = 1;
    while (std::getline(es, line)) {
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv(line);
        if (cells.size() < 2 || (weighted && cells.size() < 3))
            throw DataError("graph: malformed edge at row " + std::to_string(row));
        const auto src = static_cast<std::uint32_t>(std::strtoul(cells[0].c_str(), nullptr, 10));
        const auto dst = static_cast<std::uint32_t>(std::strtoul(cells[1].c_str(), nullptr, 10));
        edges.emplace_back(src, dst);
        if (weighted) weights.push_back(std::strtod(cells[2].c_str(), nullptr));
    }
    PopulationGraph out = make_graph(g.n, std::move(edges), std::move(weights));
    out.labels = std::move(g.labels);
    out.builder = "loaded";
    return out;
}

std::vector<std::array<double, 2>> layout_graph(const PopulationGraph& graph,
                                                std::size_t iterations, std::uint64_t seed) {
    const std::size_t n = graph.n;
    if (n == 0) return {};
    if (n == 1) return {{0.5, 0.5}};

    Rng rng(seed);
    std::vector<std::array<double, 2>> pos(n);
    for (auto& p : pos) {
        p[0] = rng.uniform();
        p[1] = rng.uniform();
    }

    const double k = std::sqrt(1.0 / static_cast<double>(n));
    std::vector<std::array<double, 2>> disp(n);
    for (std::size_t it = 0; it < iterations; ++it) {
        const double temp =
            0.1 * (1.0 - static_cast<double>(it) / static_cast<double>(iterations));
        for (auto& d : disp) d = {0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = pos[i][0] - pos[j][0];
                double dy = pos[i][1] - pos[j][1];
                double d2 = dx * dx + dy * dy;
                if (d2 < 1e-12) { // coincident points nudge apart deterministically
                    dx = 1e-6 * (static_cast<double>(i % 7) + 1.0);
                    dy = 1e-6 * (static_cast<double>(j % 5) + 1.0);
                    d2 = dx * dx + dy * dy;
                }
                const double d = std::sqrt(d2);
                const double force = k * k / d; // repulsion
                disp[i][0] += dx / d * force;
                disp[i][1] += dy / d * force;
                disp[j][0] -= dx / d * force;
                disp[j][1] -= dy / d * force;
            }
        }
        for (const auto& [a, b] : graph.edges) {
            double dx = pos[a][0] - pos[b][0];
            double dy = pos[a][1] - pos[b][1];
            const double d = std::max(std::sqrt(dx * dx + dy * dy), 1e-9);
            const double force = d * d / k; // attraction
            disp[a][0] -= dx / d * force;
            disp[a][1] -= dy / d * force;
            disp[b][0] += dx / d * force;
            disp[b][1] += dy / d * force;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::sqrt(disp[i][0] * disp[i][0] + disp[i][1] * disp[i][1]);
            if (d > 0.0) {
                const double step = std::min(d, temp);
                pos[i][0] += disp[i][0] / d * step;
                pos[i][1] += disp[i][1] / d * step;
            }
            pos[i][0] = std::clamp(pos[i][0], 0.0, 1.0);
            pos[i][1] = std::clamp(pos[i][1], 0.0, 1.0);
        }
    }
    return pos;
}

void write_layout_csv(const std::vector<std::array<double, 2>>& coords,
                      const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("layout: cannot open '" + path.string() + "' for writing");
    os << "node,x,y\n";
    for (std::size_t i = 0; i < coords.size(); ++i)
        os << i << "," << num(coords[i][0]) << "," << num(coords[i][1]) << "\n";
    if (!os) throw DataError("layout: write failed for '" + path.string() + "'");
}

} // namespace popgraph
