#include <doctest.h>

#include <cmath>

#include "popgraph/builders.hpp"
#include "popgraph/metrics.hpp"
#include "popgraph/rng.hpp"

using namespace popgraph;

namespace {

PopulationGraph labeled(std::size_t n, std::vector<Edge> edges, std::vector<double> labels) {
    PopulationGraph g = make_graph(n, std::move(edges));
    g.labels = std::move(labels);
    return g;
}

} // namespace

TEST_CASE("homophily extremes") {
    // Edges join only equal-label nodes; labels are not constant overall.
    const PopulationGraph equal = labeled(4, {{0, 1}, {2, 3}}, {5, 5, 9, 9});
    CHECK(homophily(equal) == 1.0);

    // A single edge joining the extreme labels.
    const PopulationGraph extreme = labeled(3, {{0, 2}}, {47, 60, 81});
    CHECK(homophily(extreme) == 0.0);

    // Empty edge set: absent, not an error.
    const PopulationGraph none = labeled(3, {}, {1, 2, 3});
    CHECK_FALSE(homophily(none).has_value());

    // Constant labels: defined as 1.
    const PopulationGraph constant = labeled(3, {{0, 1}}, {4, 4, 4});
    CHECK(homophily(constant) == 1.0);
}

TEST_CASE("homophily of a random graph with uniform labels approaches 2/3") {
    // E|y_i - y_j| = 1/3 for independent uniforms on [0,1].
    const std::size_t n = 2000;
    Rng rng(77);
    std::vector<double> labels(n);
    for (double& y : labels) y = rng.uniform();

    std::vector<Edge> edges;
    const double p = 2.0 * 20000.0 / (static_cast<double>(n) * (n - 1));
    for (std::uint32_t i = 0; i + 1 < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);

    const PopulationGraph g = labeled(n, std::move(edges), std::move(labels));
    REQUIRE(g.edge_count() > 15000);
    CHECK(*homophily(g) == doctest::Approx(2.0 / 3.0).epsilon(0.015));
}

TEST_CASE("homophily is invariant under positive affine relabeling") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 30;
        std::vector<double> labels(n);
        for (double& y : labels) y = rng.uniform(40.0, 90.0);
        std::vector<Edge> edges;
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j)
                if (rng.uniform() < 0.2) edges.emplace_back(i, j);
        if (edges.empty()) continue;

        const PopulationGraph g = labeled(n, edges, labels);
        std::vector<double> rescaled(n);
        for (std::size_t i = 0; i < n; ++i) rescaled[i] = 2.5 * labels[i] + 17.0;
        const PopulationGraph h = labeled(n, edges, rescaled);
        CHECK(*homophily(h) == doctest::Approx(*homophily(g)).epsilon(1e-12));
    }
}

TEST_CASE("adding an extreme edge strictly lowers homophily") {
    const PopulationGraph before = labeled(4, {{0, 1}, {1, 2}}, {10, 11, 12, 30});
    PopulationGraph after = labeled(4, {{0, 1}, {1, 2}, {0, 3}}, {10, 11, 12, 30});
    // Node 0 carries the min label, node 3 the max.
    CHECK(*homophily(after) < *homophily(before));
}

TEST_CASE("homophily stays within [0,1] on random graphs") {
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng.below(40);
        std::vector<double> labels(n);
        for (double& y : labels) y = rng.uniform(-5.0, 5.0);
        std::vector<Edge> edges;
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j)
                if (rng.uniform() < 0.3) edges.emplace_back(i, j);
        const PopulationGraph g = labeled(n, std::move(edges), std::move(labels));
        const auto h = homophily(g);
        if (h) {
            CHECK(*h >= 0.0);
            CHECK(*h <= 1.0);
        }
    }
}

TEST_CASE("degree statistics") {
    const PopulationGraph empty = labeled(5, {}, {1, 2, 3, 4, 5});
    const DegreeStats e = degree_stats(empty);
    CHECK(e.mean == 0.0);
    CHECK(e.min == 0);
    CHECK(e.max == 0);
    CHECK(e.isolated == 5);

    const PopulationGraph complete =
        labeled(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {1, 2, 3, 4});
    const DegreeStats c = degree_stats(complete);
    CHECK(c.mean == 3.0);
    CHECK(c.min == 3);
    CHECK(c.max == 3);
    CHECK(c.isolated == 0);

    const PopulationGraph path = labeled(3, {{0, 1}, {1, 2}}, {1, 2, 3});
    const DegreeStats p = degree_stats(path);
    CHECK(p.mean == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(p.min == 1);
    CHECK(p.max == 2);
    CHECK(p.isolated == 0);
}

TEST_CASE("graph report mirrors its parts") {
    PopulationGraph g = labeled(3, {{0, 1}}, {1, 2, 3});
    g.builder = "random";
    const HomophilyReport r = graph_report(g);
    CHECK(r.builder == "random");
    CHECK(r.edges == 1);
    CHECK(r.ratio == homophily(g));
    CHECK(r.degrees.isolated == 1);
}
