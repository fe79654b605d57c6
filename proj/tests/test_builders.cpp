#include <doctest.h>

#include <cmath>
#include <set>

#include "popgraph/builders.hpp"
#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"
#include "popgraph/synthetic.hpp"

using namespace popgraph;

namespace {

// Cohort with hand-placed imaging rows and phenotype rows.
Cohort handmade(std::vector<std::vector<double>> imaging,
                std::vector<std::vector<double>> phen,
                std::vector<PhenotypeKind> kinds) {
    Cohort c;
    c.n = imaging.size();
    c.schema.imaging_features = imaging[0].size();
    for (std::size_t k = 0; k < kinds.size(); ++k)
        c.schema.phenotypes.emplace_back("q" + std::to_string(k), kinds[k]);
    for (std::size_t i = 0; i < c.n; ++i) {
        c.imaging.insert(c.imaging.end(), imaging[i].begin(), imaging[i].end());
        c.phenotypes.insert(c.phenotypes.end(), phen[i].begin(), phen[i].end());
        c.age.push_back(50.0 + static_cast<double>(i));
    }
    return c;
}

BuilderConfig tiny_budget(std::size_t n, double budget) {
    BuilderConfig cfg;
    cfg.edge_budget_min = cfg.edge_budget_max = budget;
    cfg.reference_n = n; // no rescaling in unit-scale tests
    return cfg;
}

} // namespace

TEST_CASE("cosine similarity") {
    const std::vector<double> u{1, 0}, v{0, 1}, w{1, 1}, z{0, 0};
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(u, v) == 0.0);
    CHECK(cosine_similarity(u, w) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(cosine_similarity(z, w) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(u, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("kronecker similarity") {
    PhenotypeSchema s;
    s.imaging_features = 1;
    s.phenotypes = {{"a", PhenotypeKind::categorical},
                    {"b", PhenotypeKind::categorical},
                    {"c", PhenotypeKind::categorical}};
    const std::vector<double> qi{1, 2, 3}, qj{1, 5, 3}, qk{4, 5, 6};
    CHECK(kronecker_sim(qi, qi, s, 0.1).matches == 3);
    CHECK(kronecker_sim(qi, qi, s, 0.1).sim == 1.0);
    CHECK(kronecker_sim(qi, qj, s, 0.1).matches == 2);
    CHECK(kronecker_sim(qi, qj, s, 0.1).sim == doctest::Approx(2.0 / 3.0));
    CHECK(kronecker_sim(qi, qk, s, 0.1).matches == 0);

    // Continuous phenotypes match within theta.
    s.phenotypes = {{"a", PhenotypeKind::continuous}};
    CHECK(kronecker_sim(std::vector<double>{0.50}, std::vector<double>{0.58}, s, 0.1).matches == 1);
    CHECK(kronecker_sim(std::vector<double>{0.50}, std::vector<double>{0.65}, s, 0.1).matches == 0);
}

TEST_CASE("no-edges builder") {
    SyntheticConfig cfg;
    cfg.n = 10;
    cfg.imaging_features = 4;
    const Cohort c = generate_synthetic(cfg);
    const PopulationGraph g = build_no_edges(c);
    CHECK(g.n == 10);
    CHECK(g.edge_count() == 0);
    CHECK(g.builder == "no-edges");
    CHECK(g.features == c.imaging);
    CHECK(g.labels == c.age);
}

TEST_CASE("random graph probability arithmetic") {
    BuilderConfig cfg; // defaults: budget [40000, 50000] at 6500
    CHECK(er_edge_probability(6500, cfg) == doctest::Approx(0.00213).epsilon(2e-3));
    CHECK(er_edge_probability(6500, cfg) == doctest::Approx(90000.0 / (6500.0 * 6499.0)).epsilon(1e-12));
    // The pair-count scaling keeps the per-pair probability constant.
    CHECK(er_edge_probability(1000, cfg) == doctest::Approx(er_edge_probability(6500, cfg)));
}

TEST_CASE("random graph stays near its budget") {
    SyntheticConfig scfg;
    scfg.n = 1500;
    scfg.imaging_features = 4;
    const Cohort c = generate_synthetic(scfg);
    BuilderConfig cfg;
    cfg.method = BuilderMethod::random;
    const double budget = scaled_budget_midpoint(c.n, cfg);
    const double band = 3.0 * std::sqrt(budget);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        cfg.seed = seed;
        const PopulationGraph g = build_random_er(c, cfg);
        if (std::abs(static_cast<double>(g.edge_count()) - budget) <= band) ++inside;
    }
    CHECK(inside >= 95);
}

TEST_CASE("random graph edge cases") {
    SyntheticConfig scfg;
    scfg.n = 50;
    scfg.imaging_features = 4;
    const Cohort c = generate_synthetic(scfg);

    BuilderConfig zero = tiny_budget(50, 0.0);
    zero.method = BuilderMethod::random;
    CHECK(build_random_er(c, zero).edge_count() == 0);

    BuilderConfig infeasible = tiny_budget(50, 2000.0); // > 50*49/2 = 1225
    CHECK_THROWS_AS(build_random_er(c, infeasible), ValidationError);
}

TEST_CASE("clinical similarity thresholds") {
    // Three subjects, three categorical phenotypes.
    const Cohort c = handmade({{1, 0}, {0, 1}, {1, 1}},
                              {{1, 1, 1}, {1, 1, 2}, {2, 2, 2}},
                              {PhenotypeKind::categorical, PhenotypeKind::categorical,
                               PhenotypeKind::categorical});
    BuilderConfig cfg;
    cfg.mu = 2.0;
    const PopulationGraph g = build_clinical_similarity(c, cfg);
    CHECK(g.edges == std::vector<Edge>{{0, 1}});

    // mu = K with identical phenotype rows: complete graph.
    const Cohort same = handmade({{1, 0}, {0, 1}, {1, 1}},
                                 {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}},
                                 {PhenotypeKind::categorical, PhenotypeKind::categorical,
                                  PhenotypeKind::categorical});
    cfg.mu = 3.0;
    CHECK(build_clinical_similarity(same, cfg).edge_count() == 3);

    // mu above K is rejected as out of range.
    cfg.mu = 4.0;
    CHECK_THROWS_AS(build_clinical_similarity(same, cfg), ValidationError);

    // All-distinct rows with exact-match gamma give the empty graph.
    cfg.mu = 1.0;
    const Cohort distinct = handmade({{1, 0}, {0, 1}, {1, 1}},
                                     {{1, 1, 1}, {2, 2, 2}, {3, 3, 3}},
                                     {PhenotypeKind::categorical, PhenotypeKind::categorical,
                                      PhenotypeKind::categorical});
    CHECK(build_clinical_similarity(distinct, cfg).edge_count() == 0);
}

TEST_CASE("parisot weight formula") {
    // cosine exactly 0.9 between rows 0 and 1; 3 of 5 phenotypes match.
    const Cohort c = handmade(
        {{1.0, 0.0}, {0.9, std::sqrt(1.0 - 0.81)}},
        {{1, 2, 3, 4, 5}, {1, 2, 3, 9, 9}},
        {PhenotypeKind::categorical, PhenotypeKind::categorical, PhenotypeKind::categorical,
         PhenotypeKind::categorical, PhenotypeKind::categorical});
    CHECK(parisot_weight(c, 0, 1, 0.1) == doctest::Approx(2.7).epsilon(1e-12));

    // Identical subjects score cosine 1 times K.
    const Cohort twin = handmade({{0.3, 0.4}, {0.3, 0.4}}, {{1, 1}, {1, 1}},
                                 {PhenotypeKind::categorical, PhenotypeKind::categorical});
    CHECK(parisot_weight(twin, 0, 1, 0.1) == doctest::Approx(2.0).epsilon(1e-12));

    // Orthogonal imaging features kill the weight no matter the phenotypes.
    const Cohort ortho = handmade({{1.0, 0.0}, {0.0, 1.0}}, {{1, 1}, {1, 1}},
                                  {PhenotypeKind::categorical, PhenotypeKind::categorical});
    CHECK(parisot_weight(ortho, 0, 1, 0.1) == 0.0);
}

TEST_CASE("parisot keeps the top-budget pairs with weights") {
    const Cohort ortho = handmade({{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.1}},
                                  {{1}, {1}, {1}}, {PhenotypeKind::categorical});
    BuilderConfig cfg = tiny_budget(3, 3.0);
    const PopulationGraph g = build_parisot(ortho, cfg);
    // Pair (0,1) has weight 0 and is excluded; edge count = min(B, positive pairs).
    CHECK(g.edge_count() == 2);
    CHECK(g.weighted());
    for (const double w : g.weights) CHECK(w > 0.0);

    BuilderConfig one = tiny_budget(3, 1.0);
    const PopulationGraph g1 = build_parisot(ortho, one);
    REQUIRE(g1.edge_count() == 1);
    CHECK(g1.edges[0] == Edge{0, 2}); // highest cosine pair survives
}

TEST_CASE("parisot tie-break prefers the smallest index pair") {
    // Four identical subjects: all six pairs weigh exactly K; budget of 2
    // must keep (0,1) and (0,2).
    const Cohort same = handmade({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}},
                                 {{1}, {1}, {1}, {1}}, {PhenotypeKind::categorical});
    BuilderConfig cfg = tiny_budget(4, 2.0);
    const PopulationGraph g = build_parisot(same, cfg);
    CHECK(g.edges == std::vector<Edge>{{0, 1}, {0, 2}});
}

TEST_CASE("knn graph basics") {
    // Node 0 and 1 nearly parallel, node 2 orthogonal-ish: with k=1 the
    // union contains (0,1) exactly once.
    const Cohort c = handmade({{1.0, 0.02}, {1.0, 0.03}, {0.05, 1.0}},
                              {{1}, {2}, {3}}, {PhenotypeKind::categorical});
    BuilderConfig cfg;
    cfg.k = 1;
    const PopulationGraph g = build_knn(c, cfg, KnnSource::imaging);
    std::size_t count01 = 0;
    for (const auto& e : g.edges)
        if (e == Edge{0, 1}) ++count01;
    CHECK(count01 == 1);

    // k >= n rejected.
    cfg.k = 3;
    CHECK_THROWS_AS(build_knn(c, cfg, KnnSource::imaging), ValidationError);
}

TEST_CASE("knn edge count bounds and complete graph at k=n-1") {
    SyntheticConfig scfg;
    scfg.n = 60;
    scfg.imaging_features = 6;
    scfg.seed = 9;
    const Cohort c = generate_synthetic(scfg);

    BuilderConfig cfg;
    cfg.k = 5;
    for (const KnnSource src : {KnnSource::imaging, KnnSource::nonimaging, KnnSource::all}) {
        const PopulationGraph g = build_knn(c, cfg, src);
        CHECK(g.edge_count() >= c.n * cfg.k / 2);
        CHECK(g.edge_count() <= c.n * cfg.k);
    }

    cfg.k = 59;
    CHECK(build_knn(c, cfg, KnnSource::imaging).edge_count() == 60 * 59 / 2);
}

TEST_CASE("knn ties resolve to the smaller node index") {
    // Nodes 1 and 2 are identical, node 3 is the far outlier; node 0's single
    // neighbor must be node 1, not node 2.
    const Cohort c = handmade({{1.0, 0.0}, {0.8, 0.6}, {0.8, 0.6}, {0.0, 1.0}},
                              {{1}, {1}, {1}, {1}}, {PhenotypeKind::categorical});
    BuilderConfig cfg;
    cfg.k = 1;
    const PopulationGraph g = build_knn(c, cfg, KnnSource::imaging);
    bool found01 = false, found02 = false;
    for (const auto& e : g.edges) {
        found01 = found01 || e == Edge{0, 1};
        found02 = found02 || e == Edge{0, 2};
    }
    CHECK(found01);
    CHECK_FALSE(found02);
}

TEST_CASE("all builders satisfy the graph invariants and determinism") {
    SyntheticConfig scfg;
    scfg.n = 80;
    scfg.imaging_features = 8;
    scfg.categorical_phenotypes = 3;
    scfg.continuous_phenotypes = 3;
    scfg.seed = 21;
    const Cohort c = generate_synthetic(scfg);

    for (const BuilderMethod m :
         {BuilderMethod::no_edges, BuilderMethod::random, BuilderMethod::clinical_sim,
          BuilderMethod::parisot, BuilderMethod::knn_imaging, BuilderMethod::knn_nonimaging,
          BuilderMethod::knn_all}) {
        BuilderConfig cfg = tiny_budget(80, 100.0);
        cfg.method = m;
        cfg.mu = 3.0;
        cfg.seed = 5;
        const PopulationGraph a = build_graph(c, cfg);
        a.validate(); // throws on violation
        const PopulationGraph b = build_graph(c, cfg);
        CHECK(a.edges == b.edges);
        CHECK(a.weights == b.weights);
        CHECK(a.builder == builder_name(m));
    }
}

TEST_CASE("only the random builder consumes the seed") {
    SyntheticConfig scfg;
    scfg.n = 50;
    scfg.imaging_features = 6;
    scfg.categorical_phenotypes = 2;
    scfg.continuous_phenotypes = 2;
    scfg.seed = 33;
    const Cohort c = generate_synthetic(scfg);
    for (const BuilderMethod m : {BuilderMethod::clinical_sim, BuilderMethod::parisot,
                                  BuilderMethod::knn_imaging, BuilderMethod::knn_nonimaging,
                                  BuilderMethod::knn_all}) {
        BuilderConfig a = tiny_budget(50, 60.0);
        a.method = m;
        a.mu = 2.0;
        a.seed = 1;
        BuilderConfig b = a;
        b.seed = 999;
        CHECK(build_graph(c, a).edges == build_graph(c, b).edges);
    }
    BuilderConfig er = tiny_budget(50, 200.0);
    er.method = BuilderMethod::random;
    er.seed = 1;
    BuilderConfig er2 = er;
    er2.seed = 999;
    CHECK(build_graph(c, er).edges != build_graph(c, er2).edges);
}

TEST_CASE("budget edge count doubles only for knn builders") {
    PopulationGraph g = make_graph(4, {{0, 1}, {1, 2}});
    g.builder = "random";
    CHECK(budget_edge_count(g) == 2);
    g.builder = "knn-imaging";
    CHECK(budget_edge_count(g) == 4);
    g.builder = "knn-all";
    CHECK(budget_edge_count(g) == 4);
    g.builder = "parisot";
    CHECK(budget_edge_count(g) == 2);
}

TEST_CASE("builder name round trip") {
    for (const BuilderMethod m :
         {BuilderMethod::no_edges, BuilderMethod::random, BuilderMethod::clinical_sim,
          BuilderMethod::parisot, BuilderMethod::knn_imaging, BuilderMethod::knn_nonimaging,
          BuilderMethod::knn_all})
        CHECK(builder_from_name(builder_name(m)) == m);
    CHECK_THROWS_AS(builder_from_name("bogus"), ValidationError);
}
