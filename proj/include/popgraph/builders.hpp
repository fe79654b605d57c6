#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "popgraph/cohort.hpp"
#include "popgraph/graph.hpp"

namespace popgraph {

enum class BuilderMethod {
    no_edges,
    random,
    clinical_sim,
    parisot,
    knn_imaging,
    knn_nonimaging,
    knn_all,
};

const char* builder_name(BuilderMethod m);
BuilderMethod builder_from_name(const std::string& name);

struct BuilderConfig {
    BuilderMethod method = BuilderMethod::knn_imaging;
    double mu = 18.0;    // clinical match threshold, in match-count units
    double theta = 0.1;  // unit-step tolerance for continuous phenotypes
    std::size_t k = 5;   // neighbors per node
    double edge_budget_min = 40000.0; // at the reference cohort size
    double edge_budget_max = 50000.0;
    std::size_t reference_n = 6500; // N0 the budget is quoted at
    std::uint64_t seed = 0;

    void validate(std::size_t phenotype_count) const;
};

// u.v / (|u||v|); similarity with a zero vector is defined as 0.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct KroneckerSim {
    std::size_t matches = 0; // phenotypes where the two subjects agree
    double sim = 0.0;        // matches / K
};

// Per-phenotype agreement: exact equality for categorical columns,
// |difference| <= theta for continuous ones.
KroneckerSim kronecker_sim(std::span<const double> q_i, std::span<const double> q_j,
                           const PhenotypeSchema& schema, double theta);

// Cosine of imaging features times the count of gamma-matching phenotypes.
double parisot_weight(const Cohort& cohort, std::size_t i, std::size_t j, double theta);

// Budget midpoint rescaled from the reference cohort size by the ratio of
// unordered pair counts.
double scaled_budget(double budget_at_reference, std::size_t n, std::size_t reference_n);
double scaled_budget_midpoint(std::size_t n, const BuilderConfig& config);

// Per-pair inclusion probability for the random graph.
double er_edge_probability(std::size_t n, const BuilderConfig& config);

PopulationGraph build_no_edges(const Cohort& cohort);
PopulationGraph build_random_er(const Cohort& cohort, const BuilderConfig& config);
PopulationGraph build_clinical_similarity(const Cohort& cohort, const BuilderConfig& config);
PopulationGraph build_parisot(const Cohort& cohort, const BuilderConfig& config);

enum class KnnSource { imaging, nonimaging, all };
PopulationGraph build_knn(const Cohort& cohort, const BuilderConfig& config, KnnSource source);

// Dispatch on config.method.
PopulationGraph build_graph(const Cohort& cohort, const BuilderConfig& config);

// Edge count on the scale the budget is quoted at: symmetrized directed
// entries (2|E|) for the kNN builders, whose k counts per-node directed
// links, and undirected pairs (|E|) for everything else.
std::size_t budget_edge_count(const PopulationGraph& graph);

} // namespace popgraph
