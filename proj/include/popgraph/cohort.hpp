#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace popgraph {

enum class PhenotypeKind { categorical, continuous };

// Ordered non-imaging phenotype descriptors plus the imaging feature count.
struct PhenotypeSchema {
    std::vector<std::pair<std::string, PhenotypeKind>> phenotypes;
    std::size_t imaging_features = 68;

    std::size_t count() const { return phenotypes.size(); } // K
    void validate() const;
};

// Subjects x (imaging features, non-imaging phenotypes, age). Row-major.
struct Cohort {
    std::size_t n = 0;
    PhenotypeSchema schema;
    std::vector<double> imaging;    // n x M
    std::vector<double> phenotypes; // n x K
    std::vector<double> age;        // years

    double img(std::size_t i, std::size_t m) const { return imaging[i * schema.imaging_features + m]; }
    double phen(std::size_t i, std::size_t k) const { return phenotypes[i * schema.count() + k]; }
    std::span<const double> img_row(std::size_t i) const {
        return {imaging.data() + i * schema.imaging_features, schema.imaging_features};
    }
    std::span<const double> phen_row(std::size_t i) const {
        return {phenotypes.data() + i * schema.count(), schema.count()};
    }
    void validate() const;
};

struct ColumnScale {
    double min = 0.0;
    double max = 0.0;
    bool scaled = false; // false for categorical columns, which pass through
};

struct NormalizeResult {
    Cohort cohort;
    std::vector<ColumnScale> imaging_scales;   // size M
    std::vector<ColumnScale> phenotype_scales; // size K
};

// Min-max scales every imaging and continuous phenotype column to [0,1].
// Categorical columns and age are untouched. Constant columns map to zeros.
NormalizeResult normalize(const Cohort& cohort);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::array<double, 3> fractions{0.75, 0.05, 0.20};
    std::uint64_t seed = 0;
};

// Random permutation partitioned by fractions; train and val sizes are
// floored, the remainder goes to test.
Split split_cohort(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed);
inline Split split_cohort(const Cohort& c, std::array<double, 3> fractions, std::uint64_t seed) {
    return split_cohort(c.n, fractions, seed);
}

// CSV with header "age,img_0..img_{M-1},<phenotype names>"; any column order
// is accepted, unknown or missing columns are errors.
Cohort load_cohort(const std::filesystem::path& csv, const PhenotypeSchema& schema, char sep = ',');
void write_cohort(const Cohort& cohort, const std::filesystem::path& csv, char sep = ',');

// Sidecar of "name=categorical|continuous" lines, one per phenotype.
PhenotypeSchema load_schema(const std::filesystem::path& path, std::size_t imaging_features = 0);
void write_schema(const PhenotypeSchema& schema, const std::filesystem::path& path);

} // namespace popgraph
