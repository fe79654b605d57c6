#include <doctest.h>

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "popgraph/cohort.hpp"
#include "popgraph/errors.hpp"
#include "popgraph/synthetic.hpp"

using namespace popgraph;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

PhenotypeSchema small_schema() {
    PhenotypeSchema s;
    s.imaging_features = 2;
    s.phenotypes = {{"sex", PhenotypeKind::categorical}};
    return s;
}

// R^2 of ordinary least squares age ~ [1, X], solved with Eigen.
double ls_fit_r2(const Cohort& c) {
    const std::size_t n = c.n, m = c.schema.imaging_features;
    Eigen::MatrixXd design(n, m + 1);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        for (std::size_t f = 0; f < m; ++f) design(i, f + 1) = c.img(i, f);
        y(i) = c.age[i];
    }
    const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - design * beta;
    const double ss_res = resid.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

} // namespace

TEST_CASE("cohort CSV round trip") {
    Cohort c;
    c.n = 3;
    c.schema = small_schema();
    c.imaging = {0.1, 0.9, 0.25, 0.5, 1.0 / 3.0, 0.75};
    c.phenotypes = {0, 1, 0};
    c.age = {50.5, 63.25, 79.0 + 1e-13};

    const auto path = temp_file("popgraph_cohort_rt.csv");
    write_cohort(c, path);
    const Cohort back = load_cohort(path, c.schema);
    CHECK(back.n == 3);
    CHECK(back.imaging == c.imaging);
    CHECK(back.phenotypes == c.phenotypes);
    CHECK(back.age == c.age);
}

TEST_CASE("missing and malformed columns are rejected with names") {
    const auto path = temp_file("popgraph_cohort_bad.csv");
    {
        std::ofstream os(path);
        os << "img_0,img_1,sex\n0.1,0.2,0\n";
    }
    CHECK_THROWS_WITH_AS(load_cohort(path, small_schema()), doctest::Contains("age"), DataError);

    {
        std::ofstream os(path);
        os << "age,img_0,img_1,sex\n51,0.1,oops,0\n";
    }
    CHECK_THROWS_WITH_AS(load_cohort(path, small_schema()), doctest::Contains("img_1"), DataError);

    {
        std::ofstream os(path);
        os << "age,img_0,img_1,sex\n51,0.1,,0\n";
    }
    CHECK_THROWS_WITH_AS(load_cohort(path, small_schema()), doctest::Contains("missing"), DataError);

    {
        std::ofstream os(path);
        os << "\n";
    }
    CHECK_THROWS_AS(load_cohort(path, small_schema()), DataError);
}

TEST_CASE("schema sidecar round trip") {
    PhenotypeSchema s;
    s.imaging_features = 7;
    s.phenotypes = {{"sex", PhenotypeKind::categorical}, {"bmi", PhenotypeKind::continuous}};
    const auto path = temp_file("popgraph_schema.txt");
    write_schema(s, path);
    const PhenotypeSchema back = load_schema(path);
    CHECK(back.imaging_features == 7);
    REQUIRE(back.phenotypes.size() == 2);
    CHECK(back.phenotypes[0].first == "sex");
    CHECK(back.phenotypes[0].second == PhenotypeKind::categorical);
    CHECK(back.phenotypes[1].second == PhenotypeKind::continuous);
}

TEST_CASE("normalize maps columns to [0,1]") {
    Cohort c;
    c.n = 3;
    c.schema.imaging_features = 2;
    c.schema.phenotypes = {{"x", PhenotypeKind::continuous}, {"g", PhenotypeKind::categorical}};
    c.imaging = {2, 5, 4, 5, 6, 5}; // col0 = 2,4,6; col1 constant 5
    c.phenotypes = {0.0, 2, 0.5, 2, 1.0, 2};
    c.age = {50, 60, 70};

    const NormalizeResult r = normalize(c);
    CHECK(r.cohort.img(0, 0) == 0.0);
    CHECK(r.cohort.img(1, 0) == 0.5);
    CHECK(r.cohort.img(2, 0) == 1.0);
    // Constant column becomes zeros.
    CHECK(r.cohort.img(0, 1) == 0.0);
    CHECK(r.cohort.img(2, 1) == 0.0);
    // Already-[0,1] column is untouched; categorical codes pass through.
    CHECK(r.cohort.phen(1, 0) == 0.5);
    CHECK(r.cohort.phen(0, 1) == 2.0);
    // Age untouched.
    CHECK(r.cohort.age == c.age);
    CHECK(r.imaging_scales[0].min == 2.0);
    CHECK(r.imaging_scales[0].max == 6.0);
    CHECK_FALSE(r.phenotype_scales[1].scaled);

    // Idempotence, exactly.
    const NormalizeResult again = normalize(r.cohort);
    CHECK(again.cohort.imaging == r.cohort.imaging);
    CHECK(again.cohort.phenotypes == r.cohort.phenotypes);
}

TEST_CASE("synthetic cohort is deterministic and respects its config") {
    SyntheticConfig cfg;
    cfg.n = 200;
    cfg.seed = 42;
    const Cohort a = generate_synthetic(cfg);
    const Cohort b = generate_synthetic(cfg);
    CHECK(a.imaging == b.imaging);
    CHECK(a.phenotypes == b.phenotypes);
    CHECK(a.age == b.age);

    for (const double y : a.age) {
        CHECK(y >= cfg.age_min);
        CHECK(y <= cfg.age_max);
    }
    for (const double v : a.imaging) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // Categorical codes in {0..3}.
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t k = 0; k < cfg.categorical_phenotypes; ++k) {
            const double v = a.phen(i, k);
            CHECK(v == std::floor(v));
            CHECK(v >= 0.0);
            CHECK(v < 4.0);
        }
}

TEST_CASE("snr=0 leaves imaging uncorrelated with age") {
    SyntheticConfig cfg;
    cfg.n = 2000;
    cfg.snr = 0.0;
    cfg.seed = 3;
    const Cohort c = generate_synthetic(cfg);
    std::vector<double> col(c.n);
    for (std::size_t f = 0; f < c.schema.imaging_features; ++f) {
        for (std::size_t i = 0; i < c.n; ++i) col[i] = c.img(i, f);
        CHECK(std::abs(oracles::pearson(col, c.age)) < 0.1);
    }
}

TEST_CASE("snr=10 supports a strong linear age fit") {
    SyntheticConfig cfg;
    cfg.n = 2000;
    cfg.snr = 10.0;
    cfg.seed = 5;
    const Cohort c = generate_synthetic(cfg);
    CHECK(ls_fit_r2(c) > 0.7);
}

TEST_CASE("higher snr gives a higher least-squares fit in most seeds") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig hi, lo;
        hi.n = lo.n = 2000;
        hi.imaging_features = lo.imaging_features = 16;
        hi.snr = 4.0;
        lo.snr = 0.5;
        hi.seed = lo.seed = seed;
        if (ls_fit_r2(generate_synthetic(hi)) > ls_fit_r2(generate_synthetic(lo))) ++wins;
    }
    CHECK(wins >= 4);
}

TEST_CASE("synthetic config validation") {
    SyntheticConfig cfg;
    cfg.n = 5;
    CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
    cfg.n = 100;
    cfg.snr = -1.0;
    CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
}

TEST_CASE("split sizes follow the fractions with remainder to test") {
    const Split big = split_cohort(6500, {0.75, 0.05, 0.20}, 1);
    CHECK(big.train.size() == 4875);
    CHECK(big.val.size() == 325);
    CHECK(big.test.size() == 1300);

    const Split small = split_cohort(20, {0.75, 0.05, 0.20}, 1);
    CHECK(small.train.size() == 15);
    CHECK(small.val.size() == 1);
    CHECK(small.test.size() == 4);
}

TEST_CASE("split is a partition for any n and seed") {
    for (const std::size_t n : {3UL, 7UL, 100UL, 257UL}) {
        for (const std::uint64_t seed : {0ULL, 17ULL, 12345ULL}) {
            const Split s = split_cohort(n, {0.75, 0.05, 0.20}, seed);
            std::set<std::size_t> all;
            for (const auto* part : {&s.train, &s.val, &s.test})
                for (const std::size_t i : *part) {
                    CHECK(i < n);
                    CHECK(all.insert(i).second); // disjoint
                }
            CHECK(all.size() == n); // exhaustive
        }
    }
}

TEST_CASE("split rejects bad fractions") {
    CHECK_THROWS_AS(split_cohort(100, {0.5, 0.5, 0.5}, 0), ValidationError);
    CHECK_THROWS_AS(split_cohort(100, {1.0, 0.0, 0.0}, 0), ValidationError);
}
