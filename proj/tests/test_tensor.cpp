#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"
#include "popgraph/tensor.hpp"

using namespace popgraph;

TEST_CASE("matmul identity and hand cases") {
    Trace tr;
    Tensor eye = tr.tensor({2, 2}, {1, 0, 0, 1});
    Tensor a = tr.tensor({2, 2}, {1, 2, 3, 4});
    CHECK(tr.matmul(eye, a).values() == std::vector<double>{1, 2, 3, 4});

    Tensor b = tr.tensor({2, 1}, {5, 6});
    CHECK(tr.matmul(a, b).values() == std::vector<double>{17, 39});
}

TEST_CASE("matmul shape error names both shapes") {
    Trace tr;
    Tensor a = tr.tensor({2, 3}, std::vector<double>(6, 0.0));
    Tensor b = tr.tensor({4, 5}, std::vector<double>(20, 0.0));
    CHECK_THROWS_WITH_AS(tr.matmul(a, b),
                         doctest::Contains("[2 x 3]"), ShapeError);
}

TEST_CASE("matmul gradient of sum(A*B) w.r.t. A") {
    Trace tr;
    Tensor a = tr.tensor({2, 2}, {1, 2, 3, 4});
    Tensor b = tr.tensor({2, 1}, {1, 1});
    Tensor loss = tr.sum(tr.matmul(a, b));
    tr.backward(loss);
    CHECK(a.grad() == std::vector<double>{1, 1, 1, 1});

    // Same value from the finite-difference oracle.
    const double err = grad_check(
        [](Trace& t, Tensor x) {
            Tensor bb = t.tensor({2, 1}, {1, 1});
            return t.sum(t.matmul(x, bb));
        },
        {2, 2}, {1, 2, 3, 4});
    CHECK(err < 1e-7);
}

TEST_CASE("spmm trivial cases") {
    Trace tr;
    Tensor ones = tr.tensor({3, 1}, {1, 1, 1});

    const SparseMatrix empty = SparseMatrix::from_triplets(3, 3, {});
    CHECK(tr.spmm(empty, ones).values() == std::vector<double>{0, 0, 0});

    const SparseMatrix eye = SparseMatrix::identity(3);
    Tensor d = tr.tensor({3, 2}, {1, 2, 3, 4, 5, 6});
    CHECK(tr.spmm(eye, d).values() == std::vector<double>{1, 2, 3, 4, 5, 6});

    const SparseMatrix s = SparseMatrix::from_triplets(3, 3, {{0, 1, 1.0}, {2, 0, 2.0}});
    CHECK(tr.spmm(s, ones).values() == std::vector<double>{1, 0, 2});
}

TEST_CASE("spmm matches dense multiply on random sparse matrices") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const std::size_t m = 2 + rng.below(49), k = 2 + rng.below(49), n = 1 + rng.below(6);
        std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < k; ++c)
                if (rng.uniform() < 0.15) trip.emplace_back(r, c, rng.uniform(-2.0, 2.0));
        const SparseMatrix s = SparseMatrix::from_triplets(m, k, std::move(trip));
        std::vector<double> dvals(k * n);
        for (double& v : dvals) v = rng.uniform(-2.0, 2.0);

        Trace tr;
        Tensor d = tr.tensor({k, n}, dvals);
        const std::vector<double> got = tr.spmm(s, d).values();
        const std::vector<double> want = oracles::dense_matmul(s.dense(), m, k, dvals, n);
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - want[i]) <= 1e-12);
    }
}

TEST_CASE("relu and leaky_relu") {
    Trace tr;
    Tensor x = tr.tensor({3}, {-1, 0, 2});
    CHECK(tr.relu(x).values() == std::vector<double>{0, 0, 2});

    Tensor y = tr.tensor({1}, {-10});
    CHECK(tr.leaky_relu(y, 0.2).values() == std::vector<double>{-2});

    // Subgradient at exactly 0 is 0 for both.
    Trace tr2;
    Tensor z = tr2.tensor({3}, {-1, 0, 2});
    tr2.backward(tr2.sum(tr2.leaky_relu(z, 0.25)));
    CHECK(z.grad() == std::vector<double>{0.25, 0.0, 1.0});
}

TEST_CASE("concat_columns widths add") {
    Trace tr;
    Tensor a = tr.tensor({2, 1}, {1, 2});
    Tensor b = tr.tensor({2, 2}, {3, 4, 5, 6});
    Tensor c = tr.concat_columns(a, b);
    CHECK(c.shape() == std::vector<std::size_t>{2, 3});
    CHECK(c.values() == std::vector<double>{1, 3, 4, 2, 5, 6});
}

TEST_CASE("row_mean") {
    Trace tr;
    Tensor x = tr.tensor({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(tr.row_mean(x).values() == std::vector<double>{2, 5});
}

TEST_CASE("segment_softmax examples") {
    Trace tr;
    Tensor single = tr.tensor({2}, {3.0, -1.0});
    CHECK(tr.segment_softmax(single, {0, 1}).values() == std::vector<double>{1.0, 1.0});

    Tensor equal = tr.tensor({2}, {0.7, 0.7});
    const auto eq = tr.segment_softmax(equal, {0, 0}).values();
    CHECK(eq[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eq[1] == doctest::Approx(0.5).epsilon(1e-12));

    Tensor pair = tr.tensor({2}, {0.0, std::log(3.0)});
    const auto p = tr.segment_softmax(pair, {0, 0}).values();
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));

    Tensor empty = tr.tensor({0}, {});
    CHECK(tr.segment_softmax(empty, {}).values().empty());
}

TEST_CASE("segment_softmax group sums and shift invariance") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const std::size_t nnz = 1 + rng.below(40);
        const std::size_t groups = 1 + rng.below(8);
        std::vector<double> scores(nnz);
        std::vector<std::size_t> targets(nnz);
        for (std::size_t e = 0; e < nnz; ++e) {
            scores[e] = rng.uniform(-50.0, 50.0);
            targets[e] = rng.below(groups);
        }
        Trace tr;
        const auto out = tr.segment_softmax(tr.tensor({nnz}, scores), targets).values();

        std::vector<double> sums(groups, 0.0);
        std::vector<bool> seen(groups, false);
        for (std::size_t e = 0; e < nnz; ++e) {
            CHECK(out[e] > 0.0);
            sums[targets[e]] += out[e];
            seen[targets[e]] = true;
        }
        for (std::size_t g = 0; g < groups; ++g)
            if (seen[g]) CHECK(std::abs(sums[g] - 1.0) <= 1e-12);

        // Adding a constant within one group leaves the outputs unchanged.
        std::vector<double> shifted = scores;
        const std::size_t shift_group = targets[0];
        for (std::size_t e = 0; e < nnz; ++e)
            if (targets[e] == shift_group) shifted[e] += 13.25;
        Trace tr2;
        const auto out2 = tr2.segment_softmax(tr2.tensor({nnz}, shifted), targets).values();
        for (std::size_t e = 0; e < nnz; ++e) CHECK(out2[e] == doctest::Approx(out[e]).epsilon(1e-12));
    }
}

TEST_CASE("mse_loss examples") {
    Trace tr;
    Tensor a = tr.tensor({3}, {1, 2, 3});
    CHECK(tr.mse_loss(a, a).values()[0] == 0.0);

    Tensor p = tr.tensor({2}, {0, 0});
    Tensor t = tr.tensor({2}, {1, 3});
    CHECK(tr.mse_loss(p, t).values()[0] == 5.0);

    Trace tr2;
    Tensor p2 = tr2.tensor({1}, {2});
    Tensor t2 = tr2.tensor({1}, {0});
    tr2.backward(tr2.mse_loss(p2, t2));
    CHECK(p2.grad() == std::vector<double>{4.0});

    Tensor bad = tr.tensor({3}, {0, 0, 0});
    CHECK_THROWS_AS(tr.mse_loss(p, bad), ShapeError);
}

TEST_CASE("backward basics") {
    Trace tr;
    Tensor x = tr.tensor({3}, {5, -1, 2});
    tr.backward(tr.sum(x));
    CHECK(x.grad() == std::vector<double>{1, 1, 1});

    Trace tr2;
    Tensor y = tr2.tensor({2}, {1, -2});
    tr2.backward(tr2.sum(tr2.mul(y, y)));
    CHECK(y.grad() == std::vector<double>{2, -4});

    Trace tr3;
    Tensor z = tr3.tensor({2}, {1, 2});
    CHECK_THROWS_AS(tr3.backward(z), Error);
}

TEST_CASE("two-layer composite gradient matches finite differences") {
    Rng rng(7);
    std::vector<double> w1(3 * 4), w2(4);
    for (double& v : w1) v = rng.uniform(-1.0, 1.0);
    for (double& v : w2) v = rng.uniform(-1.0, 1.0);
    std::vector<double> x0(2 * 3);
    for (double& v : x0) v = rng.uniform(-1.0, 1.0) + 0.05; // keep away from relu kinks

    const double err = grad_check(
        [&](Trace& t, Tensor x) {
            Tensor a = t.relu(t.matmul(x, t.tensor({3, 4}, w1)));
            Tensor out = t.matmul(a, t.tensor({4, 1}, w2));
            Tensor target = t.tensor({2, 1}, {0.3, -0.7});
            return t.mse_loss(out, target);
        },
        {2, 3}, x0);
    CHECK(err < 1e-4);
}

TEST_CASE("grad_check on a quadratic form is exact to roundoff") {
    const double err = grad_check(
        [](Trace& t, Tensor x) { return t.sum(t.mul(x, x)); }, {4}, {1.5, -2.0, 0.25, 3.0}, 1e-5);
    CHECK(err < 1e-8);
}

TEST_CASE("every differentiable op matches finite differences on random inputs") {
    const SparseMatrix sp =
        SparseMatrix::from_triplets(3, 3, {{0, 1, 0.5}, {1, 0, -1.5}, {2, 2, 2.0}});
    const SparseMatrix pattern =
        SparseMatrix::from_triplets(3, 3, {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {2, 0, 1}, {2, 2, 1}});

    struct Case {
        const char* name;
        std::vector<std::size_t> shape;
        ScalarFn fn;
    };
    const std::vector<Case> cases = {
        {"matmul", {3, 2}, [](Trace& t, Tensor x) {
             Tensor w = t.tensor({2, 2}, {0.3, -0.8, 1.1, 0.4});
             return t.sum(t.matmul(x, w));
         }},
        {"matmul-rhs", {2, 3}, [](Trace& t, Tensor x) {
             Tensor a = t.tensor({3, 2}, {0.2, 1.0, -0.5, 0.7, 0.9, -1.2});
             return t.sum(t.mul(t.matmul(a, x), t.matmul(a, x)));
         }},
        {"spmm", {3, 2}, [&](Trace& t, Tensor x) { return t.sum(t.mul(t.spmm(sp, x), t.spmm(sp, x))); }},
        {"spmm_weighted-values", {5}, [&](Trace& t, Tensor v) {
             Tensor d = t.tensor({3, 2}, {1, 2, 3, 4, 5, 6});
             Tensor out = t.spmm_weighted(pattern, v, d);
             return t.sum(t.mul(out, out));
         }},
        {"spmm_weighted-dense", {3, 2}, [&](Trace& t, Tensor d) {
             Tensor v = t.tensor({5}, {0.3, -0.2, 0.9, 1.1, -0.4});
             Tensor out = t.spmm_weighted(pattern, v, d);
             return t.sum(t.mul(out, out));
         }},
        {"leaky_relu", {6}, [](Trace& t, Tensor x) { return t.sum(t.leaky_relu(x, 0.2)); }},
        {"add", {4}, [](Trace& t, Tensor x) {
             Tensor y = t.tensor({4}, {0.5, -1.0, 2.0, 0.1});
             return t.sum(t.mul(t.add(x, y), t.add(x, y)));
         }},
        {"sub", {4}, [](Trace& t, Tensor x) {
             Tensor y = t.tensor({4}, {0.5, -1.0, 2.0, 0.1});
             return t.sum(t.mul(t.sub(x, y), t.sub(x, y)));
         }},
        {"scale", {4}, [](Trace& t, Tensor x) { return t.sum(t.mul(t.scale(x, -2.5), x)); }},
        {"add_rowvec", {2, 3}, [](Trace& t, Tensor x) {
             Tensor b = t.tensor({1, 3}, {0.1, -0.2, 0.3});
             return t.sum(t.mul(t.add_rowvec(x, b), t.add_rowvec(x, b)));
         }},
        {"concat_columns", {2, 2}, [](Trace& t, Tensor x) {
             Tensor y = t.tensor({2, 1}, {1.5, -0.5});
             Tensor c = t.concat_columns(x, y);
             return t.sum(t.mul(c, c));
         }},
        {"row_mean", {3, 4}, [](Trace& t, Tensor x) {
             Tensor m = t.row_mean(x);
             return t.sum(t.mul(m, m));
         }},
        {"gather_rows", {4, 2}, [](Trace& t, Tensor x) {
             Tensor g = t.gather_rows(x, {0, 2, 2, 3});
             return t.sum(t.mul(g, g));
         }},
        {"segment_softmax", {5}, [](Trace& t, Tensor x) {
             Tensor a = t.segment_softmax(x, {0, 0, 1, 1, 1});
             Tensor w = t.tensor({5}, {1.0, -2.0, 0.5, 3.0, -1.0});
             return t.sum(t.mul(a, w));
         }},
        {"mse", {4}, [](Trace& t, Tensor x) {
             Tensor y = t.tensor({4}, {0.5, -1.0, 2.0, 0.1});
             return t.mse_loss(x, y);
         }},
        {"mae", {4}, [](Trace& t, Tensor x) {
             Tensor y = t.tensor({4}, {0.5, -1.0, 2.0, 0.1});
             return t.mae_loss(x, y);
         }},
    };

    for (const Case& c : cases) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(mix_seed(seed, hash_label(c.name)));
            std::size_t total = 1;
            for (const std::size_t d : c.shape) total *= d;
            std::vector<double> point(total);
            // Offset keeps evaluation away from relu/mae kinks.
            for (double& v : point) v = rng.uniform(-1.0, 1.0) + (v >= 0 ? 0.031 : 0.031);
            const double err = grad_check(c.fn, c.shape, point);
            INFO(c.name << " seed " << seed);
            CHECK(err < 1e-4);
        }
    }
}

TEST_CASE("grad access before backward throws") {
    Trace tr;
    Tensor x = tr.tensor({2}, {1, 2});
    CHECK_THROWS_AS((void)x.grad(), Error);
}
