#include <doctest.h>

#include <cmath>
#include <cstring>

#include "milkit/rng.hpp"
#include "milkit/tensor.hpp"

using namespace milkit;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double range = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-range, range);
    return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("tensor construction enforces shape/data consistency") {
    CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.all_finite());
}

TEST_CASE("matmul identity and column selection") {
    Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
    Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
    Tensor prod = matmul(eye, a);
    CHECK(bitwise_equal(prod, a));

    Tensor col = Tensor::matrix({{0}, {1}});
    Tensor picked = matmul(a, col);
    CHECK(picked.shape() == std::vector<std::size_t>{2, 1});
    CHECK(picked(0, 0) == 2.0);
    CHECK(picked(1, 0) == 4.0);
}

TEST_CASE("matmul matches the triple-loop reference exactly") {
    Rng rng(42);
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    CHECK(bitwise_equal(matmul(a, b), ref::matmul(a, b)));

    // large enough to take the parallel path
    Tensor big_a = random_tensor({80, 70}, rng);
    Tensor big_b = random_tensor({70, 90}, rng);
    CHECK(bitwise_equal(matmul(big_a, big_b), ref::matmul(big_a, big_b)));
}

TEST_CASE("matmul rejects mismatched shapes and names both") {
    Tensor a({2, 3});
    Tensor b({2, 3});
    try {
        matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2x3]") != std::string::npos);
    }
}

TEST_CASE("bilinear_slice identity and orthogonality") {
    Tensor e1 = Tensor::vec({1, 0});
    Tensor e2 = Tensor::vec({0, 1});
    Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
    CHECK(bilinear_slice(e1, eye, e1) == 1.0);
    CHECK(bilinear_slice(e1, eye, e2) == 0.0);
}

TEST_CASE("bilinear_slice matches the double-loop reference") {
    Rng rng(7);
    Tensor q = random_tensor({3}, rng);
    Tensor w = random_tensor({3, 4}, rng);
    Tensor a = random_tensor({4}, rng);
    double explicit_sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) explicit_sum += q[i] * w(i, j) * a[j];
    }
    CHECK(bilinear_slice(q, w, a) == doctest::Approx(explicit_sum).epsilon(1e-12));
    CHECK(bilinear_slice(q, w, a) == ref::bilinear_slice(q, w, a));
    CHECK_THROWS_AS(bilinear_slice(q, w, q), ShapeError);
}

TEST_CASE("activations hit the pinned values") {
    Tensor x = Tensor::vec({0.0, 1.0});
    Tensor t = activation(x, Activation::Tanh);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    Tensor s = activation(x, Activation::Sigmoid);
    CHECK(s[0] == 0.5);
}

TEST_CASE("activation derivatives match central differences") {
    Rng rng(11);
    Tensor x = random_tensor({16}, rng, 2.0);
    const double eps = 1e-6;
    for (Activation kind : {Activation::Tanh, Activation::Sigmoid}) {
        Tensor grad = activation_grad(x, kind);
        for (std::size_t i = 0; i < x.size(); ++i) {
            Tensor up = x, down = x;
            up[i] += eps;
            down[i] -= eps;
            const double numeric =
                (activation(up, kind)[i] - activation(down, kind)[i]) / (2 * eps);
            const double rel = std::abs(grad[i] - numeric) /
                               std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
            CHECK(rel < 1e-6);
        }
    }
}

TEST_CASE("maxpool_rows reads off maxima with first-occurrence ties") {
    MaxPoolResult r = maxpool_rows(Tensor::matrix({{1, 3}, {4, 2}}));
    CHECK(r.values[0] == 3.0);
    CHECK(r.values[1] == 4.0);
    CHECK(r.argmax == std::vector<std::size_t>{1, 0});

    MaxPoolResult tie = maxpool_rows(Tensor::matrix({{5, 5}}));
    CHECK(tie.values[0] == 5.0);
    CHECK(tie.argmax[0] == 0);
}

TEST_CASE("maxpool_rows matches the per-row scan reference exactly") {
    Rng rng(99);
    Tensor h = random_tensor({6, 9}, rng);
    MaxPoolResult got = maxpool_rows(h);
    MaxPoolResult want = ref::maxpool_rows(h);
    CHECK(bitwise_equal(got.values, want.values));
    CHECK(got.argmax == want.argmax);
}

TEST_CASE("maxpool_rows is invariant under column permutation") {
    Rng rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t z = 1 + rng.next_below(5), n = 1 + rng.next_below(7);
        Tensor h = random_tensor({z, n}, rng);
        std::vector<std::size_t> perm(n);
        for (std::size_t j = 0; j < n; ++j) perm[j] = j;
        rng.shuffle(perm);
        Tensor shuffled({z, n});
        for (std::size_t i = 0; i < z; ++i) {
            for (std::size_t j = 0; j < n; ++j) shuffled(i, j) = h(i, perm[j]);
        }
        CHECK(bitwise_equal(maxpool_rows(h).values, maxpool_rows(shuffled).values));
    }
}

TEST_CASE("appending a column never decreases any pooled component") {
    Rng rng(321);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t z = 1 + rng.next_below(5), n = 1 + rng.next_below(7);
        Tensor h = random_tensor({z, n}, rng);
        Tensor wider({z, n + 1});
        for (std::size_t i = 0; i < z; ++i) {
            for (std::size_t j = 0; j < n; ++j) wider(i, j) = h(i, j);
            wider(i, n) = rng.uniform(-1.0, 1.0);
        }
        Tensor before = maxpool_rows(h).values;
        Tensor after = maxpool_rows(wider).values;
        for (std::size_t i = 0; i < z; ++i) CHECK(after[i] >= before[i]);
    }
}

TEST_CASE("meanpool_cols basics and reference agreement") {
    Tensor single = Tensor::matrix({{1}, {2}, {3}});
    Tensor pooled = meanpool_cols(single);
    CHECK(pooled[0] == 1.0);
    CHECK(pooled[1] == 2.0);
    CHECK(pooled[2] == 3.0);

    Tensor m = Tensor::matrix({{0, 2}, {4, 0}});
    Tensor avg = meanpool_cols(m);
    CHECK(avg[0] == 1.0);
    CHECK(avg[1] == 2.0);

    Rng rng(5);
    Tensor r = random_tensor({5, 7}, rng);
    Tensor got = meanpool_cols(r);
    Tensor want = ref::meanpool_cols(r);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("operations are pure: identical inputs give bitwise-identical outputs") {
    Rng rng(77);
    Tensor a = random_tensor({40, 30}, rng);
    Tensor b = random_tensor({30, 20}, rng);
    CHECK(bitwise_equal(matmul(a, b), matmul(a, b)));
    Tensor h = random_tensor({8, 6}, rng);
    CHECK(bitwise_equal(maxpool_rows(h).values, maxpool_rows(h).values));
}
