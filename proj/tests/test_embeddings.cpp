#include <doctest.h>

#include <cmath>
#include <cstring>

#include "milkit/embeddings.hpp"
#include "milkit/gradcheck.hpp"
#include "milkit/rng.hpp"

using namespace milkit;

TEST_CASE("lookup returns the exact row") {
    EmbeddingTable table;
    table.matrix = Tensor::matrix({{0, 0, 0}, {1, 2, 3}, {4, 5, 6}});
    Tensor row0 = lookup(table, 0);
    CHECK(row0[0] == 0.0);
    CHECK(row0[1] == 0.0);
    Tensor row2 = lookup(table, 2);
    CHECK(row2[2] == 6.0);
    CHECK(lookup(table, 1) == lookup(table, 1));
    CHECK_THROWS_AS(lookup(table, 3), DataError);
    CHECK_THROWS_AS(lookup(table, -1), DataError);
}

TEST_CASE("lookup gradient is a one-hot row pattern") {
    EmbeddingTable table;
    table.matrix = Tensor({4, 3});
    Rng rng(3);
    for (std::size_t i = 0; i < table.matrix.size(); ++i) {
        table.matrix[i] = rng.uniform(-1.0, 1.0);
    }
    // loss = sum of row 2; analytic gradient is ones in row 2, zeros elsewhere
    Tensor analytic({4, 3});
    for (std::size_t k = 0; k < 3; ++k) analytic(2, k) = 1.0;
    NamedTensorRef p{"table", &table.matrix};
    NamedTensorRef g{"table", &analytic};
    auto loss = [&]() {
        Tensor row = lookup(table, 2);
        double acc = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) acc += row[k];
        return acc;
    };
    GradCheckReport report = finite_diff_check(loss, {&p, 1}, {&g, 1});
    CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("skip-gram on a single-token corpus leaves the init untouched") {
    SkipGramConfig cfg;
    cfg.seed = 5;
    PretrainResult a = pretrain_skipgram({{3}}, cfg, 8, 4);   // no pairs to train on
    PretrainResult b = pretrain_skipgram({{3}}, cfg, 8, 4);
    CHECK(std::memcmp(a.table.matrix.data(), b.table.matrix.data(),
                      a.table.matrix.size() * sizeof(double)) == 0);
    for (double loss : a.epoch_loss) CHECK(loss == 0.0);
}

TEST_CASE("skip-gram is deterministic under a fixed seed") {
    std::vector<std::vector<int>> corpus = {{2, 3, 4, 5, 2, 3}, {4, 5, 6, 7}};
    SkipGramConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 11;
    PretrainResult a = pretrain_skipgram(corpus, cfg, 8, 6);
    PretrainResult b = pretrain_skipgram(corpus, cfg, 8, 6);
    CHECK(std::memcmp(a.table.matrix.data(), b.table.matrix.data(),
                      a.table.matrix.size() * sizeof(double)) == 0);
    CHECK(a.table.matrix.all_finite());
}

TEST_CASE("skip-gram rejects an empty corpus") {
    SkipGramConfig cfg;
    CHECK_THROWS_AS(pretrain_skipgram({}, cfg, 4, 2), DataError);
    CHECK_THROWS_AS(pretrain_skipgram({{}}, cfg, 4, 2), DataError);
}

TEST_CASE("skip-gram separates two co-occurrence clusters") {
    // tokens 2..6 only ever appear together, as do 7..11
    std::vector<std::vector<int>> corpus;
    Rng rng(13);
    for (int s = 0; s < 60; ++s) {
        std::vector<int> sentence;
        const int base = (s % 2 == 0) ? 2 : 7;
        for (int k = 0; k < 8; ++k) {
            sentence.push_back(base + static_cast<int>(rng.next_below(5)));
        }
        corpus.push_back(std::move(sentence));
    }
    SkipGramConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 29;
    PretrainResult result = pretrain_skipgram(corpus, cfg, 12, 8);

    auto cosine = [&](int a, int b) {
        const double* va = result.table.matrix.data() + a * 8;
        const double* vb = result.table.matrix.data() + b * 8;
        double dot = 0, na = 0, nb = 0;
        for (int k = 0; k < 8; ++k) {
            dot += va[k] * vb[k];
            na += va[k] * va[k];
            nb += vb[k] * vb[k];
        }
        return dot / std::sqrt(na * nb);
    };
    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    for (int a = 2; a <= 11; ++a) {
        for (int b = a + 1; b <= 11; ++b) {
            const bool same = (a <= 6) == (b <= 6);
            (same ? intra : inter) += cosine(a, b);
            (same ? n_intra : n_inter) += 1;
        }
    }
    intra /= n_intra;
    inter /= n_inter;
    CHECK(intra - inter >= 0.2);
}

TEST_CASE("skip-gram loss trends downward on a fixed corpus") {
    // two token clusters: there is real structure for the loss to descend on
    std::vector<std::vector<int>> corpus;
    Rng rng(17);
    for (int s = 0; s < 40; ++s) {
        std::vector<int> sentence;
        const int base = (s % 2 == 0) ? 2 : 6;
        for (int k = 0; k < 10; ++k) {
            sentence.push_back(base + static_cast<int>(rng.next_below(4)));
        }
        corpus.push_back(std::move(sentence));
    }
    SkipGramConfig cfg;
    cfg.epochs = 20;
    cfg.learning_rate = 0.02;
    cfg.seed = 31;
    PretrainResult result = pretrain_skipgram(corpus, cfg, 10, 6);
    REQUIRE(result.epoch_loss.size() == 20);
    // epoch losses carry resampled-negative noise of a couple percent, so a
    // violation is a rise beyond that band, not any uptick
    int violations = 0;
    for (std::size_t e = 1; e < result.epoch_loss.size(); ++e) {
        if (result.epoch_loss[e] > result.epoch_loss[e - 1] * 1.03) ++violations;
    }
    CHECK(violations == 0);
    CHECK(result.epoch_loss.back() < result.epoch_loss.front());
}

TEST_CASE("user table init is seeded, ranged, and rejects duplicates") {
    std::vector<long long> ids = {7, 3, 12};
    UserTable a = init_user_table(ids, 4, 9);
    UserTable b = init_user_table(ids, 4, 9);
    CHECK(std::memcmp(a.matrix.data(), b.matrix.data(), a.matrix.size() * sizeof(double)) == 0);
    CHECK(a.matrix.dim(0) == 4);  // 3 users + reserved row
    for (std::size_t i = 0; i < a.matrix.size(); ++i) {
        CHECK(a.matrix[i] >= -0.08);
        CHECK(a.matrix[i] <= 0.08);
    }
    CHECK(a.row_for(7) == a.row_of.at(7));
    CHECK(a.row_for(999) == UserTable::kUnkRow);  // unseen asker falls back

    std::vector<long long> dups = {1, 2, 1};
    CHECK_THROWS_AS(init_user_table(dups, 4, 9), DataError);
}
