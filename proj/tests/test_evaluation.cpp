#include <doctest.h>

#include "milkit/evaluation.hpp"
#include "milkit/rng.hpp"
#include "milkit/synthdata.hpp"

using namespace milkit;

TEST_CASE("confusion counts the worked cases") {
    std::vector<int> both_pos = {+1, +1};
    ConfusionCounts c = confusion(both_pos, both_pos);
    CHECK(c.tp == 2);
    CHECK(c.tn + c.fp + c.fn == 0);

    std::vector<int> preds = {+1, -1};
    std::vector<int> truths = {-1, +1};
    ConfusionCounts w = confusion(preds, truths);
    CHECK(w.fp == 1);
    CHECK(w.fn == 1);
    CHECK(w.tp == 0);

    std::vector<int> short_truths = {+1};
    CHECK_THROWS_AS(confusion(preds, short_truths), DataError);
    std::vector<int> bad = {0, 1};
    CHECK_THROWS_AS(confusion(bad, preds), DataError);
}

TEST_CASE("confusion matches a brute-force counting oracle on random labels") {
    Rng rng(2);
    std::vector<int> preds(200), truths(200);
    for (std::size_t i = 0; i < 200; ++i) {
        preds[i] = rng.next_double() < 0.5 ? +1 : -1;
        truths[i] = rng.next_double() < 0.5 ? +1 : -1;
    }
    ConfusionCounts c = confusion(preds, truths);
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        if (preds[i] == 1 && truths[i] == 1) ++tp;
        if (preds[i] == -1 && truths[i] == -1) ++tn;
        if (preds[i] == 1 && truths[i] == -1) ++fp;
        if (preds[i] == -1 && truths[i] == 1) ++fn;
    }
    CHECK(c.tp == tp);
    CHECK(c.tn == tn);
    CHECK(c.fp == fp);
    CHECK(c.fn == fn);
    CHECK(c.total() == 200);
}

TEST_CASE("metrics computes the worked example") {
    MetricsReport r = metrics({3, 5, 1, 1});  // tp, tn, fp, fn
    CHECK(r.precision == 0.75);
    CHECK(r.recall == 0.75);
    CHECK(r.f1 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.accuracy == 0.8);
    CHECK_FALSE(r.degenerate_precision);
}

TEST_CASE("metrics flags 0/0 cases instead of producing NaN") {
    MetricsReport r = metrics({0, 4, 0, 0});
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.accuracy == 1.0);
    CHECK(r.degenerate_precision);
    CHECK(r.degenerate_recall);
    CHECK(r.degenerate_f1);
}

TEST_CASE("metrics matches independent recomputation on random counts") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        ConfusionCounts c{rng.next_below(50), rng.next_below(50), rng.next_below(50),
                          rng.next_below(50)};
        if (c.total() == 0) continue;
        MetricsReport r = metrics(c);
        if (c.tp + c.fp > 0) {
            CHECK(r.precision ==
                  doctest::Approx(double(c.tp) / double(c.tp + c.fp)).epsilon(1e-12));
        }
        if (c.tp + c.fn > 0) {
            CHECK(r.recall == doctest::Approx(double(c.tp) / double(c.tp + c.fn)).epsilon(1e-12));
        }
        if (r.precision + r.recall > 0) {
            CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall /
                                          (r.precision + r.recall))
                              .epsilon(1e-12));
        }
        CHECK(r.accuracy ==
              doctest::Approx(double(c.tp + c.tn) / double(c.total())).epsilon(1e-12));
    }
}

TEST_CASE("accuracy is invariant under label flip; precision is not") {
    Rng rng(4);
    std::vector<int> preds(100), truths(100);
    for (std::size_t i = 0; i < 100; ++i) {
        preds[i] = rng.next_double() < 0.6 ? +1 : -1;
        truths[i] = rng.next_double() < 0.4 ? +1 : -1;
    }
    std::vector<int> preds_flipped(100), truths_flipped(100);
    for (std::size_t i = 0; i < 100; ++i) {
        preds_flipped[i] = -preds[i];
        truths_flipped[i] = -truths[i];
    }
    MetricsReport a = metrics(confusion(preds, truths));
    MetricsReport b = metrics(confusion(preds_flipped, truths_flipped));
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.precision != b.precision);  // holds for this draw
}

TEST_CASE("user_activity_breakdown groups by training-set asker counts") {
    // train: user 1 asks once, user 2 twice, user 3 five times
    std::vector<Bag> train;
    auto add = [&](long long user, int times) {
        for (int i = 0; i < times; ++i) {
            Bag b;
            b.question_id = static_cast<long long>(train.size() + 1);
            b.user_id = user;
            b.question_tokens = {2};
            b.instances = {{3}};
            b.label = +1;
            train.push_back(b);
        }
    };
    add(1, 1);
    add(2, 2);
    add(3, 5);
    auto counts = asker_question_counts(train);

    std::vector<Bag> test;
    std::vector<int> preds;
    auto add_test = [&](long long user, int label, int pred) {
        Bag b;
        b.question_id = static_cast<long long>(1000 + test.size());
        b.user_id = user;
        b.question_tokens = {2};
        b.instances = {{3}};
        b.label = label;
        test.push_back(b);
        preds.push_back(pred);
    };
    add_test(1, +1, +1);   // bucket 1
    add_test(1, -1, +1);   // bucket 1
    add_test(2, +1, +1);   // bucket 2
    add_test(3, -1, -1);   // bucket 5+
    add_test(3, +1, -1);   // bucket 5+
    add_test(99, +1, +1);  // bucket 0: unseen asker

    auto rows = user_activity_breakdown(test, preds, counts);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].bucket == "0");
    CHECK(rows[0].count == 1);
    CHECK(rows[1].bucket == "1");
    CHECK(rows[1].count == 2);
    CHECK(rows[2].bucket == "2");
    CHECK(rows[2].count == 1);
    CHECK(rows[3].bucket == "5+");
    CHECK(rows[3].count == 2);

    // each bucket's metrics equal a filtered metrics() call
    std::vector<int> b1_preds = {+1, +1}, b1_truths = {+1, -1};
    MetricsReport expected = metrics(confusion(b1_preds, b1_truths));
    CHECK(rows[1].report.accuracy == expected.accuracy);
    CHECK(rows[1].report.precision == expected.precision);

    std::vector<Bag> all_unseen = {test[5]};
    std::vector<int> one_pred = {+1};
    auto single = user_activity_breakdown(all_unseen, one_pred, counts);
    REQUIRE(single.size() == 1);
    CHECK(single[0].bucket == "0");
}

TEST_CASE("learning_curve with fraction one matches a plain train and eval run") {
    SynthConfig sc;
    sc.bag_count = 40;
    sc.vocab_size = 12;
    sc.min_tokens = 3;
    sc.max_tokens = 6;
    sc.seed = 7;
    DatasetSplit data = split(generate(sc), 7);

    TrainConfig cfg;
    cfg.d_w = 4;
    cfg.h = 3;
    cfg.d_u = 2;
    cfg.z = 2;
    cfg.epochs = 2;
    cfg.seed = 7;
    cfg.patience = 0;
    cfg.skipgram.epochs = 1;
    cfg.skipgram.seed = 7;

    const double fractions[] = {1.0};
    auto rows = learning_curve(fractions, data, cfg, 12);
    REQUIRE(rows.size() == 1);

    TrainResult plain = train(data, cfg, 12);
    MetricsReport direct = evaluate(plain.params, data.test, cfg.threshold);
    CHECK(rows[0].report.accuracy == direct.accuracy);
    CHECK(rows[0].report.counts.tp == direct.counts.tp);

    auto again = learning_curve(fractions, data, cfg, 12);
    CHECK(again[0].report.accuracy == rows[0].report.accuracy);

    const double too_small[] = {0.05};
    CHECK_THROWS_AS(learning_curve(too_small, data, cfg, 12), DataError);
    const double bad[] = {1.5};
    CHECK_THROWS_AS(learning_curve(bad, data, cfg, 12), DataError);
}
