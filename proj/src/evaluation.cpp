#include "milkit/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace milkit {

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.size() != truths.size()) {
        throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(truths.size()) + " truths");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i], t = truths[i];
        if ((p != 1 && p != -1) || (t != 1 && t != -1)) {
            throw DataError("confusion: labels must be +1 or -1");
        }
        if (p == 1) {
            t == 1 ? ++c.tp : ++c.fp;
        } else {
            t == 1 ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
    MetricsReport r;
    r.counts = c;
    if (c.tp + c.fp > 0) {
        r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    } else {
        r.degenerate_precision = true;
    }
    if (c.tp + c.fn > 0) {
        r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    } else {
        r.degenerate_recall = true;
    }
    if (r.precision + r.recall > 0.0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    } else {
        r.degenerate_f1 = true;
    }
    r.accuracy = c.total() == 0
                     ? 0.0
                     : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    return r;
}

MetricsReport evaluate(const ModelParams& params, std::span<const Bag> bags, double threshold) {
    std::vector<int> preds = predict_labels(params, bags, threshold);
    std::vector<int> truths(bags.size());
    for (std::size_t i = 0; i < bags.size(); ++i) truths[i] = bags[i].label;
    return metrics(confusion(preds, truths));
}

std::vector<CurveRow> learning_curve(std::span<const double> fractions, const DatasetSplit& data,
                                     const TrainConfig& config, std::size_t vocab_size) {
    std::vector<CurveRow> rows;
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw DataError("learning_curve: fractions must be in (0, 1]");
        }
        const auto n =
            static_cast<std::size_t>(std::llround(f * static_cast<double>(data.train.size())));
        if (n < 10) {
            throw DataError("learning_curve: fraction " + std::to_string(f) + " keeps only " +
                            std::to_string(n) + " bags (< 10)");
        }
        DatasetSplit subset;
        subset.seed = data.seed;
        subset.train.assign(data.train.begin(), data.train.begin() + static_cast<std::ptrdiff_t>(n));
        subset.validation = data.validation;
        subset.test = data.test;
        TrainResult trained = train(subset, config, vocab_size);
        rows.push_back({f, evaluate(trained.params, data.test, config.threshold)});
    }
    return rows;
}

std::unordered_map<long long, std::size_t> asker_question_counts(std::span<const Bag> train_bags) {
    std::unordered_map<long long, std::size_t> counts;
    for (const auto& bag : train_bags) ++counts[bag.user_id];
    return counts;
}

std::vector<BreakdownRow> user_activity_breakdown(
    std::span<const Bag> test_bags, std::span<const int> predictions,
    const std::unordered_map<long long, std::size_t>& train_counts) {
    if (test_bags.size() != predictions.size()) {
        throw DataError("user_activity_breakdown: bag/prediction count mismatch");
    }
    // bucket index 0..5 = {unseen, 1, 2, 3, 4, 5+}
    constexpr std::size_t kBuckets = 6;
    std::vector<std::vector<int>> preds(kBuckets), truths(kBuckets);
    for (std::size_t i = 0; i < test_bags.size(); ++i) {
        auto it = train_counts.find(test_bags[i].user_id);
        const std::size_t q = it == train_counts.end() ? 0 : it->second;
        const std::size_t bucket = std::min<std::size_t>(q, 5);
        preds[bucket].push_back(predictions[i]);
        truths[bucket].push_back(test_bags[i].label);
    }
    static const char* kNames[kBuckets] = {"0", "1", "2", "3", "4", "5+"};
    std::vector<BreakdownRow> rows;
    for (std::size_t b = 0; b < kBuckets; ++b) {
        if (preds[b].empty()) continue;
        BreakdownRow row;
        row.bucket = kNames[b];
        row.count = preds[b].size();
        row.report = metrics(confusion(preds[b], truths[b]));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace milkit
