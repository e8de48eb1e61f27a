#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "milkit/training.hpp"

namespace milkit {

struct ConfusionCounts {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
};

/// Positive class is +1 (satisfied).
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truths);

struct MetricsReport {
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    // 0/0 cases are reported as 0 with the flag set instead of NaN
    bool degenerate_precision = false;
    bool degenerate_recall = false;
    bool degenerate_f1 = false;
};

MetricsReport metrics(const ConfusionCounts& c);

/// Predictions for a bag list against its own labels.
MetricsReport evaluate(const ModelParams& params, std::span<const Bag> bags,
                       double threshold = 0.5);

struct CurveRow {
    double fraction = 0.0;
    MetricsReport report;
};

/// Trains from scratch on each prefix fraction of the (already seed-shuffled)
/// train split and evaluates on the fixed test set. Runs sequentially.
std::vector<CurveRow> learning_curve(std::span<const double> fractions, const DatasetSplit& data,
                                     const TrainConfig& config, std::size_t vocab_size);

struct BreakdownRow {
    std::string bucket;  // "0" (asker unseen in training), "1".."4", "5+"
    std::size_t count = 0;
    MetricsReport report;
};

/// Asker question counts over the training split, for grouping test bags.
std::unordered_map<long long, std::size_t> asker_question_counts(std::span<const Bag> train_bags);

/// Per-group metrics by the asker's training-set activity, buckets
/// {0 unseen, 1, 2, 3, 4, 5+}. Only populated buckets are returned.
std::vector<BreakdownRow> user_activity_breakdown(
    std::span<const Bag> test_bags, std::span<const int> predictions,
    const std::unordered_map<long long, std::size_t>& train_counts);

}  // namespace milkit
