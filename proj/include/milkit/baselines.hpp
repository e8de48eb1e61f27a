#pragma once

#include <span>

#include "milkit/evaluation.hpp"

namespace milkit {

/// Logistic regression over bag-of-words frequencies: the question half and
/// an answer half, concatenated into a 2 |V| feature vector.
struct LinearModel {
    Tensor weights;  // {2 * vocab_size}
    double bias = 0.0;
    std::size_t vocab_size = 0;
};

enum class BowPooling {
    Mean,  // answer half = mean of per-answer frequency vectors (ignores MIL structure)
    Max    // bag score = max over per-answer logistic scores (degenerate MIL model)
};

struct BaselineResult {
    LinearModel model;
    MetricsReport report;
};

/// Satisfaction probability for one bag under either pooling.
double baseline_prob(const LinearModel& model, const Bag& bag, BowPooling pooling);

/// Train on the split's train set with the shared adagrad loop, evaluate on
/// its test set. Weights start at zero, so epochs=0 scores every bag 0.5.
BaselineResult train_bow_baseline(const DatasetSplit& data, const TrainConfig& config,
                                  std::size_t vocab_size, BowPooling pooling);

/// Bag-level ablation: answers are averaged before scoring.
BaselineResult bow_mean_baseline(const DatasetSplit& data, const TrainConfig& config,
                                 std::size_t vocab_size);

/// Instance-level ablation: answers are scored separately and max-pooled;
/// only the argmax answer receives gradient.
BaselineResult bow_max_baseline(const DatasetSplit& data, const TrainConfig& config,
                                std::size_t vocab_size);

}  // namespace milkit
