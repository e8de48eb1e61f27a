#include "milkit/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "milkit/rng.hpp"

namespace milkit {

namespace {

// sparse frequency vector: (index, value) pairs with unique ascending indices
using SparseVec = std::vector<std::pair<std::size_t, double>>;

SparseVec frequencies(std::span<const int> tokens, std::size_t vocab_size, std::size_t offset) {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (int t : tokens) {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
            throw DataError("baseline: token id " + std::to_string(t) + " outside vocab of " +
                            std::to_string(vocab_size));
        }
        ids.push_back(static_cast<std::size_t>(t));
    }
    std::sort(ids.begin(), ids.end());
    SparseVec out;
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (std::size_t i = 0; i < ids.size();) {
        std::size_t j = i;
        while (j < ids.size() && ids[j] == ids[i]) ++j;
        out.emplace_back(offset + ids[i], static_cast<double>(j - i) * inv);
        i = j;
    }
    return out;
}

void add_sparse(SparseVec& dst, const SparseVec& src, double scale) {
    SparseVec merged;
    merged.reserve(dst.size() + src.size());
    std::size_t i = 0, j = 0;
    while (i < dst.size() || j < src.size()) {
        if (j == src.size() || (i < dst.size() && dst[i].first < src[j].first)) {
            merged.push_back(dst[i++]);
        } else if (i == dst.size() || src[j].first < dst[i].first) {
            merged.emplace_back(src[j].first, src[j].second * scale);
            ++j;
        } else {
            merged.emplace_back(dst[i].first, dst[i].second + src[j].second * scale);
            ++i;
            ++j;
        }
    }
    dst = std::move(merged);
}

double sparse_score(const LinearModel& m, const SparseVec& features) {
    double s = m.bias;
    for (const auto& [idx, v] : features) s += m.weights[idx] * v;
    return s;
}

struct BagFeatures {
    SparseVec question;            // question half, indices [0, V)
    std::vector<SparseVec> answers;  // per-answer halves, indices [V, 2V)
};

BagFeatures featurize(const Bag& bag, std::size_t vocab_size) {
    BagFeatures f;
    f.question = frequencies(bag.question_tokens, vocab_size, 0);
    for (const auto& inst : bag.instances) {
        f.answers.push_back(frequencies(inst, vocab_size, vocab_size));
    }
    return f;
}

// score and, for max pooling, which answer won
std::pair<double, std::size_t> bag_score(const LinearModel& m, const BagFeatures& f,
                                         BowPooling pooling) {
    if (pooling == BowPooling::Mean) {
        SparseVec mean = f.question;
        const double inv = 1.0 / static_cast<double>(f.answers.size());
        for (const auto& a : f.answers) add_sparse(mean, a, inv);
        return {sparse_score(m, mean), 0};
    }
    double best = 0.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < f.answers.size(); ++j) {
        SparseVec features = f.question;
        add_sparse(features, f.answers[j], 1.0);
        const double s = sparse_score(m, features);
        if (j == 0 || s > best) {  // strict: first occurrence wins ties
            best = s;
            best_j = j;
        }
    }
    return {best, best_j};
}

}  // namespace

double baseline_prob(const LinearModel& model, const Bag& bag, BowPooling pooling) {
    BagFeatures f = featurize(bag, model.vocab_size);
    return sigmoid(bag_score(model, f, pooling).first);
}

BaselineResult train_bow_baseline(const DatasetSplit& data, const TrainConfig& config,
                                  std::size_t vocab_size, BowPooling pooling) {
    if (data.train.empty()) throw DataError("baseline: empty train split");

    LinearModel model;
    model.vocab_size = vocab_size;
    model.weights = Tensor({2 * vocab_size});

    std::vector<BagFeatures> features;
    features.reserve(data.train.size());
    for (const auto& bag : data.train) features.push_back(featurize(bag, vocab_size));

    Tensor accum({2 * vocab_size});
    Tensor grad({2 * vocab_size});
    double bias_accum = 0.0;

    Rng shuffle_rng(config.seed + 0x517cc1b727220a95ULL);
    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t idx : order) {
            const Bag& bag = data.train[idx];
            const BagFeatures& f = features[idx];
            auto [score, winner] = bag_score(model, f, pooling);
            const double prob = sigmoid(score);
            const double d_score = prob - (bag.label == 1 ? 1.0 : 0.0);

            grad.fill(0.0);
            if (pooling == BowPooling::Mean) {
                for (const auto& [i, v] : f.question) grad[i] += d_score * v;
                const double inv = 1.0 / static_cast<double>(f.answers.size());
                for (const auto& a : f.answers) {
                    for (const auto& [i, v] : a) grad[i] += d_score * v * inv;
                }
            } else {
                for (const auto& [i, v] : f.question) grad[i] += d_score * v;
                for (const auto& [i, v] : f.answers[winner]) grad[i] += d_score * v;
            }
            if (config.lambda > 0.0) {
                for (std::size_t i = 0; i < grad.size(); ++i) {
                    grad[i] += 2.0 * config.lambda * model.weights[i];
                }
            }
            adagrad_step_span(model.weights.values(), grad.values(), accum.values(), config.rho,
                              1e-8, "baseline.weights");
            double bias_grad = d_score;
            adagrad_step_span({&model.bias, 1}, {&bias_grad, 1}, {&bias_accum, 1}, config.rho,
                              1e-8, "baseline.bias");
        }
    }

    std::vector<int> preds(data.test.size());
    std::vector<int> truths(data.test.size());
    for (std::size_t i = 0; i < data.test.size(); ++i) {
        preds[i] = predict_label(baseline_prob(model, data.test[i], pooling), config.threshold);
        truths[i] = data.test[i].label;
    }
    return BaselineResult{std::move(model), metrics(confusion(preds, truths))};
}

BaselineResult bow_mean_baseline(const DatasetSplit& data, const TrainConfig& config,
                                 std::size_t vocab_size) {
    return train_bow_baseline(data, config, vocab_size, BowPooling::Mean);
}

BaselineResult bow_max_baseline(const DatasetSplit& data, const TrainConfig& config,
                                std::size_t vocab_size) {
    return train_bow_baseline(data, config, vocab_size, BowPooling::Max);
}

}  // namespace milkit
