#include "milkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace milkit {

double bag_loss(double prob, int label) {
    if (label != 1 && label != -1) {
        throw DataError("bag_loss: label must be +1 or -1, got " + std::to_string(label));
    }
    const double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double l2_norm_sq(ModelParams& params, bool skip_word_emb) {
    double acc = 0.0;
    for (const auto& ref : params.named_tensors()) {
        if (skip_word_emb && ref.name == "word_emb") continue;
        for (std::size_t i = 0; i < ref.tensor->size(); ++i) {
            const double v = (*ref.tensor)[i];
            acc += v * v;
        }
    }
    return acc;
}

double objective(double batch_loss, ModelParams& params, double lambda) {
    if (lambda < 0.0) throw DataError("objective: lambda must be >= 0");
    if (lambda == 0.0) return batch_loss;
    return batch_loss + lambda * l2_norm_sq(params);
}

double add_l2_gradient(ModelParams& params, ModelParams& grads, double lambda,
                       bool skip_word_emb) {
    if (lambda == 0.0) return 0.0;
    double norm_sq = 0.0;
    auto prefs = params.named_tensors();
    auto grefs = grads.named_tensors();
    for (std::size_t g = 0; g < prefs.size(); ++g) {
        if (skip_word_emb && prefs[g].name == "word_emb") continue;
        Tensor& theta = *prefs[g].tensor;
        Tensor& grad = *grefs[g].tensor;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            norm_sq += theta[i] * theta[i];
            grad[i] += 2.0 * lambda * theta[i];
        }
    }
    return lambda * norm_sq;
}

void adagrad_step_span(std::span<double> params, std::span<const double> grads,
                       std::span<double> accum, double rho, double eps,
                       const std::string& group_name) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g)) {
            throw NumericError("adagrad: non-finite gradient in " + group_name + " at index " +
                               std::to_string(i));
        }
        accum[i] += g * g;
        const double denom = std::max(std::sqrt(accum[i]), eps);
        params[i] -= rho * g / denom;
    }
}

OptimizerState make_optimizer_state(const ModelParams& params) {
    return OptimizerState{zeros_like(params), 0};
}

void adagrad_update(OptimizerState& state, ModelParams& grads, ModelParams& params, double rho,
                    double eps, bool skip_word_emb) {
    auto prefs = params.named_tensors();
    auto grefs = grads.named_tensors();
    auto arefs = state.accum.named_tensors();
    for (std::size_t g = 0; g < prefs.size(); ++g) {
        if (skip_word_emb && prefs[g].name == "word_emb") continue;
        adagrad_step_span(prefs[g].tensor->values(), grefs[g].tensor->values(),
                          arefs[g].tensor->values(), rho, eps, prefs[g].name);
    }
    ++state.step;
}

void clip_global_norm(ModelParams& grads, double clip) {
    double norm_sq = 0.0;
    auto refs = grads.named_tensors();
    for (const auto& ref : refs) {
        for (std::size_t i = 0; i < ref.tensor->size(); ++i) {
            const double v = (*ref.tensor)[i];
            norm_sq += v * v;
        }
    }
    const double norm = std::sqrt(norm_sq);
    if (norm <= clip || norm == 0.0) return;
    const double scale = clip / norm;
    for (const auto& ref : refs) {
        for (std::size_t i = 0; i < ref.tensor->size(); ++i) (*ref.tensor)[i] *= scale;
    }
}

namespace {

void zero_params(ModelParams& grads) {
    for (const auto& ref : grads.named_tensors()) ref.tensor->fill(0.0);
}

double validation_accuracy(const ModelParams& params, std::span<const Bag> bags,
                           double threshold) {
    if (bags.empty()) return 0.0;
    std::vector<int> preds = predict_labels(params, bags, threshold);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < bags.size(); ++i) {
        if (preds[i] == bags[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(bags.size());
}

}  // namespace

TrainResult train(const DatasetSplit& data, const TrainConfig& config, std::size_t vocab_size) {
    if (data.train.empty()) throw DataError("train: empty train split");
    for (const auto& bag : data.train) {
        if (bag.instances.empty()) {
            throw DataError("train: bag " + std::to_string(bag.question_id) + " has no answers");
        }
    }

    // Pretraining corpus: every question and answer sequence in the train split.
    std::vector<std::vector<int>> corpus;
    for (const auto& bag : data.train) {
        corpus.push_back(bag.question_tokens);
        for (const auto& inst : bag.instances) corpus.push_back(inst);
    }

    // Distinct askers, sorted so table rows are independent of bag order.
    std::set<long long> asker_set;
    for (const auto& bag : data.train) asker_set.insert(bag.user_id);
    std::vector<long long> askers(asker_set.begin(), asker_set.end());

    ModelParams params = init_model(config.dims(vocab_size), askers, config.seed);
    PretrainResult pretrained =
        pretrain_skipgram(corpus, config.skipgram, vocab_size, config.d_w);
    params.word_emb = std::move(pretrained.table);

    TrainResult result;
    result.best_epoch = 0;

    if (config.epochs <= 0) {
        result.params = std::move(params);
        return result;
    }

    OptimizerState opt = make_optimizer_state(params);
    ModelParams grads = zeros_like(params);
    Rng shuffle_rng(config.seed + 0x517cc1b727220a95ULL);
    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    ModelParams best_params = params;
    double best_val = -1.0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const Bag& bag = data.train[idx];
            BagForward fwd = model_forward(params, bag);
            const double data_loss = bag_loss(fwd.score.prob, bag.label);
            if (!std::isfinite(data_loss)) {
                throw NumericError("train: non-finite loss on bag " +
                                   std::to_string(bag.question_id));
            }
            zero_params(grads);
            const double y = bag.label == 1 ? 1.0 : 0.0;
            model_backward(params, bag, fwd, fwd.score.prob - y, grads);
            const double l2_term =
                add_l2_gradient(params, grads, config.lambda, config.freeze_embeddings);
            loss_sum += data_loss + l2_term;
            if (config.clip_norm) clip_global_norm(grads, *config.clip_norm);
            adagrad_update(opt, grads, params, config.rho, 1e-8, config.freeze_embeddings);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(data.train.size());
        log.val_accuracy = validation_accuracy(params, data.validation, config.threshold);
        result.log.push_back(log);

        if (!data.validation.empty() && log.val_accuracy > best_val) {
            best_val = log.val_accuracy;
            best_params = params;
            result.best_epoch = epoch;
        }
        if (!data.validation.empty() && config.patience > 0 &&
            epoch - result.best_epoch >= config.patience && result.best_epoch > 0) {
            break;
        }
    }

    if (!data.validation.empty() && best_val >= 0.0) {
        result.params = std::move(best_params);
        result.best_val_accuracy = best_val;
    } else {
        result.params = std::move(params);
        result.best_epoch = config.epochs;
        result.best_val_accuracy = result.log.empty() ? 0.0 : result.log.back().val_accuracy;
    }
    return result;
}

std::vector<double> predict_probs(const ModelParams& params, std::span<const Bag> bags) {
    std::vector<double> probs(bags.size());
#pragma omp parallel for schedule(dynamic) if (bags.size() > 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(bags.size()); ++i) {
        probs[i] = bag_probability(params, bags[static_cast<std::size_t>(i)]);
    }
    return probs;
}

std::vector<int> predict_labels(const ModelParams& params, std::span<const Bag> bags,
                                double threshold) {
    std::vector<double> probs = predict_probs(params, bags);
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        labels[i] = predict_label(probs[i], threshold);
    }
    return labels;
}

}  // namespace milkit
