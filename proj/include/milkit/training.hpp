#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "milkit/model.hpp"

namespace milkit {

/// Per-bag cross entropy: -log p for satisfied bags, -log(1-p) otherwise.
/// p is clamped to [1e-12, 1 - 1e-12] before the log.
double bag_loss(double prob, int label);

struct TrainConfig {
    double lambda = 1e-4;  // L2 weight
    double rho = 0.01;     // initial learning rate
    int epochs = 30;
    std::uint64_t seed = 7;

    std::size_t d_w = 64;
    std::size_t h = 32;
    std::size_t d_u = 32;
    std::size_t z = 8;

    std::optional<double> clip_norm = 5.0;  // global gradient norm; nullopt = off
    bool freeze_embeddings = false;
    int patience = 5;          // epochs without validation improvement; 0 = off
    double threshold = 0.5;    // decision threshold for validation accuracy
    SkipGramConfig skipgram;   // word-embedding pretraining knobs

    ModelDims dims(std::size_t vocab_size) const { return {vocab_size, d_w, h, d_u, z}; }
};

/// Sum of squares over the trainable tensors.
double l2_norm_sq(ModelParams& params, bool skip_word_emb = false);

/// Regularized objective: loss + lambda * ||theta||^2. Its gradient
/// contribution is 2 lambda theta per scalar.
double objective(double batch_loss, ModelParams& params, double lambda);

/// Adds 2 lambda theta to every trainable gradient; returns lambda * ||theta||^2.
double add_l2_gradient(ModelParams& params, ModelParams& grads, double lambda,
                       bool skip_word_emb = false);

/// Accumulator-per-scalar step: accum += g^2, then
/// theta -= rho * g / max(sqrt(accum), eps). The eps floor only matters when
/// the accumulator is still zero; once any gradient has been seen the update
/// is exactly rho * g / sqrt(sum g^2).
void adagrad_step_span(std::span<double> params, std::span<const double> grads,
                       std::span<double> accum, double rho, double eps,
                       const std::string& group_name);

struct OptimizerState {
    ModelParams accum;  // squared-gradient accumulators, aligned with the params
    std::uint64_t step = 0;
};

OptimizerState make_optimizer_state(const ModelParams& params);

/// One optimizer step over the whole model. Non-finite gradients abort with
/// the offending parameter group's name.
void adagrad_update(OptimizerState& state, ModelParams& grads, ModelParams& params, double rho,
                    double eps = 1e-8, bool skip_word_emb = false);

/// Scale all gradients so their global L2 norm is at most clip.
void clip_global_norm(ModelParams& grads, double clip);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
};

/// The full training procedure: skip-gram pretraining of word embeddings,
/// user-table init from the train split's askers, then per-bag SGD epochs
/// (encode question and answers, concat user, score, cross entropy plus L2,
/// backward, adagrad step). Keeps the best-validation parameters; stops
/// early after `patience` epochs without improvement.
TrainResult train(const DatasetSplit& data, const TrainConfig& config, std::size_t vocab_size);

/// Satisfaction probability per bag, in input order. Parallel over bags.
std::vector<double> predict_probs(const ModelParams& params, std::span<const Bag> bags);

/// Labels at the given threshold.
std::vector<int> predict_labels(const ModelParams& params, std::span<const Bag> bags,
                                double threshold = 0.5);

}  // namespace milkit
