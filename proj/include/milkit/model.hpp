#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "milkit/embeddings.hpp"
#include "milkit/encoders.hpp"
#include "milkit/gradcheck.hpp"
#include "milkit/ingest.hpp"
#include "milkit/mil_ntn.hpp"

namespace milkit {

struct ModelDims {
    std::size_t vocab_size = 0;
    std::size_t d_w = 64;  // word embedding
    std::size_t h = 32;    // LSTM hidden, per direction
    std::size_t d_u = 32;  // user embedding
    std::size_t z = 8;     // tensor slices

    std::size_t d_q() const { return 2 * h + d_u; }  // question-user concat
    std::size_t d_a() const { return 2 * h; }        // mean-pooled answer
};

/// Every trainable parameter of the bag scorer: shared word embeddings, the
/// two sequence encoders, asker embeddings and the tensor-network head.
struct ModelParams {
    ModelDims dims;
    EmbeddingTable word_emb;
    BiLstmEncoder question_enc;
    BiLstmEncoder answer_enc;
    UserTable users;
    NtnParams ntn;

    /// Stable enumeration shared by the optimizer, checkpoints and the
    /// gradient checker. Gradient/accumulator structures built with
    /// zeros_like() align index-for-index.
    std::vector<NamedTensorRef> named_tensors();
};

/// Random init (uniform +-0.08) of everything from one seed; word embeddings
/// are normally overwritten by skip-gram pretraining afterwards.
ModelParams init_model(const ModelDims& dims, std::span<const long long> user_ids,
                       std::uint64_t seed);

/// Same structure, all parameter values zero. Used for gradients and
/// optimizer accumulators.
ModelParams zeros_like(const ModelParams& params);

/// Forward cache for one bag.
struct BagForward {
    SequenceEncoding question;
    std::vector<SequenceEncoding> answers;
    Tensor qu;
    std::size_t user_row = 0;
    BagScore score;
};

BagForward model_forward(const ModelParams& params, const Bag& bag);

/// Probability that the asker is satisfied.
double bag_probability(const ModelParams& params, const Bag& bag);

/// Full backward pass from d loss / d logit, accumulating into `grads`
/// (a zeros_like structure). Per-answer encoder backprop runs in parallel;
/// contributions are reduced in instance order, so results are bitwise
/// reproducible for any thread count.
void model_backward(const ModelParams& params, const Bag& bag, const BagForward& fwd,
                    double d_logit, ModelParams& grads);

/// Fixture for whole-model gradient checking: a model with every component
/// in play and one bag that touches it. Parameters are drawn wider than the
/// training init (scale * 0.08) so deep-path gradients sit well above the
/// resolution of central differences.
struct GradCheckSetup {
    ModelParams params;
    Bag bag;
};

GradCheckSetup make_gradcheck_setup(const ModelDims& dims, std::size_t n_answers,
                                    std::uint64_t seed, double scale = 10.0);

/// Cross-entropy loss through the whole model against finite differences,
/// one report group per parameter tensor.
GradCheckReport run_model_gradcheck(ModelParams& params, const Bag& bag,
                                    double epsilon = 1e-5);

}  // namespace milkit
