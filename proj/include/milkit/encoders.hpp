#pragma once

#include <functional>
#include <span>
#include <vector>

#include "milkit/embeddings.hpp"
#include "milkit/rng.hpp"
#include "milkit/tensor.hpp"

namespace milkit {

/// One direction's LSTM parameters. The output gate carries a peephole on the
/// freshly updated cell state: o_t = sigmoid(W_o x + G_o h_prev + V_o c_t + b_o).
struct LstmParams {
    Tensor W_i, W_c, W_f, W_o;  // {h, d_in}
    Tensor G_i, G_c, G_f, G_o;  // {h, h}
    Tensor V_o;                 // {h, h}
    Tensor b_i, b_c, b_f, b_o;  // {h}

    std::size_t hidden() const { return b_i.size(); }
    std::size_t input_dim() const { return W_i.dim(1); }

    /// Visit every tensor in a fixed order shared by init, optimizer state
    /// and checkpoints.
    void for_each(const std::function<void(const char*, Tensor&)>& fn);
};

LstmParams make_lstm_params(std::size_t hidden, std::size_t input_dim);
void init_uniform(LstmParams& p, Rng& rng, double range = 0.08);

/// Forward cache for one timestep; everything the backward pass needs.
struct LstmStep {
    Tensor x;               // input
    Tensor h_prev, c_prev;  // incoming state
    Tensor i, c_hat, f, o;  // gate activations
    Tensor c, tanh_c, h;    // new state
};

struct LstmRollout {
    std::vector<LstmStep> steps;  // processing order

    const Tensor& final_h() const { return steps.back().h; }
};

/// Single cell update from explicit inputs; returns (h_t, c_t) inside the
/// returned step cache.
LstmStep lstm_step(const LstmParams& p, const Tensor& x_t, const Tensor& h_prev,
                   const Tensor& c_prev);

/// Run the cell over a sequence from zero initial states.
LstmRollout lstm_forward(const LstmParams& p, std::span<const Tensor> xs);

/// Backpropagation through time. dh_inject[t] is the gradient arriving at
/// h_t from outside the recurrence (empty tensor = none). Parameter gradients
/// accumulate into `grads`; the return value is d loss / d x_t per step.
std::vector<Tensor> lstm_backward(const LstmParams& p, const LstmRollout& rollout,
                                  std::span<const Tensor> dh_inject, LstmParams& grads);

struct BiLstmEncoder {
    LstmParams fwd;
    LstmParams bwd;

    std::size_t hidden() const { return fwd.hidden(); }
};

BiLstmEncoder make_bilstm(std::size_t hidden, std::size_t input_dim);
void init_uniform(BiLstmEncoder& enc, Rng& rng, double range = 0.08);

/// Forward cache for an encoded sequence (both directions).
struct SequenceEncoding {
    Tensor out;  // {2h}
    LstmRollout fwd, bwd;
};

/// Question encoding: concat(final forward state, final backward state),
/// i.e. the forward state after the last token and the backward state after
/// it has read back to the first token.
SequenceEncoding encode_question_cached(const BiLstmEncoder& enc, std::span<const int> tokens,
                                        const EmbeddingTable& emb);
Tensor encode_question(const BiLstmEncoder& enc, std::span<const int> tokens,
                       const EmbeddingTable& emb);

/// Answer encoding: per-position concat of both directions' states, then a
/// mean over positions.
SequenceEncoding encode_answer_cached(const BiLstmEncoder& enc, std::span<const int> tokens,
                                      const EmbeddingTable& emb);
Tensor encode_answer(const BiLstmEncoder& enc, std::span<const int> tokens,
                     const EmbeddingTable& emb);

/// Backward through either encoding. d_out is the gradient at the {2h}
/// output; parameter gradients accumulate into enc_grads; the return value
/// is d loss / d embedding, one {d_w} vector per original token position.
std::vector<Tensor> encode_question_backward(const BiLstmEncoder& enc,
                                             const SequenceEncoding& cache, const Tensor& d_out,
                                             BiLstmEncoder& enc_grads);
std::vector<Tensor> encode_answer_backward(const BiLstmEncoder& enc,
                                           const SequenceEncoding& cache, const Tensor& d_out,
                                           BiLstmEncoder& enc_grads);

/// [q ; u] and its gradient split.
Tensor qu_concat(const Tensor& q_vec, const Tensor& u_vec);
void qu_concat_backward(const Tensor& d_out, Tensor& d_q, Tensor& d_u);

}  // namespace milkit
