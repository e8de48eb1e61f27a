#pragma once

#include <span>
#include <vector>

#include "milkit/rng.hpp"
#include "milkit/tensor.hpp"

namespace milkit {

/// Neural tensor network parameters. W holds z bilinear slices of shape
/// d_q x d_a (rectangular: the question side carries the user embedding,
/// so the two sides differ in dimension). V and b only participate in the
/// classic two-entity form; bag scoring drops them.
struct NtnParams {
    Tensor W;   // {z, d_q, d_a}
    Tensor mu;  // {z}
    Tensor V;   // {z, d1 + d2}, classic mode only (may be empty = zeros)
    Tensor b;   // {z}, classic mode only (may be empty = zeros)

    std::size_t slices() const { return W.dim(0); }
    std::size_t d_q() const { return W.dim(1); }
    std::size_t d_a() const { return W.dim(2); }
};

NtnParams make_ntn(std::size_t slices, std::size_t d_q, std::size_t d_a, bool classic = false);
void init_uniform(NtnParams& p, Rng& rng, double range = 0.08);

/// Classic two-entity score: mu^T tanh(e1^T W[1:z] e2 + V [e1;e2] + b).
/// Requires d_q == d_a == |e1| == |e2| when V is present.
double ntn_classic(const Tensor& e1, const Tensor& e2, const NtnParams& params);

/// Everything score_bag computes, kept for the backward pass and for
/// diagnostics: the per-slice/per-instance activation matrix, the pooled
/// bag vector with its routing, and the final score.
struct BagScore {
    Tensor H;                         // {z, n}: tanh of slice-vs-instance products
    Tensor v;                         // {z}: row-wise max of H
    std::vector<std::size_t> argmax;  // winning instance per slice
    double logit = 0.0;               // mu . v
    double prob = 0.0;                // sigmoid(logit)
};

/// Score one bag: H[s][j] = tanh(qu^T W[s] a_j), v = row-max of H,
/// logit = mu . v, prob = sigmoid(logit). Instances are independent columns,
/// so any permutation of `answers` yields bitwise identical v/logit/prob.
BagScore score_bag(const Tensor& qu, std::span<const Tensor> answers, const NtnParams& params);

/// +1 iff prob >= threshold (boundary counts as satisfied).
int predict_label(double prob, double threshold = 0.5);
int predict_label(const BagScore& score, double threshold = 0.5);

struct BagScoreGrads {
    Tensor d_qu;
    std::vector<Tensor> d_answers;  // aligned with the input list
};

/// Backward from d loss / d logit. Gradient reaches an instance only through
/// the slices it won; instances that win no slice get exactly zero. W and mu
/// gradients accumulate into `param_grads`.
BagScoreGrads score_bag_backward(const Tensor& qu, std::span<const Tensor> answers,
                                 const NtnParams& params, const BagScore& score, double d_logit,
                                 NtnParams& param_grads);

}  // namespace milkit
