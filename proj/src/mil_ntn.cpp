#include "milkit/mil_ntn.hpp"

#include <cmath>
#include <string>

namespace milkit {

NtnParams make_ntn(std::size_t slices, std::size_t d_q, std::size_t d_a, bool classic) {
    if (slices < 1) throw ShapeError("make_ntn: need at least one slice");
    NtnParams p;
    p.W = Tensor({slices, d_q, d_a});
    p.mu = Tensor({slices});
    if (classic) {
        p.V = Tensor({slices, d_q + d_a});
        p.b = Tensor({slices});
    }
    return p;
}

void init_uniform(NtnParams& p, Rng& rng, double range) {
    for (std::size_t i = 0; i < p.W.size(); ++i) p.W[i] = rng.uniform(-range, range);
    for (std::size_t i = 0; i < p.mu.size(); ++i) p.mu[i] = rng.uniform(-range, range);
    for (std::size_t i = 0; i < p.V.size(); ++i) p.V[i] = rng.uniform(-range, range);
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] = rng.uniform(-range, range);
}

namespace {

// qu^T W[s] a using the contiguous slice of the {z, d_q, d_a} tensor
double slice_product(const Tensor& w, std::size_t s, const Tensor& qu, const Tensor& a) {
    const std::size_t d_q = w.dim(1), d_a = w.dim(2);
    const double* slice = w.data() + s * d_q * d_a;
    double acc = 0.0;
    for (std::size_t i = 0; i < d_q; ++i) {
        const double* row = slice + i * d_a;
        double rowacc = 0.0;
        for (std::size_t j = 0; j < d_a; ++j) rowacc += row[j] * a[j];
        acc += qu[i] * rowacc;
    }
    return acc;
}

void check_sides(const Tensor& qu, const NtnParams& params, const char* what) {
    require_vector(qu, what);
    if (qu.size() != params.d_q()) {
        throw ShapeError(std::string(what) + ": question side is " + shape_str(qu) +
                         ", W expects [" + std::to_string(params.d_q()) + "]");
    }
}

}  // namespace

double ntn_classic(const Tensor& e1, const Tensor& e2, const NtnParams& params) {
    check_sides(e1, params, "ntn_classic");
    require_vector(e2, "ntn_classic");
    if (e2.size() != params.d_a()) {
        throw ShapeError("ntn_classic: entity side is " + shape_str(e2) + ", W expects [" +
                         std::to_string(params.d_a()) + "]");
    }
    const std::size_t z = params.slices();
    if (!params.V.empty() && params.V.shape() != std::vector<std::size_t>{z, e1.size() + e2.size()}) {
        throw ShapeError("ntn_classic: V is " + shape_str(params.V) + ", expected [" +
                         std::to_string(z) + "x" + std::to_string(e1.size() + e2.size()) + "]");
    }

    double score = 0.0;
    for (std::size_t s = 0; s < z; ++s) {
        double pre = slice_product(params.W, s, e1, e2);
        if (!params.V.empty()) {
            const double* vrow = params.V.data() + s * (e1.size() + e2.size());
            for (std::size_t i = 0; i < e1.size(); ++i) pre += vrow[i] * e1[i];
            for (std::size_t j = 0; j < e2.size(); ++j) pre += vrow[e1.size() + j] * e2[j];
        }
        if (!params.b.empty()) pre += params.b[s];
        score += params.mu[s] * std::tanh(pre);
    }
    return score;
}

BagScore score_bag(const Tensor& qu, std::span<const Tensor> answers, const NtnParams& params) {
    if (answers.empty()) throw ShapeError("score_bag: empty bag");
    check_sides(qu, params, "score_bag");
    for (const Tensor& a : answers) {
        require_vector(a, "score_bag answer");
        if (a.size() != params.d_a()) {
            throw ShapeError("score_bag: answer is " + shape_str(a) + ", W expects [" +
                             std::to_string(params.d_a()) + "]");
        }
    }

    const std::size_t z = params.slices();
    const std::size_t n = answers.size();
    BagScore score;
    score.H = Tensor({z, n});
    double* ph = score.H.data();
    // columns are independent; fixed (s, j) indexing keeps the result
    // identical for any thread count
#pragma omp parallel for collapse(2) schedule(static) if (z * n * params.d_q() * params.d_a() > 65536)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(z); ++s) {
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
            ph[s * static_cast<std::ptrdiff_t>(n) + j] = std::tanh(
                slice_product(params.W, static_cast<std::size_t>(s), qu,
                              answers[static_cast<std::size_t>(j)]));
        }
    }

    MaxPoolResult pooled = maxpool_rows(score.H);
    score.v = std::move(pooled.values);
    score.argmax = std::move(pooled.argmax);
    score.logit = dot(params.mu, score.v);
    score.prob = sigmoid(score.logit);
    return score;
}

int predict_label(double prob, double threshold) { return prob >= threshold ? +1 : -1; }

int predict_label(const BagScore& score, double threshold) {
    return predict_label(score.prob, threshold);
}

BagScoreGrads score_bag_backward(const Tensor& qu, std::span<const Tensor> answers,
                                 const NtnParams& params, const BagScore& score, double d_logit,
                                 NtnParams& param_grads) {
    const std::size_t z = params.slices();
    const std::size_t d_q = params.d_q(), d_a = params.d_a();

    BagScoreGrads grads;
    grads.d_qu = Tensor({d_q});
    grads.d_answers.resize(answers.size());
    for (std::size_t j = 0; j < answers.size(); ++j) grads.d_answers[j] = Tensor({d_a});

    for (std::size_t s = 0; s < z; ++s) {
        // logit = sum_s mu_s * v_s, v_s = H[s][winner]
        param_grads.mu[s] += d_logit * score.v[s];
        const std::size_t j = score.argmax[s];
        const Tensor& a = answers[j];
        const double d_h = d_logit * params.mu[s];
        const double d_pre = d_h * (1.0 - score.H(s, j) * score.H(s, j));

        const double* slice = params.W.data() + s * d_q * d_a;
        double* slice_grad = param_grads.W.data() + s * d_q * d_a;
        double* d_a_vec = grads.d_answers[j].data();
        for (std::size_t p = 0; p < d_q; ++p) {
            const double* row = slice + p * d_a;
            double* grow = slice_grad + p * d_a;
            const double qp = qu[p];
            double rowacc = 0.0;
            for (std::size_t r = 0; r < d_a; ++r) {
                rowacc += row[r] * a[r];
                grow[r] += d_pre * qp * a[r];
                d_a_vec[r] += d_pre * qp * row[r];
            }
            grads.d_qu[p] += d_pre * rowacc;
        }
    }
    return grads;
}

}  // namespace milkit
