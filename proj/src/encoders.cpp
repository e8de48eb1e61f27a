#include "milkit/encoders.hpp"

#include <cmath>

namespace milkit {

void LstmParams::for_each(const std::function<void(const char*, Tensor&)>& fn) {
    fn("W_i", W_i);
    fn("W_c", W_c);
    fn("W_f", W_f);
    fn("W_o", W_o);
    fn("G_i", G_i);
    fn("G_c", G_c);
    fn("G_f", G_f);
    fn("G_o", G_o);
    fn("V_o", V_o);
    fn("b_i", b_i);
    fn("b_c", b_c);
    fn("b_f", b_f);
    fn("b_o", b_o);
}

LstmParams make_lstm_params(std::size_t hidden, std::size_t input_dim) {
    LstmParams p;
    p.W_i = Tensor({hidden, input_dim});
    p.W_c = Tensor({hidden, input_dim});
    p.W_f = Tensor({hidden, input_dim});
    p.W_o = Tensor({hidden, input_dim});
    p.G_i = Tensor({hidden, hidden});
    p.G_c = Tensor({hidden, hidden});
    p.G_f = Tensor({hidden, hidden});
    p.G_o = Tensor({hidden, hidden});
    p.V_o = Tensor({hidden, hidden});
    p.b_i = Tensor({hidden});
    p.b_c = Tensor({hidden});
    p.b_f = Tensor({hidden});
    p.b_o = Tensor({hidden});
    return p;
}

void init_uniform(LstmParams& p, Rng& rng, double range) {
    p.for_each([&](const char*, Tensor& t) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-range, range);
    });
}

LstmStep lstm_step(const LstmParams& p, const Tensor& x_t, const Tensor& h_prev,
                   const Tensor& c_prev) {
    const std::size_t h = p.hidden();
    if (x_t.rank() != 1 || x_t.size() != p.input_dim()) {
        throw ShapeError("lstm_step: input is " + shape_str(x_t) + ", cell expects [" +
                         std::to_string(p.input_dim()) + "]");
    }
    if (h_prev.size() != h || c_prev.size() != h) {
        throw ShapeError("lstm_step: state size mismatch " + shape_str(h_prev) + ", " +
                         shape_str(c_prev) + " for hidden " + std::to_string(h));
    }

    LstmStep s;
    s.x = x_t;
    s.h_prev = h_prev;
    s.c_prev = c_prev;

    Tensor pre_i = p.b_i;
    matvec_acc(p.W_i, x_t, pre_i);
    matvec_acc(p.G_i, h_prev, pre_i);
    s.i = activation(pre_i, Activation::Sigmoid);

    Tensor pre_c = p.b_c;
    matvec_acc(p.W_c, x_t, pre_c);
    matvec_acc(p.G_c, h_prev, pre_c);
    s.c_hat = activation(pre_c, Activation::Tanh);

    Tensor pre_f = p.b_f;
    matvec_acc(p.W_f, x_t, pre_f);
    matvec_acc(p.G_f, h_prev, pre_f);
    s.f = activation(pre_f, Activation::Sigmoid);

    s.c = Tensor({h});
    for (std::size_t k = 0; k < h; ++k) s.c[k] = s.i[k] * s.c_hat[k] + s.f[k] * c_prev[k];

    // output gate sees the new cell state through V_o
    Tensor pre_o = p.b_o;
    matvec_acc(p.W_o, x_t, pre_o);
    matvec_acc(p.G_o, h_prev, pre_o);
    matvec_acc(p.V_o, s.c, pre_o);
    s.o = activation(pre_o, Activation::Sigmoid);

    s.tanh_c = Tensor({h});
    s.h = Tensor({h});
    for (std::size_t k = 0; k < h; ++k) {
        s.tanh_c[k] = std::tanh(s.c[k]);
        s.h[k] = s.o[k] * s.tanh_c[k];
    }
    return s;
}

LstmRollout lstm_forward(const LstmParams& p, std::span<const Tensor> xs) {
    if (xs.empty()) throw ShapeError("lstm_forward: empty sequence");
    const std::size_t h = p.hidden();
    LstmRollout rollout;
    rollout.steps.reserve(xs.size());
    Tensor h_state({h}), c_state({h});
    for (const Tensor& x : xs) {
        rollout.steps.push_back(lstm_step(p, x, h_state, c_state));
        h_state = rollout.steps.back().h;
        c_state = rollout.steps.back().c;
    }
    return rollout;
}

std::vector<Tensor> lstm_backward(const LstmParams& p, const LstmRollout& rollout,
                                  std::span<const Tensor> dh_inject, LstmParams& grads) {
    const std::size_t h = p.hidden();
    const std::size_t T = rollout.steps.size();
    if (dh_inject.size() != T) throw ShapeError("lstm_backward: injection count != step count");

    std::vector<Tensor> dx(T);
    Tensor dh_carry({h}), dc_carry({h});
    Tensor dh({h}), dc_total({h});
    Tensor di_pre({h}), dc_hat_pre({h}), df_pre({h}), do_pre({h});

    for (std::size_t t = T; t-- > 0;) {
        const LstmStep& s = rollout.steps[t];

        dh = dh_carry;
        if (!dh_inject[t].empty()) add_scaled(dh, dh_inject[t], 1.0);

        // h = o * tanh(c); o also feeds back into c through the peephole
        for (std::size_t k = 0; k < h; ++k) {
            const double d_o = dh[k] * s.tanh_c[k];
            do_pre[k] = d_o * s.o[k] * (1.0 - s.o[k]);
            dc_total[k] = dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]) + dc_carry[k];
        }
        matvec_transpose_acc(p.V_o, do_pre, dc_total);

        for (std::size_t k = 0; k < h; ++k) {
            const double d = dc_total[k];
            di_pre[k] = d * s.c_hat[k] * s.i[k] * (1.0 - s.i[k]);
            dc_hat_pre[k] = d * s.i[k] * (1.0 - s.c_hat[k] * s.c_hat[k]);
            df_pre[k] = d * s.c_prev[k] * s.f[k] * (1.0 - s.f[k]);
            dc_carry[k] = d * s.f[k];
        }

        outer_acc(di_pre, s.x, grads.W_i);
        outer_acc(dc_hat_pre, s.x, grads.W_c);
        outer_acc(df_pre, s.x, grads.W_f);
        outer_acc(do_pre, s.x, grads.W_o);
        outer_acc(di_pre, s.h_prev, grads.G_i);
        outer_acc(dc_hat_pre, s.h_prev, grads.G_c);
        outer_acc(df_pre, s.h_prev, grads.G_f);
        outer_acc(do_pre, s.h_prev, grads.G_o);
        outer_acc(do_pre, s.c, grads.V_o);
        add_scaled(grads.b_i, di_pre, 1.0);
        add_scaled(grads.b_c, dc_hat_pre, 1.0);
        add_scaled(grads.b_f, df_pre, 1.0);
        add_scaled(grads.b_o, do_pre, 1.0);

        dx[t] = Tensor({p.input_dim()});
        matvec_transpose_acc(p.W_i, di_pre, dx[t]);
        matvec_transpose_acc(p.W_c, dc_hat_pre, dx[t]);
        matvec_transpose_acc(p.W_f, df_pre, dx[t]);
        matvec_transpose_acc(p.W_o, do_pre, dx[t]);

        dh_carry.fill(0.0);
        matvec_transpose_acc(p.G_i, di_pre, dh_carry);
        matvec_transpose_acc(p.G_c, dc_hat_pre, dh_carry);
        matvec_transpose_acc(p.G_f, df_pre, dh_carry);
        matvec_transpose_acc(p.G_o, do_pre, dh_carry);
    }
    return dx;
}

BiLstmEncoder make_bilstm(std::size_t hidden, std::size_t input_dim) {
    return BiLstmEncoder{make_lstm_params(hidden, input_dim), make_lstm_params(hidden, input_dim)};
}

void init_uniform(BiLstmEncoder& enc, Rng& rng, double range) {
    init_uniform(enc.fwd, rng, range);
    init_uniform(enc.bwd, rng, range);
}

namespace {

std::vector<Tensor> embed_tokens(std::span<const int> tokens, const EmbeddingTable& emb) {
    if (tokens.empty()) throw ShapeError("encoder: empty token sequence");
    std::vector<Tensor> xs;
    xs.reserve(tokens.size());
    for (int t : tokens) xs.push_back(lookup(emb, t));
    return xs;
}

std::vector<Tensor> reversed(std::vector<Tensor> xs) {
    std::reverse(xs.begin(), xs.end());
    return xs;
}

}  // namespace

SequenceEncoding encode_question_cached(const BiLstmEncoder& enc, std::span<const int> tokens,
                                        const EmbeddingTable& emb) {
    std::vector<Tensor> xs = embed_tokens(tokens, emb);
    SequenceEncoding out;
    out.fwd = lstm_forward(enc.fwd, xs);
    out.bwd = lstm_forward(enc.bwd, reversed(xs));
    const std::size_t h = enc.hidden();
    out.out = Tensor({2 * h});
    for (std::size_t k = 0; k < h; ++k) {
        out.out[k] = out.fwd.final_h()[k];
        out.out[h + k] = out.bwd.final_h()[k];
    }
    return out;
}

Tensor encode_question(const BiLstmEncoder& enc, std::span<const int> tokens,
                       const EmbeddingTable& emb) {
    return encode_question_cached(enc, tokens, emb).out;
}

SequenceEncoding encode_answer_cached(const BiLstmEncoder& enc, std::span<const int> tokens,
                                      const EmbeddingTable& emb) {
    std::vector<Tensor> xs = embed_tokens(tokens, emb);
    SequenceEncoding out;
    out.fwd = lstm_forward(enc.fwd, xs);
    out.bwd = lstm_forward(enc.bwd, reversed(xs));
    const std::size_t h = enc.hidden();
    const std::size_t T = tokens.size();
    // stack per-position [fwd_i ; bwd_i] as columns, then average them
    Tensor stacked({2 * h, T});
    for (std::size_t i = 0; i < T; ++i) {
        const Tensor& hf = out.fwd.steps[i].h;
        const Tensor& hb = out.bwd.steps[T - 1 - i].h;
        for (std::size_t k = 0; k < h; ++k) {
            stacked(k, i) = hf[k];
            stacked(h + k, i) = hb[k];
        }
    }
    out.out = meanpool_cols(stacked);
    return out;
}

Tensor encode_answer(const BiLstmEncoder& enc, std::span<const int> tokens,
                     const EmbeddingTable& emb) {
    return encode_answer_cached(enc, tokens, emb).out;
}

std::vector<Tensor> encode_question_backward(const BiLstmEncoder& enc,
                                             const SequenceEncoding& cache, const Tensor& d_out,
                                             BiLstmEncoder& enc_grads) {
    const std::size_t h = enc.hidden();
    const std::size_t T = cache.fwd.steps.size();
    if (d_out.size() != 2 * h) throw ShapeError("encode_question_backward: bad gradient size");

    Tensor d_fwd({h}), d_bwd({h});
    for (std::size_t k = 0; k < h; ++k) {
        d_fwd[k] = d_out[k];
        d_bwd[k] = d_out[h + k];
    }
    std::vector<Tensor> inject_f(T), inject_b(T);
    inject_f[T - 1] = d_fwd;
    inject_b[T - 1] = d_bwd;

    std::vector<Tensor> dx_f = lstm_backward(enc.fwd, cache.fwd, inject_f, enc_grads.fwd);
    std::vector<Tensor> dx_b = lstm_backward(enc.bwd, cache.bwd, inject_b, enc_grads.bwd);

    std::vector<Tensor> d_emb(T);
    for (std::size_t i = 0; i < T; ++i) {
        d_emb[i] = std::move(dx_f[i]);
        add_scaled(d_emb[i], dx_b[T - 1 - i], 1.0);
    }
    return d_emb;
}

std::vector<Tensor> encode_answer_backward(const BiLstmEncoder& enc,
                                           const SequenceEncoding& cache, const Tensor& d_out,
                                           BiLstmEncoder& enc_grads) {
    const std::size_t h = enc.hidden();
    const std::size_t T = cache.fwd.steps.size();
    if (d_out.size() != 2 * h) throw ShapeError("encode_answer_backward: bad gradient size");

    const double inv_t = 1.0 / static_cast<double>(T);
    Tensor d_fwd({h}), d_bwd({h});
    for (std::size_t k = 0; k < h; ++k) {
        d_fwd[k] = d_out[k] * inv_t;
        d_bwd[k] = d_out[h + k] * inv_t;
    }
    std::vector<Tensor> inject_f(T, d_fwd), inject_b(T, d_bwd);

    std::vector<Tensor> dx_f = lstm_backward(enc.fwd, cache.fwd, inject_f, enc_grads.fwd);
    std::vector<Tensor> dx_b = lstm_backward(enc.bwd, cache.bwd, inject_b, enc_grads.bwd);

    std::vector<Tensor> d_emb(T);
    for (std::size_t i = 0; i < T; ++i) {
        d_emb[i] = std::move(dx_f[i]);
        add_scaled(d_emb[i], dx_b[T - 1 - i], 1.0);
    }
    return d_emb;
}

Tensor qu_concat(const Tensor& q_vec, const Tensor& u_vec) {
    require_vector(q_vec, "qu_concat q");
    require_vector(u_vec, "qu_concat u");
    Tensor out({q_vec.size() + u_vec.size()});
    for (std::size_t i = 0; i < q_vec.size(); ++i) out[i] = q_vec[i];
    for (std::size_t i = 0; i < u_vec.size(); ++i) out[q_vec.size() + i] = u_vec[i];
    return out;
}

void qu_concat_backward(const Tensor& d_out, Tensor& d_q, Tensor& d_u) {
    if (d_out.size() != d_q.size() + d_u.size()) {
        throw ShapeError("qu_concat_backward: gradient size " + shape_str(d_out) +
                         " != " + shape_str(d_q) + " + " + shape_str(d_u));
    }
    for (std::size_t i = 0; i < d_q.size(); ++i) d_q[i] += d_out[i];
    for (std::size_t i = 0; i < d_u.size(); ++i) d_u[i] += d_out[d_q.size() + i];
}

}  // namespace milkit
