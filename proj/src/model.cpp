#include "milkit/model.hpp"

#include <cmath>
#include <string>

namespace milkit {

namespace {

void accumulate(LstmParams& dst, LstmParams& src) {
    std::vector<Tensor*> dst_refs, src_refs;
    dst.for_each([&](const char*, Tensor& t) { dst_refs.push_back(&t); });
    src.for_each([&](const char*, Tensor& t) { src_refs.push_back(&t); });
    for (std::size_t k = 0; k < dst_refs.size(); ++k) add_scaled(*dst_refs[k], *src_refs[k], 1.0);
}

}  // namespace

std::vector<NamedTensorRef> ModelParams::named_tensors() {
    std::vector<NamedTensorRef> refs;
    refs.push_back({"word_emb", &word_emb.matrix});
    auto add_encoder = [&](const std::string& prefix, BiLstmEncoder& enc) {
        enc.fwd.for_each([&](const char* n, Tensor& t) { refs.push_back({prefix + ".fwd." + n, &t}); });
        enc.bwd.for_each([&](const char* n, Tensor& t) { refs.push_back({prefix + ".bwd." + n, &t}); });
    };
    add_encoder("q_enc", question_enc);
    add_encoder("a_enc", answer_enc);
    refs.push_back({"users", &users.matrix});
    refs.push_back({"ntn.W", &ntn.W});
    refs.push_back({"ntn.mu", &ntn.mu});
    return refs;
}

ModelParams init_model(const ModelDims& dims, std::span<const long long> user_ids,
                       std::uint64_t seed) {
    if (dims.vocab_size < 2 || dims.d_w < 1 || dims.h < 1 || dims.d_u < 1 || dims.z < 1) {
        throw DataError("init_model: dimensions must be positive (vocab >= 2)");
    }
    ModelParams m;
    m.dims = dims;
    Rng rng(seed);
    m.word_emb.matrix = Tensor({dims.vocab_size, dims.d_w});
    for (std::size_t i = 0; i < m.word_emb.matrix.size(); ++i) {
        m.word_emb.matrix[i] = rng.uniform(-0.08, 0.08);
    }
    m.question_enc = make_bilstm(dims.h, dims.d_w);
    init_uniform(m.question_enc, rng);
    m.answer_enc = make_bilstm(dims.h, dims.d_w);
    init_uniform(m.answer_enc, rng);
    m.users = init_user_table(user_ids, dims.d_u, rng.next_u64());
    m.ntn = make_ntn(dims.z, dims.d_q(), dims.d_a());
    init_uniform(m.ntn, rng);
    return m;
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z;
    z.dims = params.dims;
    z.word_emb.matrix = Tensor(params.word_emb.matrix.shape());
    z.question_enc = make_bilstm(params.dims.h, params.dims.d_w);
    z.answer_enc = make_bilstm(params.dims.h, params.dims.d_w);
    z.users.matrix = Tensor(params.users.matrix.shape());
    z.users.row_of = params.users.row_of;
    z.ntn = make_ntn(params.dims.z, params.dims.d_q(), params.dims.d_a());
    return z;
}

BagForward model_forward(const ModelParams& params, const Bag& bag) {
    BagForward fwd;
    fwd.question = encode_question_cached(params.question_enc, bag.question_tokens, params.word_emb);

    const std::size_t n = bag.instances.size();
    fwd.answers.resize(n);
    // instances are independent; slot-per-answer keeps this deterministic
#pragma omp parallel for schedule(dynamic) if (n > 1)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
        fwd.answers[j] = encode_answer_cached(params.answer_enc,
                                              bag.instances[static_cast<std::size_t>(j)],
                                              params.word_emb);
    }

    fwd.user_row = params.users.row_for(bag.user_id);
    Tensor u_vec({params.users.dim()});
    const double* urow = params.users.matrix.data() + fwd.user_row * params.users.dim();
    for (std::size_t k = 0; k < params.users.dim(); ++k) u_vec[k] = urow[k];

    fwd.qu = qu_concat(fwd.question.out, u_vec);

    std::vector<Tensor> answer_vecs;
    answer_vecs.reserve(n);
    for (const auto& a : fwd.answers) answer_vecs.push_back(a.out);
    fwd.score = score_bag(fwd.qu, answer_vecs, params.ntn);
    return fwd;
}

double bag_probability(const ModelParams& params, const Bag& bag) {
    return model_forward(params, bag).score.prob;
}

void model_backward(const ModelParams& params, const Bag& bag, const BagForward& fwd,
                    double d_logit, ModelParams& grads) {
    std::vector<Tensor> answer_vecs;
    answer_vecs.reserve(fwd.answers.size());
    for (const auto& a : fwd.answers) answer_vecs.push_back(a.out);

    BagScoreGrads score_grads =
        score_bag_backward(fwd.qu, answer_vecs, params.ntn, fwd.score, d_logit, grads.ntn);

    // split the qu gradient back into question encoding and user row
    Tensor d_q({params.dims.d_a()});
    Tensor d_u({params.dims.d_u});
    qu_concat_backward(score_grads.d_qu, d_q, d_u);

    double* u_grad_row = grads.users.matrix.data() + fwd.user_row * params.users.dim();
    for (std::size_t k = 0; k < params.users.dim(); ++k) u_grad_row[k] += d_u[k];

    std::vector<Tensor> d_emb_q =
        encode_question_backward(params.question_enc, fwd.question, d_q, grads.question_enc);
    const std::size_t d_w = params.dims.d_w;
    for (std::size_t i = 0; i < bag.question_tokens.size(); ++i) {
        double* row = grads.word_emb.matrix.data() +
                      static_cast<std::size_t>(bag.question_tokens[i]) * d_w;
        for (std::size_t k = 0; k < d_w; ++k) row[k] += d_emb_q[i][k];
    }

    // per-answer backprop in parallel buffers, reduced in instance order
    const std::size_t n = fwd.answers.size();
    std::vector<BiLstmEncoder> enc_grad_buf(n);
    std::vector<std::vector<Tensor>> emb_grad_buf(n);
#pragma omp parallel for schedule(dynamic) if (n > 1)
    for (std::ptrdiff_t js = 0; js < static_cast<std::ptrdiff_t>(n); ++js) {
        const auto j = static_cast<std::size_t>(js);
        enc_grad_buf[j] = make_bilstm(params.dims.h, params.dims.d_w);
        emb_grad_buf[j] = encode_answer_backward(params.answer_enc, fwd.answers[j],
                                                 score_grads.d_answers[j], enc_grad_buf[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        accumulate(grads.answer_enc.fwd, enc_grad_buf[j].fwd);
        accumulate(grads.answer_enc.bwd, enc_grad_buf[j].bwd);

        const auto& tokens = bag.instances[j];
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            double* row =
                grads.word_emb.matrix.data() + static_cast<std::size_t>(tokens[i]) * d_w;
            for (std::size_t k = 0; k < d_w; ++k) row[k] += emb_grad_buf[j][i][k];
        }
    }
}

GradCheckSetup make_gradcheck_setup(const ModelDims& dims, std::size_t n_answers,
                                    std::uint64_t seed, double scale) {
    if (n_answers < 1) throw DataError("gradcheck setup: need at least one answer");
    if (dims.vocab_size < 3) throw DataError("gradcheck setup: vocab_size must be >= 3");
    std::vector<long long> users = {7, 11};
    GradCheckSetup setup;
    setup.params = init_model(dims, users, seed);
    for (const auto& ref : setup.params.named_tensors()) {
        for (std::size_t i = 0; i < ref.tensor->size(); ++i) (*ref.tensor)[i] *= scale;
    }

    Rng rng(seed + 1);
    auto token = [&]() {
        return 2 + static_cast<int>(rng.next_below(dims.vocab_size - 2));
    };
    setup.bag.question_id = 1;
    setup.bag.user_id = 7;
    setup.bag.label = +1;
    for (int i = 0; i < 3; ++i) setup.bag.question_tokens.push_back(token());
    for (std::size_t j = 0; j < n_answers; ++j) {
        std::vector<int> inst;
        for (std::size_t i = 0; i < 2 + j % 2; ++i) inst.push_back(token());
        setup.bag.instances.push_back(std::move(inst));
    }
    return setup;
}

GradCheckReport run_model_gradcheck(ModelParams& params, const Bag& bag, double epsilon) {
    ModelParams grads = zeros_like(params);
    BagForward fwd = model_forward(params, bag);
    const double y = bag.label == 1 ? 1.0 : 0.0;
    model_backward(params, bag, fwd, fwd.score.prob - y, grads);

    auto loss = [&]() {
        const double prob = model_forward(params, bag).score.prob;
        const double p = std::min(std::max(prob, 1e-12), 1.0 - 1e-12);
        return bag.label == 1 ? -std::log(p) : -std::log(1.0 - p);
    };
    auto prefs = params.named_tensors();
    auto grefs = grads.named_tensors();
    return finite_diff_check(loss, prefs, grefs, epsilon);
}

}  // namespace milkit
