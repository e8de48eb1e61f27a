#include "milkit/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "milkit/rng.hpp"

namespace milkit {

Tensor lookup(const EmbeddingTable& table, int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows()) {
        throw DataError("embedding lookup: id " + std::to_string(id) + " out of range for table of " +
                        std::to_string(table.rows()) + " rows");
    }
    const std::size_t d = table.dim();
    Tensor out({d});
    const double* row = table.matrix.data() + static_cast<std::size_t>(id) * d;
    std::copy(row, row + d, out.data());
    return out;
}

namespace {

// cumulative unigram^0.75 table; binary search keeps sampling deterministic
struct NegativeSampler {
    std::vector<double> cumulative;

    explicit NegativeSampler(const std::vector<double>& weights) {
        cumulative.resize(weights.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            cumulative[i] = acc;
        }
    }

    int draw(Rng& rng) const {
        double u = rng.next_double() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        return static_cast<int>(it - cumulative.begin());
    }
};

}  // namespace

PretrainResult pretrain_skipgram(const std::vector<std::vector<int>>& corpus,
                                 const SkipGramConfig& config, std::size_t vocab_size,
                                 std::size_t dim) {
    if (config.window < 1) throw DataError("skipgram: window must be >= 1");
    if (config.negative_samples < 1) throw DataError("skipgram: negative_samples must be >= 1");
    std::size_t total_tokens = 0;
    for (const auto& seq : corpus) total_tokens += seq.size();
    if (total_tokens == 0) throw DataError("skipgram: empty corpus");

    Rng rng(config.seed);
    PretrainResult result;
    result.table.matrix = Tensor({vocab_size, dim});
    // word2vec-style init: small uniform center vectors, zero context vectors
    for (std::size_t i = 0; i < result.table.matrix.size(); ++i) {
        result.table.matrix[i] = rng.uniform(-0.5, 0.5) / static_cast<double>(dim);
    }
    Tensor context({vocab_size, dim});

    std::vector<double> weights(vocab_size, 0.0);
    for (const auto& seq : corpus) {
        for (int t : seq) {
            if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
                throw DataError("skipgram: token id " + std::to_string(t) + " outside vocab of " +
                                std::to_string(vocab_size));
            }
            weights[static_cast<std::size_t>(t)] += 1.0;
        }
    }
    for (double& w : weights) w = std::pow(w, 0.75);
    NegativeSampler sampler(weights);

    // count (center, context) pairs once so the learning rate can decay
    // linearly over the full run
    std::size_t pairs_per_epoch = 0;
    for (const auto& seq : corpus) {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(seq.size());
        for (std::ptrdiff_t c = 0; c < n; ++c) {
            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - config.window);
            std::ptrdiff_t hi = std::min(n - 1, c + config.window);
            pairs_per_epoch += static_cast<std::size_t>(hi - lo);
        }
    }
    const double total_pairs =
        static_cast<double>(pairs_per_epoch) * static_cast<double>(std::max(config.epochs, 1));

    double* center_vecs = result.table.matrix.data();
    double* ctx_vecs = context.data();
    std::vector<double> grad_center(dim);
    std::size_t pair_index = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& seq : corpus) {
            const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(seq.size());
            for (std::ptrdiff_t c = 0; c < n; ++c) {
                const int center = seq[static_cast<std::size_t>(c)];
                double* v = center_vecs + static_cast<std::size_t>(center) * dim;
                std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - config.window);
                std::ptrdiff_t hi = std::min(n - 1, c + config.window);
                for (std::ptrdiff_t k = lo; k <= hi; ++k) {
                    if (k == c) continue;
                    const int target = seq[static_cast<std::size_t>(k)];
                    const double lr = config.learning_rate *
                                      std::max(1.0 - static_cast<double>(pair_index) / total_pairs,
                                               1e-4);
                    ++pair_index;
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    // one positive then the negatives, all against the same center
                    for (int s = 0; s <= config.negative_samples; ++s) {
                        int out_id;
                        double label;
                        if (s == 0) {
                            out_id = target;
                            label = 1.0;
                        } else {
                            out_id = sampler.draw(rng);
                            if (out_id == target) continue;
                            label = 0.0;
                        }
                        double* u = ctx_vecs + static_cast<std::size_t>(out_id) * dim;
                        double score = 0.0;
                        for (std::size_t d = 0; d < dim; ++d) score += u[d] * v[d];
                        const double pred = sigmoid(score);
                        epoch_loss -= (label > 0.5) ? std::log(std::max(pred, 1e-12))
                                                    : std::log(std::max(1.0 - pred, 1e-12));
                        const double g = (pred - label) * lr;
                        for (std::size_t d = 0; d < dim; ++d) {
                            grad_center[d] += g * u[d];
                            u[d] -= g * v[d];
                        }
                    }
                    for (std::size_t d = 0; d < dim; ++d) v[d] -= grad_center[d];
                }
            }
        }
        result.epoch_loss.push_back(epoch_loss);
    }
    return result;
}

UserTable init_user_table(std::span<const long long> user_ids, std::size_t d_u,
                          std::uint64_t seed) {
    if (d_u < 1) throw DataError("init_user_table: d_u must be >= 1");
    UserTable table;
    table.matrix = Tensor({user_ids.size() + 1, d_u});
    Rng rng(seed);
    for (std::size_t i = 0; i < table.matrix.size(); ++i) {
        table.matrix[i] = rng.uniform(-0.08, 0.08);
    }
    std::size_t row = 1;  // row 0 stays the UNK user
    for (long long id : user_ids) {
        if (!table.row_of.emplace(id, row).second) {
            throw DataError("init_user_table: duplicate user id " + std::to_string(id));
        }
        ++row;
    }
    return table;
}

}  // namespace milkit
