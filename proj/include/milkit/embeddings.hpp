#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "milkit/tensor.hpp"

namespace milkit {

/// Word look-up table, one row per vocabulary id.
struct EmbeddingTable {
    Tensor matrix;  // {vocab_size, dim}

    std::size_t rows() const { return matrix.dim(0); }
    std::size_t dim() const { return matrix.dim(1); }
};

/// Copy of row `id`. Gradients accumulate into that row only; callers doing
/// backward passes add into the matching row of their gradient table.
Tensor lookup(const EmbeddingTable& table, int id);

struct SkipGramConfig {
    int window = 5;
    int negative_samples = 5;
    int epochs = 15;
    double learning_rate = 0.025;
    std::uint64_t seed = 1;
};

struct PretrainResult {
    EmbeddingTable table;
    std::vector<double> epoch_loss;
};

/// Skip-gram with negative sampling over token-id sequences. For each
/// (center, context) pair within the window the objective is
/// log s(u_ctx . v_center) + sum_neg log s(-u_neg . v_center), negatives
/// drawn from the unigram^0.75 distribution. Single-threaded on purpose:
/// same seed, same table, bit for bit. Returns the center-vector table.
PretrainResult pretrain_skipgram(const std::vector<std::vector<int>>& corpus,
                                 const SkipGramConfig& config, std::size_t vocab_size,
                                 std::size_t dim);

/// Asker embeddings. Row 0 is reserved for askers never seen in training.
struct UserTable {
    static constexpr std::size_t kUnkRow = 0;

    Tensor matrix;  // {1 + user_count, d_u}
    std::unordered_map<long long, std::size_t> row_of;

    std::size_t row_for(long long user_id) const {
        auto it = row_of.find(user_id);
        return it == row_of.end() ? kUnkRow : it->second;
    }
    std::size_t dim() const { return matrix.dim(1); }
};

/// Rows uniform in [-0.08, 0.08] from the seeded generator. Duplicate ids
/// are rejected.
UserTable init_user_table(std::span<const long long> user_ids, std::size_t d_u,
                          std::uint64_t seed);

}  // namespace milkit
