#pragma once

#include <cstdint>
#include <string>

#include "milkit/training.hpp"

namespace milkit {

/// On-disk model container. Layout (documented here, covered by round-trip
/// tests):
///
///   line 1:  "milkit-checkpoint v1"
///   header:  key=value lines (config fields, dims, vocab_hash as 16 hex
///            digits, epoch, best_val_accuracy with 17 significant digits,
///            tensor_count, user_count)
///   line:    "end_header"
///   binary:  user_count little-endian int64 asker ids (table rows 1..N,
///            row 0 is the unknown-asker row), then per tensor:
///            u32 name length, name bytes, u32 rank, u64 dims[rank],
///            f64 values[product(dims)] - all little-endian.
///
/// Saving is deterministic: save -> load -> save reproduces the file byte
/// for byte.
struct Checkpoint {
    int version = 1;
    TrainConfig config;
    std::size_t vocab_size = 0;
    std::uint64_t vocab_hash = 0;
    int epoch = 0;
    double best_val_accuracy = 0.0;
    ModelParams params;
};

void save_checkpoint(Checkpoint& cp, const std::string& path);

/// Raises DataError on version mismatch, truncation, or malformed headers.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace milkit
