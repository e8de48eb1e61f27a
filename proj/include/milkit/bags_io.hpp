#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milkit/ingest.hpp"

namespace milkit {

/// Canonical on-disk bag format: one JSON object per line with fields
/// answers, id, label, question, user (keys serialized alphabetically).
/// Keeps train/eval independent of raw-dump availability.
void write_bags(const std::string& path, const std::vector<Bag>& bags);
std::vector<Bag> read_bags(const std::string& path);

/// Vocab file: token \t id \t count, one line per id, ascending ids,
/// including the reserved <pad>/<unk> rows.
void write_vocab(const std::string& path, const Vocab& vocab);
Vocab read_vocab(const std::string& path);

/// FNV-1a over raw bytes; used to tie checkpoints to the vocab they were
/// trained with.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t hash_file(const std::string& path);

std::string forum_stats_json(const ForumStats& s, const BagBuildStats* build = nullptr,
                             const ParseStats* parse = nullptr);

/// Largest token id referenced anywhere in the bags, plus one.
std::size_t max_token_id_plus_one(const std::vector<Bag>& bags);

}  // namespace milkit
