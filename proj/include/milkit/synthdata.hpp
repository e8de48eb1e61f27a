#pragma once

#include <cstdint>
#include <vector>

#include "milkit/ingest.hpp"

namespace milkit {

/// Generator for the trigger-token task: a bag is satisfied iff at least one
/// answer contains the trigger token. That is the minimal generative process
/// matching the bag/instance assumption, so "the model learned the bag
/// structure" is directly checkable.
struct SynthConfig {
    std::size_t bag_count = 2000;
    std::size_t vocab_size = 50;
    std::size_t min_answers = 1, max_answers = 4;
    std::size_t min_tokens = 4, max_tokens = 16;
    int trigger_token = 2;  // first non-reserved id
    double positive_fraction = 0.5;
    std::size_t user_pool = 0;  // 0 = auto: max(16, bag_count / 8)
    std::uint64_t seed = 7;
};

/// Positive bags get the trigger planted in one random answer (other tokens
/// may repeat it by chance); negative bags and all questions never contain
/// it. Asker ids follow a zipf-ish distribution over a small pool so
/// activity buckets come out populated.
std::vector<Bag> generate(const SynthConfig& config);

/// The label rule, restated independently: scan the answers for the trigger.
bool oracle_label_positive(const Bag& bag, int trigger_token);

/// Synthetic vocab ("t0", "t1", ...) matching the generated ids, so the
/// standard vocab file plumbing works on synthetic data too.
Vocab synth_vocab(const SynthConfig& config);

}  // namespace milkit
