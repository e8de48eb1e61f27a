#include "milkit/synthdata.hpp"

#include <algorithm>
#include <string>

#include "milkit/rng.hpp"

namespace milkit {

namespace {

// token ids uniform over [2, vocab), optionally excluding the trigger
int random_token(Rng& rng, const SynthConfig& cfg, bool allow_trigger) {
    for (;;) {
        const int t = 2 + static_cast<int>(rng.next_below(cfg.vocab_size - 2));
        if (allow_trigger || t != cfg.trigger_token) return t;
    }
}

std::vector<int> random_text(Rng& rng, const SynthConfig& cfg, bool allow_trigger) {
    const std::size_t len =
        cfg.min_tokens + rng.next_below(cfg.max_tokens - cfg.min_tokens + 1);
    std::vector<int> tokens(len);
    for (auto& t : tokens) t = random_token(rng, cfg, allow_trigger);
    return tokens;
}

}  // namespace

std::vector<Bag> generate(const SynthConfig& cfg) {
    if (cfg.vocab_size < 3) throw DataError("synth: vocab_size must be >= 3");
    if (cfg.trigger_token < 2 || static_cast<std::size_t>(cfg.trigger_token) >= cfg.vocab_size) {
        throw DataError("synth: trigger token must be a non-reserved id below vocab_size");
    }
    if (cfg.min_answers < 1 || cfg.max_answers < cfg.min_answers) {
        throw DataError("synth: bad answers-per-bag range");
    }
    if (cfg.min_tokens < 1 || cfg.max_tokens < cfg.min_tokens) {
        throw DataError("synth: bad tokens-per-text range");
    }
    if (cfg.positive_fraction < 0.0 || cfg.positive_fraction > 1.0) {
        throw DataError("synth: positive fraction must be in [0, 1]");
    }

    const std::size_t pool =
        cfg.user_pool > 0 ? cfg.user_pool : std::max<std::size_t>(16, cfg.bag_count / 8);
    // zipf weights 1/(k+1): a few heavy askers, a long light tail
    std::vector<double> cumulative(pool);
    double acc = 0.0;
    for (std::size_t k = 0; k < pool; ++k) {
        acc += 1.0 / static_cast<double>(k + 1);
        cumulative[k] = acc;
    }

    Rng rng(cfg.seed);
    std::vector<Bag> bags;
    bags.reserve(cfg.bag_count);
    for (std::size_t b = 0; b < cfg.bag_count; ++b) {
        Bag bag;
        bag.question_id = static_cast<long long>(b + 1);
        const double u = rng.next_double() * acc;
        bag.user_id = static_cast<long long>(
            1 + (std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin()));
        bag.question_tokens = random_text(rng, cfg, /*allow_trigger=*/false);

        const bool positive = rng.next_double() < cfg.positive_fraction;
        const std::size_t n_answers =
            cfg.min_answers + rng.next_below(cfg.max_answers - cfg.min_answers + 1);
        for (std::size_t j = 0; j < n_answers; ++j) {
            bag.instances.push_back(random_text(rng, cfg, /*allow_trigger=*/positive));
        }
        if (positive) {
            // plant the trigger so the bag rule holds even if chance missed it
            auto& inst = bag.instances[rng.next_below(n_answers)];
            inst[rng.next_below(inst.size())] = cfg.trigger_token;
        }
        bag.label = positive ? +1 : -1;
        bags.push_back(std::move(bag));
    }
    return bags;
}

bool oracle_label_positive(const Bag& bag, int trigger_token) {
    for (const auto& inst : bag.instances) {
        for (int t : inst) {
            if (t == trigger_token) return true;
        }
    }
    return false;
}

Vocab synth_vocab(const SynthConfig& cfg) {
    Vocab vocab;
    vocab.id_to_token = {"<pad>", "<unk>"};
    vocab.counts = {0, 0};
    for (std::size_t id = 2; id < cfg.vocab_size; ++id) {
        std::string tok = "t" + std::to_string(id - 2);
        vocab.token_to_id.emplace(tok, static_cast<int>(id));
        vocab.id_to_token.push_back(tok);
        vocab.counts.push_back(0);
    }
    return vocab;
}

}  // namespace milkit
