#include "milkit/bags_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace milkit {

using nlohmann::json;

void write_bags(const std::string& path, const std::vector<Bag>& bags) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const auto& b : bags) {
        json j;
        j["id"] = b.question_id;
        j["user"] = b.user_id;
        j["question"] = b.question_tokens;
        j["answers"] = b.instances;
        j["label"] = b.label;
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<Bag> read_bags(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open bags file: " + path);
    std::vector<Bag> bags;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
        }
        try {
            Bag b;
            b.question_id = j.at("id").get<long long>();
            b.user_id = j.at("user").get<long long>();
            b.question_tokens = j.at("question").get<std::vector<int>>();
            b.instances = j.at("answers").get<std::vector<std::vector<int>>>();
            b.label = j.at("label").get<int>();
            if (b.label != 1 && b.label != -1) {
                throw DataError(path + ":" + std::to_string(lineno) + ": label must be 1 or -1");
            }
            if (b.instances.empty()) {
                throw DataError(path + ":" + std::to_string(lineno) + ": bag has no answers");
            }
            bags.push_back(std::move(b));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": missing field: " + e.what());
        }
    }
    return bags;
}

void write_vocab(const std::string& path, const Vocab& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t id = 0; id < vocab.id_to_token.size(); ++id) {
        out << vocab.id_to_token[id] << "\t" << id << "\t" << vocab.counts[id] << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

Vocab read_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocab file: " + path);
    Vocab vocab;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        long long id = -1, count = -1;
        if (!std::getline(ls, token, '\t') || !(ls >> id >> count)) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected token\\tid\\tcount");
        }
        if (id != static_cast<long long>(vocab.id_to_token.size())) {
            throw DataError(path + ":" + std::to_string(lineno) + ": ids must be dense and ascending");
        }
        vocab.id_to_token.push_back(token);
        vocab.counts.push_back(count);
        if (id >= 2) vocab.token_to_id.emplace(token, static_cast<int>(id));
    }
    if (vocab.id_to_token.size() < 2) {
        throw DataError(path + ": vocab must contain the <pad> and <unk> rows");
    }
    return vocab;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string forum_stats_json(const ForumStats& s, const BagBuildStats* build,
                             const ParseStats* parse) {
    json j;
    j["questions"] = s.question_count;
    j["answers"] = s.answer_count;
    j["users"] = s.user_count;
    j["satisfied_fraction"] = s.satisfied_fraction;
    if (build) {
        j["dropped_no_answers"] = build->dropped_no_answers;
        j["dropped_no_owner"] = build->dropped_no_owner;
        j["orphan_answers"] = build->orphan_answers;
    }
    if (parse) {
        j["rows_rejected"] = parse->rejected;
        j["rows_skipped"] = parse->skipped_types;
    }
    return j.dump(2);
}

std::size_t max_token_id_plus_one(const std::vector<Bag>& bags) {
    int max_id = 1;  // UNK always exists
    for (const auto& b : bags) {
        for (int t : b.question_tokens) max_id = std::max(max_id, t);
        for (const auto& inst : b.instances) {
            for (int t : inst) max_id = std::max(max_id, t);
        }
    }
    return static_cast<std::size_t>(max_id) + 1;
}

}  // namespace milkit
