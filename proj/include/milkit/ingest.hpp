#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "milkit/tensor.hpp"

namespace milkit {

enum class PostType { Question, Answer };

/// One row of a Stack Exchange Posts.xml dump, restricted to the attributes
/// this pipeline consumes.
struct RawPost {
    long long id = 0;
    PostType type = PostType::Question;
    std::optional<long long> parent_id;           // answers only
    std::optional<long long> accepted_answer_id;  // questions only
    std::optional<long long> owner_user_id;
    std::string body;
    std::string creation_date;
};

struct ParseStats {
    std::size_t posts = 0;          // questions + answers emitted
    std::size_t skipped_types = 0;  // rows with PostTypeId outside {1,2}
    std::size_t rejected = 0;       // rows missing Id or PostTypeId
    std::size_t max_row_bytes = 0;  // high-water mark of the row buffer
};

using PostSink = std::function<void(RawPost&&)>;

/// Streaming scan of a Posts.xml-style document: a `posts` root whose children
/// are self-closing `row` elements. Memory use is bounded by the largest
/// single row, not the file; `stats.max_row_bytes` exposes the high-water
/// mark so tests can hold the parser to that contract.
///
/// Malformed markup raises DataError naming the absolute byte offset. Rows
/// missing Id or PostTypeId are counted in `rejected` and dropped, not fatal.
ParseStats parse_posts_stream(std::istream& in, const PostSink& sink);

/// Convenience wrapper collecting all question/answer rows.
std::vector<RawPost> parse_posts(std::istream& in, ParseStats* stats = nullptr);

/// Decode the five named XML entities plus numeric character references.
/// Exposed for the tokenizer, which must strip entities out of HTML bodies.
std::string decode_xml_entities(std::string_view s);

/// Strip HTML tags, decode entities, lowercase, split on runs of
/// non-alphanumeric bytes, truncate to max_len tokens.
std::vector<std::string> tokenize(std::string_view text, std::size_t max_len = 100);

struct Vocab {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;  // index = id; [0]="<pad>", [1]="<unk>"
    std::vector<long long> counts;         // corpus frequency per id

    std::size_t size() const { return id_to_token.size(); }
    int id_or_unk(const std::string& token) const;
};

/// Tokens with corpus frequency >= min_count get ids from 2 upward in
/// descending frequency order (ties broken lexicographically); everything
/// else maps to UNK.
Vocab build_vocab(const std::vector<std::vector<std::string>>& docs, long long min_count = 3);

/// One question with its answers: the unit of supervision. The label lives at
/// the bag level only; instances (answers) carry no labels of their own.
struct Bag {
    long long question_id = 0;
    long long user_id = 0;
    std::vector<int> question_tokens;
    std::vector<std::vector<int>> instances;  // one token-id sequence per answer
    int label = -1;                           // +1 satisfied, -1 not
};

struct BagBuildStats {
    std::size_t dropped_no_answers = 0;
    std::size_t dropped_no_owner = 0;
    std::size_t orphan_answers = 0;
};

/// Assemble bags from parsed posts. A question becomes a bag iff it has at
/// least one answer and a known owner; label is +1 iff AcceptedAnswerId is
/// present. Empty token sequences are replaced by a single UNK so downstream
/// encoders always see nonempty input.
std::vector<Bag> build_bags(const std::vector<RawPost>& posts, const Vocab& vocab,
                            BagBuildStats* stats = nullptr, std::size_t max_len = 100,
                            const std::unordered_set<long long>* valid_users = nullptr);

struct DatasetSplit {
    std::vector<Bag> train;
    std::vector<Bag> validation;
    std::vector<Bag> test;
    std::uint64_t seed = 0;
};

/// Deterministic 60/10/30 partition: question ids are sorted, shuffled by the
/// seeded generator, then cut at round(0.10 N) validation / round(0.30 N)
/// test. Requires N >= 10.
DatasetSplit split(const std::vector<Bag>& bags, std::uint64_t seed);

struct ForumStats {
    std::size_t question_count = 0;
    std::size_t answer_count = 0;
    std::size_t user_count = 0;
    double satisfied_fraction = 0.0;
};

ForumStats stats(const std::vector<Bag>& bags);

}  // namespace milkit
