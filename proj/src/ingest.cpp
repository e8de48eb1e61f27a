#include "milkit/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "milkit/rng.hpp"

namespace milkit {

namespace {

// Buffered single-byte puller with an absolute offset, so parse errors can
// name the exact position in a multi-gigabyte dump.
class ByteSource {
public:
    explicit ByteSource(std::istream& in) : in_(in) { buf_.reserve(kChunk); }

    int peek() {
        if (pos_ == buf_.size() && !fill()) return -1;
        return static_cast<unsigned char>(buf_[pos_]);
    }

    int next() {
        int c = peek();
        if (c >= 0) ++pos_;
        return c;
    }

    std::size_t offset() const { return base_ + pos_; }

private:
    static constexpr std::size_t kChunk = 1 << 16;

    bool fill() {
        base_ += buf_.size();
        buf_.resize(kChunk);
        in_.read(buf_.data(), static_cast<std::streamsize>(kChunk));
        buf_.resize(static_cast<std::size_t>(in_.gcount()));
        pos_ = 0;
        return !buf_.empty();
    }

    std::istream& in_;
    std::string buf_;
    std::size_t pos_ = 0;
    std::size_t base_ = 0;
};

[[noreturn]] void fail_at(const ByteSource& src, const std::string& what) {
    std::ostringstream os;
    os << "malformed XML at byte " << src.offset() << ": " << what;
    throw DataError(os.str());
}

void skip_whitespace(ByteSource& src) {
    for (;;) {
        int c = src.peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            src.next();
        } else {
            return;
        }
    }
}

bool is_name_char(int c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == ':' || c == '.';
}

std::string read_name(ByteSource& src) {
    std::string name;
    while (is_name_char(src.peek())) name.push_back(static_cast<char>(src.next()));
    if (name.empty()) fail_at(src, "expected a name");
    return name;
}

// consume until the given terminator string has been seen
void skip_until(ByteSource& src, std::string_view terminator, const char* what) {
    std::string tail(terminator.size(), '\0');
    for (;;) {
        int c = src.next();
        if (c < 0) fail_at(src, std::string("unterminated ") + what);
        tail.erase(tail.begin());
        tail.push_back(static_cast<char>(c));
        if (tail == terminator) return;
    }
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0x10FFFF) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

struct RowAttrs {
    std::optional<std::string> id, post_type, parent, accepted, owner, body, date;
};

// attribute list of a row element, up to and including "/>" or ">"
// returns true when the element was self-closing
bool parse_attributes(ByteSource& src, RowAttrs& attrs) {
    for (;;) {
        skip_whitespace(src);
        int c = src.peek();
        if (c < 0) fail_at(src, "unterminated element");
        if (c == '/') {
            src.next();
            if (src.next() != '>') fail_at(src, "expected '>' after '/'");
            return true;
        }
        if (c == '>') {
            src.next();
            return false;
        }
        std::string name = read_name(src);
        skip_whitespace(src);
        if (src.next() != '=') fail_at(src, "expected '=' after attribute name");
        skip_whitespace(src);
        int quote = src.next();
        if (quote != '"' && quote != '\'') fail_at(src, "expected quoted attribute value");
        std::string value;
        for (;;) {
            int v = src.next();
            if (v < 0) fail_at(src, "unterminated attribute value");
            if (v == quote) break;
            value.push_back(static_cast<char>(v));
        }
        std::optional<std::string>* slot = nullptr;
        if (name == "Id") slot = &attrs.id;
        else if (name == "PostTypeId") slot = &attrs.post_type;
        else if (name == "ParentId") slot = &attrs.parent;
        else if (name == "AcceptedAnswerId") slot = &attrs.accepted;
        else if (name == "OwnerUserId") slot = &attrs.owner;
        else if (name == "Body") slot = &attrs.body;
        else if (name == "CreationDate") slot = &attrs.date;
        if (slot) *slot = std::move(value);
    }
}

std::optional<long long> parse_ll(const std::optional<std::string>& s) {
    if (!s || s->empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s->c_str(), &end, 10);
    if (errno != 0 || end != s->c_str() + s->size()) return std::nullopt;
    return v;
}

}  // namespace

std::string decode_xml_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i++]);  // lone ampersand, keep it
            continue;
        }
        std::string_view body = s.substr(i + 1, semi - i - 1);
        if (body == "amp") out.push_back('&');
        else if (body == "lt") out.push_back('<');
        else if (body == "gt") out.push_back('>');
        else if (body == "quot") out.push_back('"');
        else if (body == "apos") out.push_back('\'');
        else if (!body.empty() && body[0] == '#') {
            unsigned long cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (std::size_t k = 2; k < body.size() && ok; ++k) {
                    char c = body[k];
                    int d = (c >= '0' && c <= '9')   ? c - '0'
                            : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                            : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                                     : -1;
                    if (d < 0 || cp > 0x10FFFF) ok = false;
                    else cp = cp * 16 + static_cast<unsigned long>(d);
                }
            } else {
                for (std::size_t k = 1; k < body.size() && ok; ++k) {
                    char c = body[k];
                    if (c < '0' || c > '9' || cp > 0x10FFFF) ok = false;
                    else cp = cp * 10 + static_cast<unsigned long>(c - '0');
                }
            }
            if (ok && cp <= 0x10FFFF) append_utf8(out, cp);
            else out.append(s.substr(i, semi - i + 1));
        } else {
            out.append(s.substr(i, semi - i + 1));  // unknown entity, keep verbatim
        }
        i = semi + 1;
    }
    return out;
}

ParseStats parse_posts_stream(std::istream& in, const PostSink& sink) {
    ByteSource src(in);
    ParseStats stats;

    skip_whitespace(src);
    bool saw_root = false;
    bool root_closed = false;

    for (;;) {
        skip_whitespace(src);
        int c = src.peek();
        if (c < 0) {
            if (!saw_root) fail_at(src, "no root element");
            if (!root_closed) fail_at(src, "missing </posts>");
            return stats;
        }
        if (c != '<') fail_at(src, "unexpected text outside markup");
        if (root_closed) fail_at(src, "content after </posts>");
        std::size_t element_start = src.offset();
        src.next();

        int c2 = src.peek();
        if (c2 == '?') {
            skip_until(src, "?>", "declaration");
            continue;
        }
        if (c2 == '!') {
            src.next();
            if (src.peek() == '-') {
                skip_until(src, "-->", "comment");
            } else {
                skip_until(src, ">", "doctype");
            }
            continue;
        }
        if (c2 == '/') {
            src.next();
            std::string name = read_name(src);
            skip_whitespace(src);
            if (src.next() != '>') fail_at(src, "expected '>' in closing tag");
            if (!saw_root || name != "posts") fail_at(src, "unexpected closing tag </" + name + ">");
            root_closed = true;
            continue;
        }

        std::string name = read_name(src);
        if (!saw_root) {
            if (name != "posts") fail_at(src, "expected <posts> root, got <" + name + ">");
            RowAttrs ignored;
            bool self_closed = parse_attributes(src, ignored);
            saw_root = true;
            if (self_closed) root_closed = true;  // empty document
            continue;
        }
        if (name != "row") fail_at(src, "expected <row>, got <" + name + ">");

        RowAttrs attrs;
        bool self_closed = parse_attributes(src, attrs);
        if (!self_closed) {
            // tolerate <row ...></row>
            skip_whitespace(src);
            if (src.next() != '<' || src.next() != '/') fail_at(src, "expected </row>");
            if (read_name(src) != "row") fail_at(src, "expected </row>");
            skip_whitespace(src);
            if (src.next() != '>') fail_at(src, "expected '>' in </row>");
        }
        stats.max_row_bytes = std::max(stats.max_row_bytes, src.offset() - element_start);

        auto id = parse_ll(attrs.id);
        auto type = parse_ll(attrs.post_type);
        if (!id || !type) {
            ++stats.rejected;
            continue;
        }
        if (*type != 1 && *type != 2) {
            ++stats.skipped_types;
            continue;
        }

        RawPost post;
        post.id = *id;
        post.type = (*type == 1) ? PostType::Question : PostType::Answer;
        post.parent_id = parse_ll(attrs.parent);
        post.accepted_answer_id = parse_ll(attrs.accepted);
        post.owner_user_id = parse_ll(attrs.owner);
        if (attrs.body) post.body = decode_xml_entities(*attrs.body);
        if (attrs.date) post.creation_date = *attrs.date;
        ++stats.posts;
        sink(std::move(post));
    }
}

std::vector<RawPost> parse_posts(std::istream& in, ParseStats* stats) {
    std::vector<RawPost> posts;
    ParseStats s = parse_posts_stream(in, [&](RawPost&& p) { posts.push_back(std::move(p)); });
    if (stats) *stats = s;
    return posts;
}

std::vector<std::string> tokenize(std::string_view text, std::size_t max_len) {
    // Bodies are HTML: drop tags first, then resolve the entities that remain.
    std::string no_tags;
    no_tags.reserve(text.size());
    bool in_tag = false;
    for (char c : text) {
        if (in_tag) {
            if (c == '>') {
                in_tag = false;
                no_tags.push_back(' ');
            }
        } else if (c == '<') {
            in_tag = true;
        } else {
            no_tags.push_back(c);
        }
    }
    std::string decoded = decode_xml_entities(no_tags);

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (!current.empty() && tokens.size() < max_len) tokens.push_back(current);
        current.clear();
    };
    for (char ch : decoded) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c >= '0' && c <= '9') current.push_back(ch);
        else if (c >= 'a' && c <= 'z') current.push_back(ch);
        else if (c >= 'A' && c <= 'Z') current.push_back(static_cast<char>(c - 'A' + 'a'));
        else flush();
        if (tokens.size() == max_len) return tokens;
    }
    flush();
    return tokens;
}

int Vocab::id_or_unk(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& docs, long long min_count) {
    if (min_count < 1) throw DataError("build_vocab: min_count must be >= 1");
    std::map<std::string, long long> freq;  // ordered map makes tie handling trivial
    for (const auto& doc : docs) {
        for (const auto& tok : doc) ++freq[tok];
    }

    std::vector<std::pair<std::string, long long>> kept;
    long long unk_total = 0;
    for (const auto& [tok, count] : freq) {
        if (count >= min_count) kept.emplace_back(tok, count);
        else unk_total += count;
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocab vocab;
    vocab.id_to_token = {"<pad>", "<unk>"};
    vocab.counts = {0, unk_total};
    for (const auto& [tok, count] : kept) {
        vocab.token_to_id.emplace(tok, static_cast<int>(vocab.id_to_token.size()));
        vocab.id_to_token.push_back(tok);
        vocab.counts.push_back(count);
    }
    return vocab;
}

namespace {

std::vector<int> to_ids(const std::string& body, const Vocab& vocab, std::size_t max_len) {
    std::vector<int> ids;
    for (const auto& tok : tokenize(body, max_len)) ids.push_back(vocab.id_or_unk(tok));
    if (ids.empty()) ids.push_back(Vocab::kUnk);
    return ids;
}

}  // namespace

std::vector<Bag> build_bags(const std::vector<RawPost>& posts, const Vocab& vocab,
                            BagBuildStats* stats, std::size_t max_len,
                            const std::unordered_set<long long>* valid_users) {
    BagBuildStats local;
    std::unordered_map<long long, std::size_t> question_index;
    for (std::size_t i = 0; i < posts.size(); ++i) {
        if (posts[i].type == PostType::Question) question_index.emplace(posts[i].id, i);
    }
    std::unordered_map<long long, std::vector<const RawPost*>> answers_of;
    for (const auto& p : posts) {
        if (p.type != PostType::Answer) continue;
        if (!p.parent_id || !question_index.count(*p.parent_id)) {
            ++local.orphan_answers;
            continue;
        }
        answers_of[*p.parent_id].push_back(&p);
    }

    std::vector<Bag> bags;
    for (const auto& p : posts) {
        if (p.type != PostType::Question) continue;
        auto it = answers_of.find(p.id);
        if (it == answers_of.end() || it->second.empty()) {
            ++local.dropped_no_answers;
            continue;
        }
        bool owner_known = p.owner_user_id.has_value() &&
                           (!valid_users || valid_users->count(*p.owner_user_id));
        if (!owner_known) {
            ++local.dropped_no_owner;
            continue;
        }
        Bag bag;
        bag.question_id = p.id;
        bag.user_id = *p.owner_user_id;
        bag.question_tokens = to_ids(p.body, vocab, max_len);
        for (const RawPost* a : it->second) bag.instances.push_back(to_ids(a->body, vocab, max_len));
        bag.label = p.accepted_answer_id ? +1 : -1;
        bags.push_back(std::move(bag));
    }
    if (stats) *stats = local;
    return bags;
}

DatasetSplit split(const std::vector<Bag>& bags, std::uint64_t seed) {
    const std::size_t n = bags.size();
    if (n < 10) {
        throw DataError("split: need at least 10 bags, got " + std::to_string(n));
    }
    std::unordered_map<long long, const Bag*> by_id;
    std::vector<long long> ids;
    ids.reserve(n);
    for (const auto& b : bags) {
        if (!by_id.emplace(b.question_id, &b).second) {
            throw DataError("split: duplicate question id " + std::to_string(b.question_id));
        }
        ids.push_back(b.question_id);
    }
    // Shuffle a sorted id list: the partition depends only on the bag set and
    // the seed, never on input file order.
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    rng.shuffle(ids);

    const auto n_val = static_cast<std::size_t>(std::llround(0.10 * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::llround(0.30 * static_cast<double>(n)));
    const std::size_t n_train = n - n_val - n_test;

    DatasetSplit out;
    out.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        const Bag& b = *by_id.at(ids[i]);
        if (i < n_train) out.train.push_back(b);
        else if (i < n_train + n_val) out.validation.push_back(b);
        else out.test.push_back(b);
    }
    return out;
}

ForumStats stats(const std::vector<Bag>& bags) {
    ForumStats s;
    std::unordered_set<long long> users;
    std::size_t satisfied = 0;
    for (const auto& b : bags) {
        ++s.question_count;
        s.answer_count += b.instances.size();
        users.insert(b.user_id);
        if (b.label == +1) ++satisfied;
    }
    s.user_count = users.size();
    s.satisfied_fraction =
        bags.empty() ? 0.0 : static_cast<double>(satisfied) / static_cast<double>(bags.size());
    return s;
}

}  // namespace milkit
