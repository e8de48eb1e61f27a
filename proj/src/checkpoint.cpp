#include "milkit/checkpoint.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace milkit {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

constexpr const char* kMagic = "milkit-checkpoint v1";

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_raw(std::ostream& out, const void* p, std::size_t len) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

void read_raw(std::istream& in, void* p, std::size_t len, const std::string& path) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in.gcount()) != len) {
        throw DataError("checkpoint truncated: " + path);
    }
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        return std::stod(s);
    } catch (...) {
        throw DataError("checkpoint: bad value for " + key + ": " + s);
    }
}

long long parse_ll(const std::string& s, const std::string& key) {
    try {
        return std::stoll(s);
    } catch (...) {
        throw DataError("checkpoint: bad value for " + key + ": " + s);
    }
}

}  // namespace

void save_checkpoint(Checkpoint& cp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);

    const TrainConfig& c = cp.config;
    out << kMagic << "\n";
    out << "vocab_size=" << cp.vocab_size << "\n";
    out << "d_w=" << c.d_w << "\n";
    out << "h=" << c.h << "\n";
    out << "d_u=" << c.d_u << "\n";
    out << "z=" << c.z << "\n";
    out << "lambda=" << fmt_double(c.lambda) << "\n";
    out << "rho=" << fmt_double(c.rho) << "\n";
    out << "epochs=" << c.epochs << "\n";
    out << "seed=" << c.seed << "\n";
    out << "clip_norm=" << (c.clip_norm ? fmt_double(*c.clip_norm) : std::string("none")) << "\n";
    out << "freeze_embeddings=" << (c.freeze_embeddings ? 1 : 0) << "\n";
    out << "patience=" << c.patience << "\n";
    out << "threshold=" << fmt_double(c.threshold) << "\n";
    out << "sg_window=" << c.skipgram.window << "\n";
    out << "sg_negatives=" << c.skipgram.negative_samples << "\n";
    out << "sg_epochs=" << c.skipgram.epochs << "\n";
    out << "sg_lr=" << fmt_double(c.skipgram.learning_rate) << "\n";
    out << "sg_seed=" << c.skipgram.seed << "\n";
    char hashbuf[32];
    std::snprintf(hashbuf, sizeof hashbuf, "%016" PRIx64, cp.vocab_hash);
    out << "vocab_hash=" << hashbuf << "\n";
    out << "epoch=" << cp.epoch << "\n";
    out << "best_val_accuracy=" << fmt_double(cp.best_val_accuracy) << "\n";

    // asker ids sorted by their table row so load rebuilds the same mapping
    std::vector<long long> ids(cp.params.users.row_of.size());
    for (const auto& [id, row] : cp.params.users.row_of) ids.at(row - 1) = id;
    out << "user_count=" << ids.size() << "\n";

    auto refs = cp.params.named_tensors();
    out << "tensor_count=" << refs.size() << "\n";
    out << "end_header\n";

    write_raw(out, ids.data(), ids.size() * sizeof(long long));
    for (const auto& ref : refs) {
        const auto name_len = static_cast<std::uint32_t>(ref.name.size());
        write_raw(out, &name_len, sizeof name_len);
        write_raw(out, ref.name.data(), ref.name.size());
        const auto rank = static_cast<std::uint32_t>(ref.tensor->rank());
        write_raw(out, &rank, sizeof rank);
        for (std::size_t d = 0; d < ref.tensor->rank(); ++d) {
            const auto dim = static_cast<std::uint64_t>(ref.tensor->dim(d));
            write_raw(out, &dim, sizeof dim);
        }
        write_raw(out, ref.tensor->data(), ref.tensor->size() * sizeof(double));
    }
    if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);

    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw DataError("checkpoint version mismatch in " + path + ": expected \"" + kMagic +
                        "\", got \"" + line + "\"");
    }
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        if (line == "end_header") break;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("checkpoint: bad header line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (line != "end_header") throw DataError("checkpoint truncated: " + path);
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError(std::string("checkpoint: missing header key ") + key);
        return it->second;
    };

    Checkpoint cp;
    cp.vocab_size = static_cast<std::size_t>(parse_ll(need("vocab_size"), "vocab_size"));
    TrainConfig& c = cp.config;
    c.d_w = static_cast<std::size_t>(parse_ll(need("d_w"), "d_w"));
    c.h = static_cast<std::size_t>(parse_ll(need("h"), "h"));
    c.d_u = static_cast<std::size_t>(parse_ll(need("d_u"), "d_u"));
    c.z = static_cast<std::size_t>(parse_ll(need("z"), "z"));
    c.lambda = parse_double(need("lambda"), "lambda");
    c.rho = parse_double(need("rho"), "rho");
    c.epochs = static_cast<int>(parse_ll(need("epochs"), "epochs"));
    c.seed = static_cast<std::uint64_t>(parse_ll(need("seed"), "seed"));
    const std::string& clip = need("clip_norm");
    c.clip_norm = (clip == "none") ? std::nullopt : std::optional<double>(parse_double(clip, "clip_norm"));
    c.freeze_embeddings = parse_ll(need("freeze_embeddings"), "freeze_embeddings") != 0;
    c.patience = static_cast<int>(parse_ll(need("patience"), "patience"));
    c.threshold = parse_double(need("threshold"), "threshold");
    c.skipgram.window = static_cast<int>(parse_ll(need("sg_window"), "sg_window"));
    c.skipgram.negative_samples = static_cast<int>(parse_ll(need("sg_negatives"), "sg_negatives"));
    c.skipgram.epochs = static_cast<int>(parse_ll(need("sg_epochs"), "sg_epochs"));
    c.skipgram.learning_rate = parse_double(need("sg_lr"), "sg_lr");
    c.skipgram.seed = static_cast<std::uint64_t>(parse_ll(need("sg_seed"), "sg_seed"));
    cp.vocab_hash = std::stoull(need("vocab_hash"), nullptr, 16);
    cp.epoch = static_cast<int>(parse_ll(need("epoch"), "epoch"));
    cp.best_val_accuracy = parse_double(need("best_val_accuracy"), "best_val_accuracy");

    const auto user_count = static_cast<std::size_t>(parse_ll(need("user_count"), "user_count"));
    const auto tensor_count = static_cast<std::size_t>(parse_ll(need("tensor_count"), "tensor_count"));

    std::vector<long long> ids(user_count);
    read_raw(in, ids.data(), user_count * sizeof(long long), path);

    cp.params.dims = c.dims(cp.vocab_size);
    cp.params.question_enc = make_bilstm(c.h, c.d_w);
    cp.params.answer_enc = make_bilstm(c.h, c.d_w);
    cp.params.word_emb.matrix = Tensor({cp.vocab_size, c.d_w});
    cp.params.users.matrix = Tensor({user_count + 1, c.d_u});
    cp.params.ntn = make_ntn(c.z, cp.params.dims.d_q(), cp.params.dims.d_a());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!cp.params.users.row_of.emplace(ids[i], i + 1).second) {
            throw DataError("checkpoint: duplicate user id " + std::to_string(ids[i]));
        }
    }

    auto refs = cp.params.named_tensors();
    for (std::size_t t = 0; t < tensor_count; ++t) {
        std::uint32_t name_len = 0;
        read_raw(in, &name_len, sizeof name_len, path);
        if (name_len > 4096) throw DataError("checkpoint: implausible tensor name length");
        std::string name(name_len, '\0');
        read_raw(in, name.data(), name_len, path);
        std::uint32_t rank = 0;
        read_raw(in, &rank, sizeof rank, path);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) {
            std::uint64_t dim = 0;
            read_raw(in, &dim, sizeof dim, path);
            d = static_cast<std::size_t>(dim);
        }
        if (t >= refs.size() || refs[t].name != name) {
            throw DataError("checkpoint: unexpected tensor \"" + name + "\" at position " +
                            std::to_string(t));
        }
        if (refs[t].tensor->shape() != shape) {
            throw DataError("checkpoint: tensor " + name + " has shape " + shape_str(shape) +
                            ", expected " + shape_str(*refs[t].tensor));
        }
        read_raw(in, refs[t].tensor->data(), refs[t].tensor->size() * sizeof(double), path);
    }
    return cp;
}

}  // namespace milkit
