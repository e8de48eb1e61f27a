// milkit command line: ingest, stats, synth, pretrain, train, eval, predict,
// baseline, gradcheck, curve, breakdown.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "milkit/bags_io.hpp"
#include "milkit/baselines.hpp"
#include "milkit/checkpoint.hpp"
#include "milkit/evaluation.hpp"
#include "milkit/synthdata.hpp"

using namespace milkit;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// shared option blocks

struct TrainOpts {
    TrainConfig config;
    bool no_clip = false;
    double clip_value = 5.0;
    bool sg_seed_set = false;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--rho", config.rho, "Initial learning rate");
        cmd->add_option("--lambda", config.lambda, "L2 regularization weight");
        cmd->add_option("--epochs", config.epochs, "Training epochs");
        cmd->add_option("--seed", config.seed, "Seed for init, shuffling and the split");
        cmd->add_option("--d-w", config.d_w, "Word embedding dimension");
        cmd->add_option("--hidden", config.h, "LSTM hidden size per direction");
        cmd->add_option("--d-u", config.d_u, "User embedding dimension");
        cmd->add_option("--slices", config.z, "Tensor slices");
        cmd->add_option("--clip", clip_value, "Global gradient norm clip");
        cmd->add_flag("--no-clip", no_clip, "Disable gradient clipping");
        cmd->add_flag("--freeze-embeddings", config.freeze_embeddings,
                      "Keep pretrained word embeddings fixed");
        cmd->add_option("--patience", config.patience,
                        "Early-stopping patience in epochs (0 = off)");
        cmd->add_option("--threshold", config.threshold, "Decision threshold");
        cmd->add_option("--sg-window", config.skipgram.window, "Skip-gram window");
        cmd->add_option("--sg-negatives", config.skipgram.negative_samples,
                        "Skip-gram negatives per pair");
        cmd->add_option("--sg-epochs", config.skipgram.epochs, "Skip-gram epochs");
        cmd->add_option("--sg-lr", config.skipgram.learning_rate, "Skip-gram learning rate");
        cmd->add_option("--sg-seed", config.skipgram.seed, "Skip-gram seed (defaults to --seed)")
            ->each([this](const std::string&) { sg_seed_set = true; });
    }

    TrainConfig resolve() {
        TrainConfig c = config;
        c.clip_norm = no_clip ? std::nullopt : std::optional<double>(clip_value);
        if (!sg_seed_set) c.skipgram.seed = c.seed;
        return c;
    }
};

struct LoadedDataset {
    std::vector<Bag> bags;
    Vocab vocab;
    std::uint64_t vocab_hash = 0;
    std::size_t vocab_size = 0;
};

LoadedDataset load_dataset(const std::string& bags_path, const std::string& vocab_path) {
    LoadedDataset data;
    data.bags = read_bags(bags_path);
    data.vocab = read_vocab(vocab_path);
    data.vocab_hash = hash_file(vocab_path);
    data.vocab_size = data.vocab.size();
    const std::size_t needed = max_token_id_plus_one(data.bags);
    if (needed > data.vocab_size) {
        throw DataError(bags_path + " references token id " + std::to_string(needed - 1) +
                        " but " + vocab_path + " has only " + std::to_string(data.vocab_size) +
                        " entries");
    }
    return data;
}

void check_vocab_hash(const Checkpoint& cp, std::uint64_t actual, const std::string& vocab_path) {
    if (cp.vocab_hash != actual) {
        std::ostringstream os;
        os << "vocab mismatch: " << vocab_path << " is not the vocabulary this model was "
           << "trained with (stored hash " << std::hex << cp.vocab_hash << ", file hash "
           << actual << "); pass the original vocab file";
        throw DataError(os.str());
    }
}

std::vector<Bag> select_split(const std::vector<Bag>& bags, std::uint64_t seed,
                              const std::string& which) {
    if (which == "all") return bags;
    DatasetSplit s = split(bags, seed);
    if (which == "train") return s.train;
    if (which == "validation") return s.validation;
    if (which == "test") return s.test;
    throw DataError("unknown split \"" + which + "\" (use train, validation, test or all)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

std::string metrics_tsv(const MetricsReport& m) {
    std::ostringstream os;
    os << "precision\trecall\tf1\taccuracy\ttp\ttn\tfp\tfn\tdegenerate\n";
    os << fmt(m.precision) << "\t" << fmt(m.recall) << "\t" << fmt(m.f1) << "\t"
       << fmt(m.accuracy) << "\t" << m.counts.tp << "\t" << m.counts.tn << "\t" << m.counts.fp
       << "\t" << m.counts.fn << "\t"
       << (m.degenerate_precision || m.degenerate_recall || m.degenerate_f1 ? 1 : 0) << "\n";
    return os.str();
}

json metrics_json(const MetricsReport& m) {
    json j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["accuracy"] = m.accuracy;
    j["tp"] = m.counts.tp;
    j["tn"] = m.counts.tn;
    j["fp"] = m.counts.fp;
    j["fn"] = m.counts.fn;
    j["degenerate_precision"] = m.degenerate_precision;
    j["degenerate_recall"] = m.degenerate_recall;
    j["degenerate_f1"] = m.degenerate_f1;
    return j;
}

std::string training_log_tsv(const TrainResult& r) {
    std::ostringstream os;
    os << "epoch\ttrain_loss\tval_accuracy\n";
    for (const auto& e : r.log) {
        os << e.epoch << "\t" << fmt(e.train_loss) << "\t" << fmt(e.val_accuracy) << "\n";
    }
    return os.str();
}

// Users.xml shares the row attribute structure; only Id matters here.
void parse_users_ids(std::istream& in, std::unordered_set<long long>& out) {
    // reuse the posts scanner: user rows lack PostTypeId so they surface as
    // rejects; scan attributes instead via a minimal pass
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while ((pos = text.find("Id=\"", pos)) != std::string::npos) {
        const bool at_word_start = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])));
        pos += 4;
        if (!at_word_start) continue;
        std::size_t end = text.find('"', pos);
        if (end == std::string::npos) break;
        try {
            out.insert(std::stoll(text.substr(pos, end - pos)));
        } catch (...) {
            // not a numeric id attribute; skip
        }
        pos = end;
    }
}

// ---------------------------------------------------------------------------
// subcommand runners

int run_ingest(const std::string& posts_path, const std::string& users_path,
               const std::string& out_path, const std::string& vocab_path,
               const std::string& stats_path, long long min_count, std::size_t max_len) {
    std::ifstream in(posts_path, std::ios::binary);
    if (!in) throw DataError("cannot open posts file: " + posts_path);
    ParseStats parse_stats;
    std::vector<RawPost> posts = parse_posts(in, &parse_stats);
    std::cerr << "parsed " << parse_stats.posts << " posts (" << parse_stats.skipped_types
              << " non-QA rows skipped, " << parse_stats.rejected << " rejected)\n";

    std::unordered_set<long long> valid_users;
    bool have_users = false;
    if (!users_path.empty()) {
        std::ifstream uin(users_path, std::ios::binary);
        if (!uin) throw DataError("cannot open users file: " + users_path);
        parse_users_ids(uin, valid_users);
        have_users = true;
        std::cerr << "loaded " << valid_users.size() << " user ids from " << users_path << "\n";
    }

    std::vector<std::vector<std::string>> docs;
    docs.reserve(posts.size());
    for (const auto& p : posts) docs.push_back(tokenize(p.body, max_len));
    Vocab vocab = build_vocab(docs, min_count);

    BagBuildStats bag_stats;
    std::vector<Bag> bags =
        build_bags(posts, vocab, &bag_stats, max_len, have_users ? &valid_users : nullptr);

    write_bags(out_path, bags);
    write_vocab(vocab_path, vocab);
    ForumStats forum = stats(bags);
    std::string report = forum_stats_json(forum, &bag_stats, &parse_stats);
    if (!stats_path.empty()) write_text(stats_path, report + "\n");
    std::cerr << "wrote " << bags.size() << " bags to " << out_path << ", vocab of "
              << vocab.size() << " to " << vocab_path << "\n";
    std::cout << report << "\n";
    return kExitOk;
}

int run_stats(const std::string& input_path, const std::string& json_path) {
    std::ifstream probe(input_path, std::ios::binary);
    if (!probe) throw DataError("cannot open: " + input_path);
    int first = probe.peek();
    std::string report;
    if (first == '<') {
        ParseStats parse_stats;
        std::vector<RawPost> posts = parse_posts(probe, &parse_stats);
        std::vector<std::vector<std::string>> docs;
        for (const auto& p : posts) docs.push_back(tokenize(p.body));
        Vocab vocab = build_vocab(docs, 1);
        BagBuildStats bag_stats;
        std::vector<Bag> bags = build_bags(posts, vocab, &bag_stats);
        report = forum_stats_json(stats(bags), &bag_stats, &parse_stats);
    } else {
        probe.close();
        std::vector<Bag> bags = read_bags(input_path);
        report = forum_stats_json(stats(bags));
    }
    if (!json_path.empty()) write_text(json_path, report + "\n");
    std::cout << report << "\n";
    return kExitOk;
}

int run_synth(const SynthConfig& config, const std::string& out_path,
              const std::string& vocab_path) {
    std::vector<Bag> bags = generate(config);
    write_bags(out_path, bags);
    if (!vocab_path.empty()) write_vocab(vocab_path, synth_vocab(config));
    std::cerr << "wrote " << bags.size() << " synthetic bags to " << out_path << "\n";
    return kExitOk;
}

int run_pretrain(const std::string& bags_path, const std::string& vocab_path,
                 const std::string& out_path, std::size_t dim, SkipGramConfig config) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    std::vector<std::vector<int>> corpus;
    for (const auto& bag : data.bags) {
        corpus.push_back(bag.question_tokens);
        for (const auto& inst : bag.instances) corpus.push_back(inst);
    }
    PretrainResult result = pretrain_skipgram(corpus, config, data.vocab_size, dim);
    std::ostringstream os;
    for (std::size_t id = 0; id < data.vocab_size; ++id) {
        os << data.vocab.id_to_token[id];
        for (std::size_t k = 0; k < dim; ++k) {
            char buf[32];
            std::snprintf(buf, sizeof buf, " %.8g", result.table.matrix(id, k));
            os << buf;
        }
        os << "\n";
    }
    write_text(out_path, os.str());
    std::cerr << "wrote " << data.vocab_size << " x " << dim << " embeddings to " << out_path
              << " (final epoch loss " << fmt(result.epoch_loss.back()) << ")\n";
    return kExitOk;
}

int run_train(const std::string& bags_path, const std::string& vocab_path,
              const std::string& model_path, const std::string& log_path, TrainOpts& opts) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    TrainConfig config = opts.resolve();
    DatasetSplit splits = split(data.bags, config.seed);
    TrainResult result = train(splits, config, data.vocab_size);

    Checkpoint cp;
    cp.config = config;
    cp.vocab_size = data.vocab_size;
    cp.vocab_hash = data.vocab_hash;
    cp.epoch = result.best_epoch;
    cp.best_val_accuracy = result.best_val_accuracy;
    cp.params = std::move(result.params);
    save_checkpoint(cp, model_path);

    std::string log = training_log_tsv(result);
    if (!log_path.empty()) write_text(log_path, log);
    std::cout << log;
    std::cerr << "saved model to " << model_path << " (best epoch " << result.best_epoch
              << ", validation accuracy " << fmt(result.best_val_accuracy) << ")\n";
    return kExitOk;
}

int run_eval(const std::string& bags_path, const std::string& vocab_path,
             const std::string& model_path, const std::string& which,
             const std::string& out_path, const std::string& json_path) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    Checkpoint cp = load_checkpoint(model_path);
    check_vocab_hash(cp, data.vocab_hash, vocab_path);
    std::vector<Bag> subset = select_split(data.bags, cp.config.seed, which);
    if (subset.empty()) throw DataError("split \"" + which + "\" of " + bags_path + " is empty");
    MetricsReport m = evaluate(cp.params, subset, cp.config.threshold);
    std::string table = metrics_tsv(m);
    if (!out_path.empty()) write_text(out_path, table);
    if (!json_path.empty()) write_text(json_path, metrics_json(m).dump(2) + "\n");
    std::cout << table;
    return kExitOk;
}

int run_predict(const std::string& bags_path, const std::string& vocab_path,
                const std::string& model_path, const std::string& out_path) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    Checkpoint cp = load_checkpoint(model_path);
    check_vocab_hash(cp, data.vocab_hash, vocab_path);
    std::vector<double> probs = predict_probs(cp.params, data.bags);
    std::ostringstream os;
    os << "id\tprob\tlabel\n";
    for (std::size_t i = 0; i < data.bags.size(); ++i) {
        os << data.bags[i].question_id << "\t" << fmt(probs[i]) << "\t"
           << predict_label(probs[i], cp.config.threshold) << "\n";
    }
    if (!out_path.empty()) write_text(out_path, os.str());
    std::cout << os.str();
    return kExitOk;
}

int run_baseline(const std::string& bags_path, const std::string& vocab_path,
                 const std::string& kind, TrainOpts& opts, const std::string& json_path) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    TrainConfig config = opts.resolve();
    DatasetSplit splits = split(data.bags, config.seed);
    BowPooling pooling;
    if (kind == "mean") pooling = BowPooling::Mean;
    else if (kind == "max") pooling = BowPooling::Max;
    else throw DataError("unknown baseline kind \"" + kind + "\" (use mean or max)");
    BaselineResult result = train_bow_baseline(splits, config, data.vocab_size, pooling);
    if (!json_path.empty()) write_text(json_path, metrics_json(result.report).dump(2) + "\n");
    std::cout << metrics_tsv(result.report);
    return kExitOk;
}

int run_gradcheck(std::size_t d_w, std::size_t h, std::size_t d_u, std::size_t z,
                  std::size_t answers, double epsilon, double tolerance, std::uint64_t seed) {
    ModelDims dims{30, d_w, h, d_u, z};
    GradCheckSetup setup = make_gradcheck_setup(dims, answers, seed);
    GradCheckReport report = run_model_gradcheck(setup.params, setup.bag, epsilon);
    std::cout << report.to_string();
    if (!report.within(tolerance)) {
        std::cerr << "gradcheck FAILED: max relative error " << report.max_rel_err
                  << " >= " << tolerance << "\n";
        return kExitNumeric;
    }
    std::cerr << "gradcheck passed: max relative error " << report.max_rel_err << " < "
              << tolerance << "\n";
    return kExitOk;
}

int run_curve(const std::string& bags_path, const std::string& vocab_path,
              const std::vector<double>& fractions, TrainOpts& opts,
              const std::string& json_path) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    TrainConfig config = opts.resolve();
    DatasetSplit splits = split(data.bags, config.seed);
    std::vector<CurveRow> rows = learning_curve(fractions, splits, config, data.vocab_size);
    std::ostringstream os;
    os << "fraction\tprecision\trecall\tf1\taccuracy\n";
    json j = json::array();
    for (const auto& row : rows) {
        os << fmt(row.fraction) << "\t" << fmt(row.report.precision) << "\t"
           << fmt(row.report.recall) << "\t" << fmt(row.report.f1) << "\t"
           << fmt(row.report.accuracy) << "\n";
        json item = metrics_json(row.report);
        item["fraction"] = row.fraction;
        j.push_back(item);
    }
    if (!json_path.empty()) write_text(json_path, j.dump(2) + "\n");
    std::cout << os.str();
    return kExitOk;
}

int run_breakdown(const std::string& bags_path, const std::string& vocab_path,
                  const std::string& model_path, const std::string& json_path) {
    LoadedDataset data = load_dataset(bags_path, vocab_path);
    Checkpoint cp = load_checkpoint(model_path);
    check_vocab_hash(cp, data.vocab_hash, vocab_path);
    DatasetSplit splits = split(data.bags, cp.config.seed);
    std::vector<int> preds = predict_labels(cp.params, splits.test, cp.config.threshold);
    auto counts = asker_question_counts(splits.train);
    std::vector<BreakdownRow> rows = user_activity_breakdown(splits.test, preds, counts);
    std::ostringstream os;
    os << "bucket\tcount\tprecision\trecall\tf1\taccuracy\n";
    json j = json::array();
    for (const auto& row : rows) {
        os << row.bucket << "\t" << row.count << "\t" << fmt(row.report.precision) << "\t"
           << fmt(row.report.recall) << "\t" << fmt(row.report.f1) << "\t"
           << fmt(row.report.accuracy) << "\n";
        json item = metrics_json(row.report);
        item["bucket"] = row.bucket;
        item["count"] = row.count;
        j.push_back(item);
    }
    if (!json_path.empty()) write_text(json_path, j.dump(2) + "\n");
    std::cout << os.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"milkit - multiple-instance learning toolkit for question-answer "
                 "satisfaction prediction"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file with key=value lines")->envname("MILKIT_CONFIG");
    app.allow_config_extras(false);

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse a Posts.xml dump into bags");
    std::string in_posts, in_users, ingest_out = "bags.jsonl", ingest_vocab = "vocab.tsv";
    std::string ingest_stats;
    long long min_count = 3;
    std::size_t max_len = 100;
    ingest_cmd->add_option("posts", in_posts, "Posts.xml file")->required();
    ingest_cmd->add_option("--users", in_users, "Optional Users.xml for id validation");
    ingest_cmd->add_option("--out", ingest_out, "Output bags file");
    ingest_cmd->add_option("--vocab", ingest_vocab, "Output vocab file");
    ingest_cmd->add_option("--stats", ingest_stats, "Also write the stats report here");
    ingest_cmd->add_option("--min-count", min_count, "Vocabulary frequency threshold");
    ingest_cmd->add_option("--max-len", max_len, "Token sequence truncation length");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Forum statistics for a bags file or dump");
    std::string stats_in, stats_json;
    stats_cmd->add_option("input", stats_in, "Bags file or Posts.xml")->required();
    stats_cmd->add_option("--json", stats_json, "Also write the report here");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate the trigger-token dataset");
    SynthConfig synth_config;
    std::string synth_out = "bags.jsonl", synth_vocab_path;
    synth_cmd->add_option("--bags", synth_config.bag_count, "Number of bags");
    synth_cmd->add_option("--vocab-size", synth_config.vocab_size, "Token id space");
    synth_cmd->add_option("--trigger-rate", synth_config.positive_fraction,
                          "Fraction of positive bags");
    synth_cmd->add_option("--seed", synth_config.seed, "Generator seed");
    synth_cmd->add_option("--min-answers", synth_config.min_answers, "Minimum answers per bag");
    synth_cmd->add_option("--max-answers", synth_config.max_answers, "Maximum answers per bag");
    synth_cmd->add_option("--min-tokens", synth_config.min_tokens, "Minimum tokens per text");
    synth_cmd->add_option("--max-tokens", synth_config.max_tokens, "Maximum tokens per text");
    synth_cmd->add_option("--user-pool", synth_config.user_pool, "Asker pool size (0 = bags/8)");
    synth_cmd->add_option("--trigger-token", synth_config.trigger_token, "Trigger token id");
    synth_cmd->add_option("--out", synth_out, "Output bags file");
    synth_cmd->add_option("--vocab", synth_vocab_path, "Also write a synthetic vocab file");

    // pretrain
    auto* pretrain_cmd = app.add_subcommand("pretrain", "Skip-gram pretraining, text export");
    std::string pre_bags, pre_vocab, pre_out = "embeddings.txt";
    std::size_t pre_dim = 64;
    SkipGramConfig pre_config;
    pre_config.seed = 7;
    pretrain_cmd->add_option("bags", pre_bags, "Bags file")->required();
    pretrain_cmd->add_option("--vocab", pre_vocab, "Vocab file")->required();
    pretrain_cmd->add_option("--out", pre_out, "Output text embeddings");
    pretrain_cmd->add_option("--dim", pre_dim, "Embedding dimension");
    pretrain_cmd->add_option("--window", pre_config.window, "Context window");
    pretrain_cmd->add_option("--negatives", pre_config.negative_samples, "Negatives per pair");
    pretrain_cmd->add_option("--epochs", pre_config.epochs, "Epochs");
    pretrain_cmd->add_option("--lr", pre_config.learning_rate, "Learning rate");
    pretrain_cmd->add_option("--seed", pre_config.seed, "Seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the bag scorer");
    std::string train_bags, train_vocab, train_model = "model.ckpt", train_log;
    TrainOpts train_opts;
    train_cmd->add_option("bags", train_bags, "Bags file")->required();
    train_cmd->add_option("--vocab", train_vocab, "Vocab file")->required();
    train_cmd->add_option("--out", train_model, "Output checkpoint");
    train_cmd->add_option("--log", train_log, "Also write the epoch log here");
    train_opts.add_flags(train_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string eval_bags, eval_vocab, eval_model, eval_split = "test", eval_out, eval_json;
    eval_cmd->add_option("bags", eval_bags, "Bags file")->required();
    eval_cmd->add_option("--vocab", eval_vocab, "Vocab file")->required();
    eval_cmd->add_option("--model", eval_model, "Checkpoint")->required();
    eval_cmd->add_option("--split", eval_split, "train, validation, test or all");
    eval_cmd->add_option("--out", eval_out, "Also write the TSV report here");
    eval_cmd->add_option("--json", eval_json, "Also write the JSON report here");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Per-bag probabilities");
    std::string pred_bags, pred_vocab, pred_model, pred_out;
    predict_cmd->add_option("bags", pred_bags, "Bags file")->required();
    predict_cmd->add_option("--vocab", pred_vocab, "Vocab file")->required();
    predict_cmd->add_option("--model", pred_model, "Checkpoint")->required();
    predict_cmd->add_option("--out", pred_out, "Also write predictions here");

    // baseline
    auto* baseline_cmd = app.add_subcommand("baseline", "Train and evaluate a bow baseline");
    std::string base_bags, base_vocab, base_kind = "mean", base_json;
    TrainOpts base_opts;
    baseline_cmd->add_option("bags", base_bags, "Bags file")->required();
    baseline_cmd->add_option("--vocab", base_vocab, "Vocab file")->required();
    baseline_cmd->add_option("--kind", base_kind, "mean or max pooling");
    baseline_cmd->add_option("--json", base_json, "Also write the JSON report here");
    base_opts.add_flags(baseline_cmd);

    // gradcheck
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
    std::size_t gc_dw = 5, gc_h = 4, gc_du = 3, gc_z = 3, gc_answers = 3;
    double gc_eps = 1e-5, gc_tol = 1e-4;
    std::uint64_t gc_seed = 7;
    gc_cmd->add_option("--d-w", gc_dw, "Word embedding dimension");
    gc_cmd->add_option("--hidden", gc_h, "LSTM hidden size");
    gc_cmd->add_option("--d-u", gc_du, "User embedding dimension");
    gc_cmd->add_option("--slices", gc_z, "Tensor slices");
    gc_cmd->add_option("--answers", gc_answers, "Answers in the probe bag");
    gc_cmd->add_option("--epsilon", gc_eps, "Central-difference step");
    gc_cmd->add_option("--tolerance", gc_tol, "Maximum relative error accepted");
    gc_cmd->add_option("--seed", gc_seed, "Seed");

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "Accuracy vs training-set size table");
    std::string curve_bags, curve_vocab, curve_json;
    std::vector<double> curve_fractions = {0.1, 0.25, 0.5, 1.0};
    TrainOpts curve_opts;
    curve_cmd->add_option("bags", curve_bags, "Bags file")->required();
    curve_cmd->add_option("--vocab", curve_vocab, "Vocab file")->required();
    curve_cmd->add_option("--fractions", curve_fractions, "Train-set fractions");
    curve_cmd->add_option("--json", curve_json, "Also write the JSON report here");
    curve_opts.add_flags(curve_cmd);

    // breakdown
    auto* break_cmd = app.add_subcommand("breakdown", "Metrics by asker activity bucket");
    std::string break_bags, break_vocab, break_model, break_json;
    break_cmd->add_option("bags", break_bags, "Bags file")->required();
    break_cmd->add_option("--vocab", break_vocab, "Vocab file")->required();
    break_cmd->add_option("--model", break_model, "Checkpoint")->required();
    break_cmd->add_option("--json", break_json, "Also write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints the message or requested help text
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(ingest_cmd)) {
            return run_ingest(in_posts, in_users, ingest_out, ingest_vocab, ingest_stats,
                              min_count, max_len);
        }
        if (app.got_subcommand(stats_cmd)) return run_stats(stats_in, stats_json);
        if (app.got_subcommand(synth_cmd)) {
            return run_synth(synth_config, synth_out, synth_vocab_path);
        }
        if (app.got_subcommand(pretrain_cmd)) {
            return run_pretrain(pre_bags, pre_vocab, pre_out, pre_dim, pre_config);
        }
        if (app.got_subcommand(train_cmd)) {
            return run_train(train_bags, train_vocab, train_model, train_log, train_opts);
        }
        if (app.got_subcommand(eval_cmd)) {
            return run_eval(eval_bags, eval_vocab, eval_model, eval_split, eval_out, eval_json);
        }
        if (app.got_subcommand(predict_cmd)) {
            return run_predict(pred_bags, pred_vocab, pred_model, pred_out);
        }
        if (app.got_subcommand(baseline_cmd)) {
            return run_baseline(base_bags, base_vocab, base_kind, base_opts, base_json);
        }
        if (app.got_subcommand(gc_cmd)) {
            return run_gradcheck(gc_dw, gc_h, gc_du, gc_z, gc_answers, gc_eps, gc_tol, gc_seed);
        }
        if (app.got_subcommand(curve_cmd)) {
            return run_curve(curve_bags, curve_vocab, curve_fractions, curve_opts, curve_json);
        }
        if (app.got_subcommand(break_cmd)) {
            return run_breakdown(break_bags, break_vocab, break_model, break_json);
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ShapeError& e) {
        std::cerr << "internal shape error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
