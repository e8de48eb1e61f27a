#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "milkit/bags_io.hpp"
#include "milkit/model.hpp"
#include "milkit/synthdata.hpp"

using namespace milkit;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("bags round-trip through the line format") {
    SynthConfig cfg;
    cfg.bag_count = 30;
    cfg.seed = 5;
    std::vector<Bag> bags = generate(cfg);
    TempFile f("io_bags.jsonl");
    write_bags(f.path, bags);
    std::vector<Bag> loaded = read_bags(f.path);
    REQUIRE(loaded.size() == bags.size());
    for (std::size_t i = 0; i < bags.size(); ++i) {
        CHECK(loaded[i].question_id == bags[i].question_id);
        CHECK(loaded[i].user_id == bags[i].user_id);
        CHECK(loaded[i].label == bags[i].label);
        CHECK(loaded[i].question_tokens == bags[i].question_tokens);
        CHECK(loaded[i].instances == bags[i].instances);
    }
}

TEST_CASE("read_bags errors name the file and line") {
    TempFile f("io_bad_bags.jsonl");
    {
        std::ofstream out(f.path, std::ios::binary);
        out << R"({"answers":[[2]],"id":1,"label":1,"question":[2],"user":4})" << "\n";
        out << "{not json}\n";
    }
    try {
        read_bags(f.path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("io_bad_bags.jsonl") != std::string::npos);
        CHECK(msg.find(":2") != std::string::npos);
    }

    TempFile g("io_bad_label.jsonl");
    {
        std::ofstream out(g.path, std::ios::binary);
        out << R"({"answers":[[2]],"id":1,"label":3,"question":[2],"user":4})" << "\n";
    }
    CHECK_THROWS_AS(read_bags(g.path), DataError);

    TempFile h("io_no_answers.jsonl");
    {
        std::ofstream out(h.path, std::ios::binary);
        out << R"({"answers":[],"id":1,"label":1,"question":[2],"user":4})" << "\n";
    }
    CHECK_THROWS_AS(read_bags(h.path), DataError);
}

TEST_CASE("vocab files round-trip and reject gaps") {
    Vocab v;
    v.id_to_token = {"<pad>", "<unk>", "alpha", "beta"};
    v.counts = {0, 2, 9, 5};
    v.token_to_id = {{"alpha", 2}, {"beta", 3}};
    TempFile f("io_vocab.tsv");
    write_vocab(f.path, v);
    Vocab loaded = read_vocab(f.path);
    CHECK(loaded.size() == 4);
    CHECK(loaded.id_or_unk("alpha") == 2);
    CHECK(loaded.id_or_unk("gamma") == Vocab::kUnk);
    CHECK(loaded.counts == v.counts);

    TempFile g("io_bad_vocab.tsv");
    {
        std::ofstream out(g.path, std::ios::binary);
        out << "<pad>\t0\t0\n<unk>\t1\t0\nskip\t3\t1\n";  // id 2 missing
    }
    CHECK_THROWS_AS(read_vocab(g.path), DataError);
}

TEST_CASE("fnv hashing is stable and sensitive") {
    const char a[] = "milkit";
    const char b[] = "milkjt";
    CHECK(fnv1a64(a, 6) == fnv1a64(a, 6));
    CHECK(fnv1a64(a, 6) != fnv1a64(b, 6));
}

TEST_CASE("unseen askers fall back to the reserved row end to end") {
    ModelDims dims{8, 3, 2, 2, 2};
    std::vector<long long> train_users = {100};
    ModelParams params = init_model(dims, train_users, 21);

    Bag known;
    known.question_id = 1;
    known.user_id = 100;
    known.question_tokens = {2, 3};
    known.instances = {{4, 5}};
    known.label = +1;

    Bag unseen = known;
    unseen.user_id = 999;  // never in the table

    CHECK(model_forward(params, known).user_row == params.users.row_of.at(100));
    CHECK(model_forward(params, unseen).user_row == UserTable::kUnkRow);
    // both produce a valid probability
    CHECK(bag_probability(params, unseen) > 0.0);
    CHECK(bag_probability(params, unseen) < 1.0);
}
