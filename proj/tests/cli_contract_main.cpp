// Command-line contract checks: help text, exit codes, vocab-hash refusal,
// config-file precedence. Driven through the real binary.
//
// Usage: milkit_cli_contract <milkit-cli-path>
// Exit code: number of failed checks.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;
int g_failures = 0;

int run(const std::string& args, std::string* output = nullptr) {
    const fs::path log = g_dir / "cmd.log";
    const std::string cmd = g_cli + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

void check(bool pass, const std::string& what) {
    std::printf("%s  %s\n", pass ? "ok  " : "FAIL", what.c_str());
    if (!pass) ++g_failures;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <milkit-cli>\n", argv[0]);
        return 64;
    }
    g_cli = argv[1];
    g_dir = fs::current_path() / "cli_contract_scratch";
    fs::create_directories(g_dir);

    // --help exits 0 on the top level and on every subcommand, and the text
    // mentions the flags
    const std::vector<std::string> subcommands = {"ingest", "stats",    "synth",    "pretrain",
                                                  "train",  "eval",     "predict",  "baseline",
                                                  "gradcheck", "curve", "breakdown"};
    std::string help;
    check(run("--help", &help) == 0 && help.find("SUBCOMMAND") != std::string::npos,
          "--help exits 0");
    for (const auto& sub : subcommands) {
        std::string text;
        const int rc = run(sub + " --help", &text);
        check(rc == 0 && text.find("--help") != std::string::npos,
              sub + " --help exits 0 and documents flags");
    }
    std::string train_help;
    run("train --help", &train_help);
    for (const char* flag : {"--rho", "--lambda", "--epochs", "--seed", "--vocab", "--out"}) {
        check(train_help.find(flag) != std::string::npos,
              std::string("train --help documents ") + flag);
    }

    // exit code contract
    check(run("no-such-command") == 1, "unknown subcommand exits 1 (usage)");
    check(run("train") == 1, "missing required arguments exit 1 (usage)");
    check(run("stats does-not-exist.jsonl") == 2, "missing input file exits 2 (data)");
    std::string gc_out;
    check(run("gradcheck --tolerance 1e-18", &gc_out) == 3 &&
              gc_out.find("FAILED") != std::string::npos,
          "gradcheck beyond reachable tolerance exits 3 (numeric)");

    // a tiny dataset for the stateful checks
    const fs::path bags = g_dir / "bags.jsonl";
    const fs::path vocab = g_dir / "vocab.tsv";
    const fs::path model = g_dir / "model.ckpt";
    check(run("synth --bags 60 --vocab-size 20 --seed 3 --out " + bags.string() + " --vocab " +
              vocab.string()) == 0,
          "synth runs");
    check(run("train " + bags.string() + " --vocab " + vocab.string() + " --out " +
              model.string() + " --epochs 1 --d-w 4 --hidden 3 --d-u 2 --slices 2 "
              "--sg-epochs 1 --seed 3") == 0,
          "train runs");

    // eval with a different vocab file refuses with a data error
    const fs::path other_vocab = g_dir / "other_vocab.tsv";
    {
        std::ifstream in(vocab, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        std::ofstream out(other_vocab, std::ios::binary);
        out << ss.str() << "extra\t20\t1\n";
    }
    std::string eval_err;
    const int eval_rc =
        run("eval " + bags.string() + " --vocab " + other_vocab.string() + " --model " +
                model.string(),
            &eval_err);
    check(eval_rc == 2 && eval_err.find("vocab") != std::string::npos,
          "eval with a mismatched vocab exits 2 and names the problem");

    // config file: values apply, flags override, unknown keys are errors
    const fs::path config = g_dir / "milkit.cfg";
    {
        std::ofstream out(config, std::ios::binary);
        out << "[synth]\nbags=25\nseed=5\n";
    }
    const fs::path cfg_bags = g_dir / "cfg_bags.jsonl";
    check(run("--config " + config.string() + " synth --out " + cfg_bags.string()) == 0,
          "config file values apply");
    {
        std::ifstream in(cfg_bags, std::ios::binary);
        std::string line;
        std::size_t lines = 0;
        while (std::getline(in, line)) ++lines;
        check(lines == 25, "config file set the bag count");
    }
    const fs::path cfg_bags2 = g_dir / "cfg_bags2.jsonl";
    check(run("--config " + config.string() + " synth --bags 10 --out " + cfg_bags2.string()) ==
              0,
          "flags override config file values");
    {
        std::ifstream in(cfg_bags2, std::ios::binary);
        std::string line;
        std::size_t lines = 0;
        while (std::getline(in, line)) ++lines;
        check(lines == 10, "explicit flag won over the config file");
    }
    {
        std::ofstream out(config, std::ios::binary);
        out << "[synth]\nnot_a_real_key=1\n";
    }
    check(run("--config " + config.string() + " synth --out " + cfg_bags.string()) == 1,
          "unknown config keys are usage errors");

    if (g_failures == 0) std::printf("all cli contract checks passed\n");
    return g_failures;
}
