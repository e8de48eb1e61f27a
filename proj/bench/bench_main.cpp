// Kernel benchmark: OpenMP-parallel paths against the serial reference
// implementations they are tested against. Results must match bitwise; this
// binary reports the speed side of that trade.
//
// Usage: milkit_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <omp.h>

#include "milkit/mil_ntn.hpp"
#include "milkit/model.hpp"
#include "milkit/rng.hpp"
#include "milkit/tensor.hpp"

using namespace milkit;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

template <typename F>
double time_best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs < best) best = secs;
    }
    return best;
}

double g_sink = 0.0;

void bench_matmul(int repeats) {
    Rng rng(1);
    std::printf("%-28s %10s %10s %8s %8s\n", "matmul", "serial(ms)", "omp(ms)", "speedup",
                "match");
    for (std::size_t n : {64, 128, 256, 512}) {
        Tensor a = random_tensor({n, n}, rng);
        Tensor b = random_tensor({n, n}, rng);
        Tensor serial_out, omp_out;
        const double t_serial = time_best_of(repeats, [&] { serial_out = ref::matmul(a, b); });
        const double t_omp = time_best_of(repeats, [&] { omp_out = matmul(a, b); });
        g_sink += serial_out[0] + omp_out[0];
        const bool match = std::memcmp(serial_out.data(), omp_out.data(),
                                       serial_out.size() * sizeof(double)) == 0;
        char label[64];
        std::snprintf(label, sizeof label, "  %zux%zu * %zux%zu", n, n, n, n);
        std::printf("%-28s %10.3f %10.3f %8.2fx %8s\n", label, t_serial * 1e3, t_omp * 1e3,
                    t_serial / t_omp, match ? "yes" : "NO");
    }
}

void bench_score_bag(int repeats) {
    Rng rng(2);
    std::printf("%-28s %10s %10s %8s\n", "score_bag", "1thr(ms)", "omp(ms)", "speedup");
    for (std::size_t n : {4, 16, 64}) {
        NtnParams p = make_ntn(16, 96, 64);
        init_uniform(p, rng);
        Tensor qu = random_tensor({96}, rng);
        std::vector<Tensor> answers;
        for (std::size_t j = 0; j < n; ++j) answers.push_back(random_tensor({64}, rng));

        const int max_threads = omp_get_max_threads();
        omp_set_num_threads(1);
        const double t_serial =
            time_best_of(repeats, [&] { g_sink += score_bag(qu, answers, p).logit; });
        omp_set_num_threads(max_threads);
        const double t_omp =
            time_best_of(repeats, [&] { g_sink += score_bag(qu, answers, p).logit; });
        char label[64];
        std::snprintf(label, sizeof label, "  z=16 d=96x64 n=%zu", n);
        std::printf("%-28s %10.3f %10.3f %8.2fx\n", label, t_serial * 1e3, t_omp * 1e3,
                    t_serial / t_omp);
    }
}

void bench_bag_step(int repeats) {
    Rng rng(3);
    std::printf("%-28s %10s %10s %8s\n", "bag forward+backward", "1thr(ms)", "omp(ms)",
                "speedup");
    ModelDims dims{200, 64, 32, 32, 8};
    std::vector<long long> users = {1, 2, 3};
    ModelParams params = init_model(dims, users, 5);
    ModelParams grads = zeros_like(params);
    Bag bag;
    bag.question_id = 1;
    bag.user_id = 2;
    bag.label = 1;
    for (int i = 0; i < 12; ++i) bag.question_tokens.push_back(2 + (int)rng.next_below(198));
    for (int j = 0; j < 4; ++j) {
        std::vector<int> inst;
        for (int i = 0; i < 12; ++i) inst.push_back(2 + (int)rng.next_below(198));
        bag.instances.push_back(std::move(inst));
    }

    auto step = [&] {
        BagForward fwd = model_forward(params, bag);
        model_backward(params, bag, fwd, fwd.score.prob - 1.0, grads);
        g_sink += fwd.score.prob;
    };
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double t_serial = time_best_of(repeats, step);
    omp_set_num_threads(max_threads);
    const double t_omp = time_best_of(repeats, step);
    std::printf("%-28s %10.3f %10.3f %8.2fx\n", "  4 answers, 12 tokens", t_serial * 1e3,
                t_omp * 1e3, t_serial / t_omp);
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    std::printf("threads available: %d, repeats: %d (best-of timing)\n\n", omp_get_max_threads(),
                repeats);
    bench_matmul(repeats);
    std::printf("\n");
    bench_score_bag(repeats);
    std::printf("\n");
    bench_bag_step(repeats);
    std::fprintf(stderr, "(checksum %g)\n", g_sink);  // keeps the timed work live
    return 0;
}
