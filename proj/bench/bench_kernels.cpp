// Serial reference vs OpenMP version of each parallel kernel.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fcm/dataio/synth.hpp"
#include "fcm/evalkit/metrics.hpp"
#include "fcm/fcmnet/scoring.hpp"
#include "fcm/ndcore/kernels.hpp"

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    std::vector<float> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    std::vector<float> c(n * n);
    for (auto _ : state) {
        if constexpr (Parallel)
            fcm::nd::kernels::gemm(fcm::nd::Trans::No, fcm::nd::Trans::No, n, n, n, a.data(), b.data(), c.data(), false);
        else
            fcm::nd::serial::gemm(fcm::nd::Trans::No, fcm::nd::Trans::No, n, n, n, a.data(), b.data(), c.data(), false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/omp")->Arg(64)->Arg(128)->Arg(256);

template <bool Parallel>
void BM_Softmax(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto src = random_vec(n * n, 3);
    std::vector<float> m(n * n);
    for (auto _ : state) {
        m = src;
        if constexpr (Parallel)
            fcm::nd::kernels::softmax_rows(n, n, m.data());
        else
            fcm::nd::serial::softmax_rows(n, n, m.data());
        benchmark::DoNotOptimize(m.data());
    }
}
BENCHMARK(BM_Softmax<false>)->Name("softmax/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_Softmax<true>)->Name("softmax/omp")->Arg(256)->Arg(1024);

template <bool Parallel>
void BM_Vus(benchmark::State& state) {
    const std::size_t n = 10000;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::vector<std::uint8_t> labels(n, 0);
    for (std::size_t s = 500; s < n; s += 1500)
        for (std::size_t t = s; t < s + 60; ++t) labels[t] = 1;
    std::vector<double> scores(n);
    for (std::size_t t = 0; t < n; ++t) scores[t] = g(rng) + labels[t];
    const auto w = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto r = Parallel ? fcm::eval::vus(scores, labels, w) : fcm::eval::serial::vus(scores, labels, w);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_Vus<false>)->Name("vus/serial")->Arg(25)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Vus<true>)->Name("vus/omp")->Arg(25)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_Score(benchmark::State& state) {
    auto cfg = fcm::data::make_synth_config(3, 200, 4000, 4, 50, 2.0, 0.3, 1);
    const auto series = fcm::data::synth_generate(cfg).test;
    auto mc = fcm::net::desk_profile(3);
    fcm::net::FcmModel<float> model(mc, 0);
    model.mark_trained();
    const auto plan = fcm::data::plan_windows(series.length(), mc.L, 25);
    for (auto _ : state) {
        auto w = Parallel ? fcm::net::score_windows(model, series, plan)
                          : fcm::net::serial::score_windows(model, series, plan);
        benchmark::DoNotOptimize(w);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan.scoreable_count));
}
BENCHMARK(BM_Score<false>)->Name("score_windows/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Score<true>)->Name("score_windows/omp")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
