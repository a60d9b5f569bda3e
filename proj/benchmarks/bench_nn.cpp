#include <benchmark/benchmark.h>

#include <random>

#include "palseg/nn/edapp.hpp"
#include "palseg/nn/ops.hpp"
#include "palseg/nn/segnet.hpp"

using namespace palseg;

namespace {

nn::Tensor<float> random_tensor(std::vector<std::int64_t> shape, std::uint64_t seed) {
    nn::Tensor<float> t(std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
    return t;
}

void BM_Conv3x3(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    auto x = nn::make_var(random_tensor({1, c, 64, 64}, 1));
    auto w = nn::make_var(random_tensor({c, c, 3, 3}, 2));
    nn::NoGradGuard ng;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::conv2d(x, w, nn::VarPtr<float>{}, 1, 1));
    }
}
BENCHMARK(BM_Conv3x3)->Arg(64)->Arg(128);

void BM_AvgPool(benchmark::State& state) {
    auto x = nn::make_var(random_tensor({1, 128, 64, 64}, 3));
    const int kernel = static_cast<int>(state.range(0));
    nn::NoGradGuard ng;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::avg_pool2d(x, kernel, kernel / 2, kernel / 4, true));
    }
}
BENCHMARK(BM_AvgPool)->Arg(5)->Arg(9)->Arg(17);

void BM_EdappForward(benchmark::State& state) {
    nn::EdappConfig cfg;
    cfg.in_channels = 512;
    cfg.branch_channels = 128;
    cfg.out_channels = 256;
    nn::Rng rng(4);
    nn::Edapp<float> edapp(cfg, rng);
    auto x = nn::make_var(random_tensor({1, 512, 16, 64}, 5));
    nn::NoGradGuard ng;
    for (auto _ : state) {
        benchmark::DoNotOptimize(edapp.forward(x, false));
    }
}
BENCHMARK(BM_EdappForward);

void BM_TinyModelForward(benchmark::State& state) {
    nn::SegNet<float> model(nn::ModelConfig::tiny_test(3), 6);
    const int side = static_cast<int>(state.range(0));
    auto x = nn::make_var(random_tensor({1, 3, side, side}, 7));
    nn::NoGradGuard ng;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(x, false));
    }
}
BENCHMARK(BM_TinyModelForward)->Arg(128)->Arg(256);

} // namespace
