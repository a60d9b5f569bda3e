#include <benchmark/benchmark.h>

#include "palseg/pal/unfold.hpp"

using namespace palseg;

namespace {

pal::PalCalibration bench_calib() {
    pal::PalCalibration c;
    c.center_x = 1023.5;
    c.center_y = 1023.5;
    c.r_inner = 240.0;
    c.r_outer = 960.0;
    return c;
}

void BM_BuildSampleMap(benchmark::State& state) {
    const pal::PalCalibration calib = bench_calib();
    const int w = static_cast<int>(state.range(0));
    const int h = w / 4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pal::build_sample_map(calib, w, h, 2048, 2048));
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_BuildSampleMap)->Arg(1024)->Arg(2048);

void BM_UnfoldImage(benchmark::State& state) {
    const pal::PalCalibration calib = bench_calib();
    const int w = static_cast<int>(state.range(0));
    const int h = w / 4;
    const pal::SampleMap map = pal::build_sample_map(calib, w, h, 2048, 2048);
    pal::AnnularImage img{ImageU8(2048, 2048, 3, 127)};
    const auto interp = state.range(1) ? pal::Interp::bilinear : pal::Interp::nearest;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pal::unfold_image(img, map, interp));
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_UnfoldImage)->Args({2048, 0})->Args({2048, 1});

} // namespace
