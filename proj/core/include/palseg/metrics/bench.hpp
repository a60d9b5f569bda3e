#pragma once

#include <array>
#include <string>
#include <vector>

#include "palseg/nn/segnet.hpp"

namespace palseg::metrics {

struct BenchReport {
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double fps = 0.0;
    int warmup = 0;
    int runs = 0;
    std::string device;
    std::array<std::int64_t, 4> input_shape{};
    std::vector<double> latencies_ms;

    std::string to_json_text() const;
};

/// Wall-clock forward-pass latency on a fixed random input, eval mode,
/// gradient recording off. Data loading and colorization are outside the
/// timed region; FPS is the reciprocal of the mean latency.
BenchReport benchmark_forward(nn::SegNet<float>& model,
                              const std::array<std::int64_t, 4>& input_shape, int warmup,
                              int runs);

/// CPU model name and thread count, for the report's device field.
std::string device_description();

} // namespace palseg::metrics
