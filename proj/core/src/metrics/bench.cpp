#include "palseg/metrics/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "palseg/nn/init.hpp"
#include "palseg/nn/ops.hpp"

namespace palseg::metrics {

namespace {
double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const std::size_t idx = static_cast<std::size_t>(
        std::min<double>(sorted.size() - 1, std::ceil(q * sorted.size()) - 1));
    return sorted[std::max<std::size_t>(idx, 0)];
}
} // namespace

std::string BenchReport::to_json_text() const {
    nlohmann::json j = {
        {"latency_ms", {{"mean", mean_ms}, {"p50", p50_ms}, {"p95", p95_ms}}},
        {"fps", fps},
        {"warmup", warmup},
        {"runs", runs},
        {"device", device},
        {"input_shape", input_shape},
        {"samples_ms", latencies_ms},
    };
    return j.dump(2);
}

std::string device_description() {
    std::string model = "unknown-cpu";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto pos = line.find(':');
            if (pos != std::string::npos) {
                model = line.substr(pos + 1);
                while (!model.empty() && model.front() == ' ') model.erase(model.begin());
            }
            break;
        }
    }
    return model + " (" + std::to_string(std::thread::hardware_concurrency()) + " threads)";
}

BenchReport benchmark_forward(nn::SegNet<float>& model,
                              const std::array<std::int64_t, 4>& input_shape, int warmup,
                              int runs) {
    PALSEG_CHECK(runs >= 1, "benchmark needs at least one timed run");
    PALSEG_CHECK(warmup >= 0, "negative warmup");

    nn::Rng rng(12345);
    nn::Tensor<float> input(
        {input_shape[0], input_shape[1], input_shape[2], input_shape[3]});
    for (std::int64_t i = 0; i < input.numel(); ++i) {
        input[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
    }

    BenchReport rep;
    rep.warmup = warmup;
    rep.runs = runs;
    rep.device = device_description();
    rep.input_shape = input_shape;

    nn::NoGradGuard no_grad;
    for (int i = 0; i < warmup; ++i) {
        auto x = nn::make_var(input);
        (void)model.forward(x, false);
    }
    for (int i = 0; i < runs; ++i) {
        auto x = nn::make_var(input);
        const auto t0 = std::chrono::steady_clock::now();
        auto logits = model.forward(x, false);
        const auto t1 = std::chrono::steady_clock::now();
        PALSEG_CHECK(logits && logits->value.numel() > 0, "benchmark forward produced nothing");
        rep.latencies_ms.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    double total = 0.0;
    for (double v : rep.latencies_ms) total += v;
    rep.mean_ms = total / runs;
    std::vector<double> sorted = rep.latencies_ms;
    std::sort(sorted.begin(), sorted.end());
    rep.p50_ms = percentile(sorted, 0.50);
    rep.p95_ms = percentile(sorted, 0.95);
    rep.fps = rep.mean_ms > 0.0 ? 1000.0 / rep.mean_ms : 0.0;
    return rep;
}

} // namespace palseg::metrics
