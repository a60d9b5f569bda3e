#pragma once

#include <cstdint>
#include <random>

#include "palseg/nn/tensor.hpp"

namespace palseg::nn {

/// Deterministic parameter-initialization stream. Draw order defines the
/// init, so building the same architecture from the same seed reproduces
/// every weight.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::mt19937_64& engine() { return engine_; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }
    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Variance-scaled normal init for conv weights [out, in, kh, kw],
/// fan-out mode: stddev = sqrt(2 / (out * kh * kw)).
template <typename T>
void kaiming_normal(Tensor<T>& w, Rng& rng);

/// Uniform in [-bound, bound].
template <typename T>
void uniform_init(Tensor<T>& w, double bound, Rng& rng);

extern template void kaiming_normal<float>(Tensor<float>&, Rng&);
extern template void kaiming_normal<double>(Tensor<double>&, Rng&);
extern template void uniform_init<float>(Tensor<float>&, double, Rng&);
extern template void uniform_init<double>(Tensor<double>&, double, Rng&);

} // namespace palseg::nn
