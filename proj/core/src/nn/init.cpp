#include "palseg/nn/init.hpp"

#include <cmath>

namespace palseg::nn {

template <typename T>
void kaiming_normal(Tensor<T>& w, Rng& rng) {
    PALSEG_CHECK(w.ndim() == 4, "kaiming_normal expects a conv weight, got ", w.shape_str());
    const double fan_out = static_cast<double>(w.dim(0) * w.dim(2) * w.dim(3));
    const double stddev = std::sqrt(2.0 / fan_out);
    for (std::int64_t i = 0; i < w.numel(); ++i) {
        w[i] = static_cast<T>(rng.normal(0.0, stddev));
    }
}

template <typename T>
void uniform_init(Tensor<T>& w, double bound, Rng& rng) {
    for (std::int64_t i = 0; i < w.numel(); ++i) {
        w[i] = static_cast<T>(rng.uniform(-bound, bound));
    }
}

template void kaiming_normal<float>(Tensor<float>&, Rng&);
template void kaiming_normal<double>(Tensor<double>&, Rng&);
template void uniform_init<float>(Tensor<float>&, double, Rng&);
template void uniform_init<double>(Tensor<double>&, double, Rng&);

} // namespace palseg::nn
