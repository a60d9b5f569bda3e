#pragma once

#include <string>
#include <vector>

#include "palseg/nn/init.hpp"
#include "palseg/nn/ops.hpp"

namespace palseg::nn {

template <typename T>
struct ParamEntry {
    std::string path;
    VarPtr<T> param;
};

/// Non-trainable state (batch-norm running statistics). The pointer stays
/// valid for the owning module's lifetime.
template <typename T>
struct BufferEntry {
    std::string path;
    Tensor<T>* buffer;
};

template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_c, int out_c, int kh, int kw, int stride, int pad_h, int pad_w,
           bool with_bias, Rng& rng);

    VarPtr<T> forward(const VarPtr<T>& x) const;
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers);

    VarPtr<T> weight;
    VarPtr<T> bias; // null when constructed without bias

    int stride = 1, pad_h = 0, pad_w = 0;
};

template <typename T>
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels);

    VarPtr<T> forward(const VarPtr<T>& x, bool training);
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers);

    VarPtr<T> gamma;
    VarPtr<T> beta;
    Tensor<T> running_mean;
    Tensor<T> running_var;
    T momentum = T(0.1);
    T eps = T(1e-5);
};

/// conv -> batch norm -> rectifier, the encoder building block.
template <typename T>
class ConvBnRelu {
public:
    ConvBnRelu() = default;
    ConvBnRelu(int in_c, int out_c, int kernel, int stride, Rng& rng);

    VarPtr<T> forward(const VarPtr<T>& x, bool training);
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers);

    Conv2d<T> conv;
    BatchNorm2d<T> bn;
};

extern template class Conv2d<float>;
extern template class Conv2d<double>;
extern template class BatchNorm2d<float>;
extern template class BatchNorm2d<double>;
extern template class ConvBnRelu<float>;
extern template class ConvBnRelu<double>;

} // namespace palseg::nn
