#include "palseg/nn/modules.hpp"

namespace palseg::nn {

template <typename T>
Conv2d<T>::Conv2d(int in_c, int out_c, int kh, int kw, int stride_, int pad_h_, int pad_w_,
                  bool with_bias, Rng& rng)
    : stride(stride_), pad_h(pad_h_), pad_w(pad_w_) {
    Tensor<T> w({out_c, in_c, kh, kw});
    kaiming_normal(w, rng);
    weight = make_var(std::move(w), true);
    if (with_bias) {
        bias = make_var(Tensor<T>({out_c}), true);
    }
}

template <typename T>
VarPtr<T> Conv2d<T>::forward(const VarPtr<T>& x) const {
    return conv2d(x, weight, bias, stride, stride, pad_h, pad_w);
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                        std::vector<BufferEntry<T>>&) {
    params.push_back({prefix + ".weight", weight});
    if (bias) params.push_back({prefix + ".bias", bias});
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels)
    : gamma(make_var(Tensor<T>({channels}, T(1)), true)),
      beta(make_var(Tensor<T>({channels}, T(0)), true)),
      running_mean({channels}, T(0)),
      running_var({channels}, T(1)) {}

template <typename T>
VarPtr<T> BatchNorm2d<T>::forward(const VarPtr<T>& x, bool training) {
    return batch_norm(x, gamma, beta, running_mean, running_var, training, momentum, eps);
}

template <typename T>
void BatchNorm2d<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                             std::vector<BufferEntry<T>>& buffers) {
    params.push_back({prefix + ".weight", gamma});
    params.push_back({prefix + ".bias", beta});
    buffers.push_back({prefix + ".running_mean", &running_mean});
    buffers.push_back({prefix + ".running_var", &running_var});
}

template <typename T>
ConvBnRelu<T>::ConvBnRelu(int in_c, int out_c, int kernel, int stride, Rng& rng)
    : conv(in_c, out_c, kernel, kernel, stride, kernel / 2, kernel / 2, false, rng),
      bn(out_c) {}

template <typename T>
VarPtr<T> ConvBnRelu<T>::forward(const VarPtr<T>& x, bool training) {
    return relu(bn.forward(conv.forward(x), training));
}

template <typename T>
void ConvBnRelu<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                            std::vector<BufferEntry<T>>& buffers) {
    conv.collect(prefix + ".conv", params, buffers);
    bn.collect(prefix + ".bn", params, buffers);
}

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class ConvBnRelu<float>;
template class ConvBnRelu<double>;

} // namespace palseg::nn
