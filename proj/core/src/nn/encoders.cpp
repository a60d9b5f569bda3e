#include "palseg/nn/encoders.hpp"

namespace palseg::nn {

template <typename T>
BasicBlock<T>::BasicBlock(int in_c, int out_c, int stride, Rng& rng)
    : conv1(in_c, out_c, 3, 3, stride, 1, 1, false, rng),
      bn1(out_c),
      conv2(out_c, out_c, 3, 3, 1, 1, 1, false, rng),
      bn2(out_c),
      projected(stride != 1 || in_c != out_c) {
    if (projected) {
        down_conv = Conv2d<T>(in_c, out_c, 1, 1, stride, 0, 0, false, rng);
        down_bn = BatchNorm2d<T>(out_c);
    }
}

template <typename T>
VarPtr<T> BasicBlock<T>::forward(const VarPtr<T>& x, bool training) {
    VarPtr<T> out = relu(bn1.forward(conv1.forward(x), training));
    out = bn2.forward(conv2.forward(out), training);
    VarPtr<T> identity = x;
    if (projected) {
        identity = down_bn.forward(down_conv.forward(x), training);
    }
    return relu(add(out, identity));
}

template <typename T>
void BasicBlock<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                            std::vector<BufferEntry<T>>& buffers) {
    conv1.collect(prefix + ".conv1", params, buffers);
    bn1.collect(prefix + ".bn1", params, buffers);
    conv2.collect(prefix + ".conv2", params, buffers);
    bn2.collect(prefix + ".bn2", params, buffers);
    if (projected) {
        down_conv.collect(prefix + ".downsample.conv", params, buffers);
        down_bn.collect(prefix + ".downsample.bn", params, buffers);
    }
}

template <typename T>
ResNet18Encoder<T>::ResNet18Encoder(Rng& rng)
    : stem_conv(3, 64, 7, 7, 2, 3, 3, false, rng), stem_bn(64) {
    const int widths[4] = {64, 128, 256, 512};
    int in_c = 64;
    for (int stage = 0; stage < 4; ++stage) {
        const int out_c = widths[stage];
        const int stride = stage == 0 ? 1 : 2;
        layers[stage][0] = BasicBlock<T>(in_c, out_c, stride, rng);
        layers[stage][1] = BasicBlock<T>(out_c, out_c, 1, rng);
        in_c = out_c;
    }
}

template <typename T>
EncoderFeatures<T> ResNet18Encoder<T>::forward(const VarPtr<T>& x, bool training) {
    VarPtr<T> h = relu(stem_bn.forward(stem_conv.forward(x), training));
    h = max_pool2d(h, 3, 2, 1);

    EncoderFeatures<T> f;
    h = layers[0][1].forward(layers[0][0].forward(h, training), training);
    f.s4 = h;
    h = layers[1][1].forward(layers[1][0].forward(h, training), training);
    f.s8 = h;
    h = layers[2][1].forward(layers[2][0].forward(h, training), training);
    f.s16 = h;
    h = layers[3][1].forward(layers[3][0].forward(h, training), training);
    f.s32 = h;
    return f;
}

template <typename T>
void ResNet18Encoder<T>::collect(const std::string& prefix,
                                 std::vector<ParamEntry<T>>& params,
                                 std::vector<BufferEntry<T>>& buffers) {
    stem_conv.collect(prefix + ".stem.conv", params, buffers);
    stem_bn.collect(prefix + ".stem.bn", params, buffers);
    for (int stage = 0; stage < 4; ++stage) {
        for (int block = 0; block < 2; ++block) {
            layers[stage][block].collect(prefix + ".layer" + std::to_string(stage + 1) + "." +
                                             std::to_string(block),
                                         params, buffers);
        }
    }
}

template <typename T>
TinyEncoder<T>::TinyEncoder(Rng& rng) : stem(3, 16, 3, 2, rng) {
    const int widths[4] = {16, 32, 64, 128};
    int in_c = 16;
    for (int stage = 0; stage < 4; ++stage) {
        const int out_c = widths[stage];
        stages[stage][0] = ConvBnRelu<T>(in_c, out_c, 3, 2, rng);
        stages[stage][1] = ConvBnRelu<T>(out_c, out_c, 3, 1, rng);
        in_c = out_c;
    }
}

template <typename T>
EncoderFeatures<T> TinyEncoder<T>::forward(const VarPtr<T>& x, bool training) {
    VarPtr<T> h = stem.forward(x, training);

    EncoderFeatures<T> f;
    h = stages[0][1].forward(stages[0][0].forward(h, training), training);
    f.s4 = h;
    h = stages[1][1].forward(stages[1][0].forward(h, training), training);
    f.s8 = h;
    h = stages[2][1].forward(stages[2][0].forward(h, training), training);
    f.s16 = h;
    h = stages[3][1].forward(stages[3][0].forward(h, training), training);
    f.s32 = h;
    return f;
}

template <typename T>
void TinyEncoder<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                             std::vector<BufferEntry<T>>& buffers) {
    stem.collect(prefix + ".stem", params, buffers);
    for (int stage = 0; stage < 4; ++stage) {
        for (int block = 0; block < 2; ++block) {
            stages[stage][block].collect(prefix + ".stage" + std::to_string(stage + 1) + "." +
                                             std::to_string(block),
                                         params, buffers);
        }
    }
}

template class BasicBlock<float>;
template class BasicBlock<double>;
template class ResNet18Encoder<float>;
template class ResNet18Encoder<double>;
template class TinyEncoder<float>;
template class TinyEncoder<double>;

} // namespace palseg::nn
