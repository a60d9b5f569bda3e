#pragma once

#include <array>
#include <memory>

#include "palseg/nn/modules.hpp"

namespace palseg::nn {

/// Feature maps tapped after each encoder stage; the suffix is the total
/// stride relative to the input.
template <typename T>
struct EncoderFeatures {
    VarPtr<T> s4, s8, s16, s32;
};

template <typename T>
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual EncoderFeatures<T> forward(const VarPtr<T>& x, bool training) = 0;
    /// Channel widths of the four tapped stages, stride 4 first.
    virtual std::array<int, 4> stage_channels() const = 0;
    virtual void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                         std::vector<BufferEntry<T>>& buffers) = 0;
};

/// Two 3x3 convolutions with a residual connection; the classic
/// ResNet basic block. A strided entry downsamples through a projected
/// shortcut.
template <typename T>
class BasicBlock {
public:
    BasicBlock() = default;
    BasicBlock(int in_c, int out_c, int stride, Rng& rng);

    VarPtr<T> forward(const VarPtr<T>& x, bool training);
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers);

    Conv2d<T> conv1;
    BatchNorm2d<T> bn1;
    Conv2d<T> conv2;
    BatchNorm2d<T> bn2;
    bool projected = false;
    Conv2d<T> down_conv;
    BatchNorm2d<T> down_bn;
};

/// ResNet-18 feature extractor: 7x7 stem + max pool, then four stages of
/// two basic blocks with widths 64/128/256/512.
template <typename T>
class ResNet18Encoder : public Encoder<T> {
public:
    explicit ResNet18Encoder(Rng& rng);

    EncoderFeatures<T> forward(const VarPtr<T>& x, bool training) override;
    std::array<int, 4> stage_channels() const override { return {64, 128, 256, 512}; }
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers) override;

    Conv2d<T> stem_conv;
    BatchNorm2d<T> stem_bn;
    std::array<std::array<BasicBlock<T>, 2>, 4> layers;
};

/// Minimal four-stage encoder for fast tests: a stride-2 stem and four
/// stages of two 3x3 conv blocks with stride-2 entries, widths
/// 16/32/64/128.
template <typename T>
class TinyEncoder : public Encoder<T> {
public:
    explicit TinyEncoder(Rng& rng);

    EncoderFeatures<T> forward(const VarPtr<T>& x, bool training) override;
    std::array<int, 4> stage_channels() const override { return {16, 32, 64, 128}; }
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers) override;

    ConvBnRelu<T> stem;
    std::array<std::array<ConvBnRelu<T>, 2>, 4> stages;
};

extern template class BasicBlock<float>;
extern template class BasicBlock<double>;
extern template class ResNet18Encoder<float>;
extern template class ResNet18Encoder<double>;
extern template class TinyEncoder<float>;
extern template class TinyEncoder<double>;

} // namespace palseg::nn
