#pragma once

#include <memory>

#include "palseg/nn/edapp.hpp"
#include "palseg/nn/encoders.hpp"

namespace palseg::nn {

enum class EncoderVariant { resnet18, tiny_test };

const char* to_string(EncoderVariant v);
EncoderVariant encoder_variant_from_string(const std::string& s);

struct ModelConfig {
    int num_classes = 3;
    int decoder_channels = 256;
    EncoderVariant encoder = EncoderVariant::resnet18;
    EdappConfig edapp;                // out_channels must match decoder_channels
    std::string pretrained_encoder;   // optional weight container for the encoder

    void validate() const;

    /// ResNet-18 encoder with the default pyramid widths.
    static ModelConfig resnet18_default(int num_classes = 3);
    /// Small widths throughout; exists to make gradient and overfit tests fast.
    static ModelConfig tiny_test(int num_classes = 3);
};

std::string model_config_to_json_text(const ModelConfig& cfg);
ModelConfig model_config_from_json_text(const std::string& text);
/// Hash over the architecture fields (the pretrained path is provenance,
/// not architecture).
std::string model_config_hash(const ModelConfig& cfg);

/// Fusion block of the decoder: element-wise addition of the deep and
/// lateral paths, a 3x3 conv-bn-relu, and (for the stride-16/8 steps) a
/// x2 bilinear upsample.
template <typename T>
class DecoderBlock {
public:
    DecoderBlock() = default;
    DecoderBlock(int channels, bool upsample_out, Rng& rng);

    VarPtr<T> forward(const VarPtr<T>& deep, const VarPtr<T>& lateral, bool training);
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers);

    Conv2d<T> conv;
    BatchNorm2d<T> bn;
    bool upsample_out = true;
};

/// Encoder-decoder segmentation network: four-stage encoder, pyramid
/// pooling bottleneck at stride 32, lateral 1x1 projections fused at
/// strides 16/8/4, and a 1x1 classifier at stride 4 followed by a x4
/// bilinear upsample to full resolution.
template <typename T>
class SegNet {
public:
    SegNet(const ModelConfig& cfg, std::uint64_t seed);

    /// image [N,3,H,W] with H, W divisible by 32 -> logits [N,K,H,W].
    VarPtr<T> forward(const VarPtr<T>& image, bool training);

    /// 1x1 projection of a registered encoder stage (stride 16, 8 or 4).
    VarPtr<T> lateral_project(int stride, const VarPtr<T>& stage_feature) const;

    const ModelConfig& config() const { return cfg_; }
    Encoder<T>& encoder() { return *encoder_; }
    Edapp<T>& edapp() { return edapp_; }

    const std::vector<ParamEntry<T>>& parameters() const { return params_; }
    const std::vector<BufferEntry<T>>& buffers() const { return buffers_; }

    struct ParamGroups {
        std::vector<ParamEntry<T>> encoder; // pretrained-eligible backbone weights
        std::vector<ParamEntry<T>> head;    // everything else
    };
    ParamGroups param_groups() const;

    Conv2d<T> lateral16, lateral8, lateral4;
    DecoderBlock<T> step16, step8; // fuse + x2 upsample
    DecoderBlock<T> fuse4;         // final fusion at stride 4, no upsample
    Conv2d<T> classifier;

private:
    ModelConfig cfg_;
    std::unique_ptr<Encoder<T>> encoder_;
    Edapp<T> edapp_;
    std::vector<ParamEntry<T>> params_;
    std::vector<BufferEntry<T>> buffers_;
};

/// Constructs the network and, when the config names a pretrained
/// encoder file, loads those weights over the random init.
template <typename T>
std::unique_ptr<SegNet<T>> build_model(const ModelConfig& cfg, std::uint64_t seed);

extern template class DecoderBlock<float>;
extern template class DecoderBlock<double>;
extern template class SegNet<float>;
extern template class SegNet<double>;
extern template std::unique_ptr<SegNet<float>> build_model<float>(const ModelConfig&,
                                                                  std::uint64_t);
extern template std::unique_ptr<SegNet<double>> build_model<double>(const ModelConfig&,
                                                                    std::uint64_t);

} // namespace palseg::nn
