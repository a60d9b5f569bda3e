#include "palseg/nn/segnet.hpp"

#include <json.hpp>

#include "palseg/common/hash.hpp"
#include "palseg/nn/checkpoint.hpp"

namespace palseg::nn {

const char* to_string(EncoderVariant v) {
    switch (v) {
        case EncoderVariant::resnet18: return "resnet18";
        case EncoderVariant::tiny_test: return "tiny-test";
    }
    return "unknown";
}

EncoderVariant encoder_variant_from_string(const std::string& s) {
    if (s == "resnet18") return EncoderVariant::resnet18;
    if (s == "tiny-test" || s == "tiny_test") return EncoderVariant::tiny_test;
    PALSEG_FAIL("unknown encoder variant '", s, "' (expected resnet18 or tiny-test)");
}

void ModelConfig::validate() const {
    PALSEG_CHECK(num_classes >= 2, "num_classes must be >= 2, got ", num_classes);
    PALSEG_CHECK(decoder_channels >= 8, "decoder_channels must be >= 8, got ",
                 decoder_channels);
    PALSEG_CHECK(edapp.out_channels == decoder_channels,
                 "edapp.out_channels (", edapp.out_channels,
                 ") must equal decoder_channels (", decoder_channels, ")");
    edapp.validate();
}

ModelConfig ModelConfig::resnet18_default(int num_classes) {
    ModelConfig cfg;
    cfg.num_classes = num_classes;
    cfg.encoder = EncoderVariant::resnet18;
    cfg.decoder_channels = 256;
    cfg.edapp.in_channels = 512;
    cfg.edapp.branch_channels = 128;
    cfg.edapp.out_channels = 256;
    return cfg;
}

ModelConfig ModelConfig::tiny_test(int num_classes) {
    ModelConfig cfg;
    cfg.num_classes = num_classes;
    cfg.encoder = EncoderVariant::tiny_test;
    cfg.decoder_channels = 32;
    cfg.edapp.in_channels = 128;
    cfg.edapp.branch_channels = 16;
    cfg.edapp.out_channels = 32;
    return cfg;
}

namespace {

nlohmann::json edapp_to_json(const EdappConfig& e) {
    nlohmann::json specs = nlohmann::json::array();
    for (const PoolSpec& p : e.pool_specs) {
        specs.push_back({p.kernel, p.stride, p.padding});
    }
    return {{"in_channels", e.in_channels},
            {"branch_channels", e.branch_channels},
            {"out_channels", e.out_channels},
            {"include_global", e.include_global},
            {"pool_specs", specs}};
}

EdappConfig edapp_from_json(const nlohmann::json& j) {
    EdappConfig e;
    e.in_channels = j.value("in_channels", e.in_channels);
    e.branch_channels = j.value("branch_channels", e.branch_channels);
    e.out_channels = j.value("out_channels", e.out_channels);
    e.include_global = j.value("include_global", e.include_global);
    if (j.contains("pool_specs")) {
        e.pool_specs.clear();
        for (const auto& s : j.at("pool_specs")) {
            PALSEG_CHECK(s.is_array() && s.size() == 3,
                         "edapp pool spec must be [kernel, stride, padding]");
            e.pool_specs.push_back({s[0].get<int>(), s[1].get<int>(), s[2].get<int>()});
        }
    }
    return e;
}

nlohmann::json model_to_json(const ModelConfig& cfg, bool include_pretrained) {
    nlohmann::json j = {{"num_classes", cfg.num_classes},
                        {"decoder_channels", cfg.decoder_channels},
                        {"encoder", to_string(cfg.encoder)},
                        {"edapp", edapp_to_json(cfg.edapp)}};
    if (include_pretrained) j["pretrained_encoder"] = cfg.pretrained_encoder;
    return j;
}

} // namespace

std::string model_config_to_json_text(const ModelConfig& cfg) {
    return model_to_json(cfg, true).dump(2);
}

ModelConfig model_config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        PALSEG_FAIL("model config JSON parse error: ", e.what());
    }
    ModelConfig cfg;
    cfg.num_classes = j.value("num_classes", cfg.num_classes);
    cfg.decoder_channels = j.value("decoder_channels", cfg.decoder_channels);
    if (j.contains("encoder")) {
        cfg.encoder = encoder_variant_from_string(j.at("encoder").get<std::string>());
    }
    if (j.contains("edapp")) cfg.edapp = edapp_from_json(j.at("edapp"));
    cfg.pretrained_encoder = j.value("pretrained_encoder", "");
    cfg.validate();
    return cfg;
}

std::string model_config_hash(const ModelConfig& cfg) {
    return hex64(fnv1a64(model_to_json(cfg, false).dump()));
}

template <typename T>
DecoderBlock<T>::DecoderBlock(int channels, bool upsample_out_, Rng& rng)
    : conv(channels, channels, 3, 3, 1, 1, 1, false, rng),
      bn(channels),
      upsample_out(upsample_out_) {}

template <typename T>
VarPtr<T> DecoderBlock<T>::forward(const VarPtr<T>& deep, const VarPtr<T>& lateral,
                                   bool training) {
    PALSEG_CHECK(deep && lateral, "decoder block: null input");
    PALSEG_CHECK(deep->value.same_shape(lateral->value),
                 "decoder block: deep ", deep->value.shape_str(), " and lateral ",
                 lateral->value.shape_str(), " must share shape");
    VarPtr<T> h = relu(bn.forward(conv.forward(add(deep, lateral)), training));
    if (!upsample_out) return h;
    return upsample_bilinear(h, static_cast<int>(h->value.dim(2)) * 2,
                             static_cast<int>(h->value.dim(3)) * 2);
}

template <typename T>
void DecoderBlock<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                              std::vector<BufferEntry<T>>& buffers) {
    conv.collect(prefix + ".conv", params, buffers);
    bn.collect(prefix + ".bn", params, buffers);
}

template <typename T>
SegNet<T>::SegNet(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);

    std::array<int, 4> stage_ch{};
    if (cfg_.encoder == EncoderVariant::resnet18) {
        auto enc = std::make_unique<ResNet18Encoder<T>>(rng);
        stage_ch = enc->stage_channels();
        encoder_ = std::move(enc);
    } else {
        auto enc = std::make_unique<TinyEncoder<T>>(rng);
        stage_ch = enc->stage_channels();
        encoder_ = std::move(enc);
    }
    PALSEG_CHECK(cfg_.edapp.in_channels == stage_ch[3],
                 "edapp.in_channels (", cfg_.edapp.in_channels,
                 ") must match the encoder's stride-32 width (", stage_ch[3], ")");

    const int dc = cfg_.decoder_channels;
    lateral4 = Conv2d<T>(stage_ch[0], dc, 1, 1, 1, 0, 0, false, rng);
    lateral8 = Conv2d<T>(stage_ch[1], dc, 1, 1, 1, 0, 0, false, rng);
    lateral16 = Conv2d<T>(stage_ch[2], dc, 1, 1, 1, 0, 0, false, rng);
    edapp_ = Edapp<T>(cfg_.edapp, rng);
    step16 = DecoderBlock<T>(dc, true, rng);
    step8 = DecoderBlock<T>(dc, true, rng);
    fuse4 = DecoderBlock<T>(dc, false, rng);
    classifier = Conv2d<T>(dc, cfg_.num_classes, 1, 1, 1, 0, 0, true, rng);

    encoder_->collect("encoder", params_, buffers_);
    lateral16.collect("lateral16", params_, buffers_);
    lateral8.collect("lateral8", params_, buffers_);
    lateral4.collect("lateral4", params_, buffers_);
    edapp_.collect("edapp", params_, buffers_);
    step16.collect("decoder.step16", params_, buffers_);
    step8.collect("decoder.step8", params_, buffers_);
    fuse4.collect("decoder.fuse4", params_, buffers_);
    classifier.collect("classifier", params_, buffers_);
    for (auto& entry : params_) {
        entry.param->name = entry.path;
    }
}

template <typename T>
VarPtr<T> SegNet<T>::lateral_project(int stride, const VarPtr<T>& stage_feature) const {
    switch (stride) {
        case 16: return lateral16.forward(stage_feature);
        case 8: return lateral8.forward(stage_feature);
        case 4: return lateral4.forward(stage_feature);
        default: PALSEG_FAIL("no lateral projection registered for stride ", stride);
    }
}

template <typename T>
VarPtr<T> SegNet<T>::forward(const VarPtr<T>& image, bool training) {
    PALSEG_CHECK(image && image->value.ndim() == 4, "forward: image must be NCHW");
    PALSEG_CHECK(image->value.dim(1) == 3, "forward: expected 3 input channels, got ",
                 image->value.dim(1));
    const int H = static_cast<int>(image->value.dim(2));
    const int W = static_cast<int>(image->value.dim(3));
    PALSEG_CHECK(H % 32 == 0 && W % 32 == 0, "forward: input ", H, "x", W,
                 " is not divisible by 32; pad the image to a multiple of 32 first");

    EncoderFeatures<T> f = encoder_->forward(image, training);
    VarPtr<T> d = edapp_.forward(f.s32, training);
    d = upsample_bilinear(d, H / 16, W / 16);
    d = step16.forward(d, lateral16.forward(f.s16), training);
    d = step8.forward(d, lateral8.forward(f.s8), training);
    d = fuse4.forward(d, lateral4.forward(f.s4), training);
    VarPtr<T> logits = classifier.forward(d);
    return upsample_bilinear(logits, H, W);
}

template <typename T>
typename SegNet<T>::ParamGroups SegNet<T>::param_groups() const {
    ParamGroups g;
    for (const auto& entry : params_) {
        if (entry.path.rfind("encoder.", 0) == 0) {
            g.encoder.push_back(entry);
        } else {
            g.head.push_back(entry);
        }
    }
    return g;
}

template <typename T>
std::unique_ptr<SegNet<T>> build_model(const ModelConfig& cfg, std::uint64_t seed) {
    auto model = std::make_unique<SegNet<T>>(cfg, seed);
    if (!cfg.pretrained_encoder.empty()) {
        load_pretrained_encoder(*model, cfg.pretrained_encoder);
    }
    return model;
}

template class DecoderBlock<float>;
template class DecoderBlock<double>;
template class SegNet<float>;
template class SegNet<double>;
template std::unique_ptr<SegNet<float>> build_model<float>(const ModelConfig&, std::uint64_t);
template std::unique_ptr<SegNet<double>> build_model<double>(const ModelConfig&, std::uint64_t);

} // namespace palseg::nn
