#include "palseg/nn/edapp.hpp"

namespace palseg::nn {

void EdappConfig::validate() const {
    PALSEG_CHECK(in_channels >= 1 && branch_channels >= 1 && out_channels >= 1,
                 "edapp channel widths must be positive");
    for (std::size_t i = 0; i < pool_specs.size(); ++i) {
        const PoolSpec& p = pool_specs[i];
        PALSEG_CHECK(p.kernel % 2 == 1, "edapp pooling kernel must be odd, branch ", i + 2,
                     " has kernel ", p.kernel);
        PALSEG_CHECK(p.kernel >= p.stride && p.stride >= 1,
                     "edapp pooling requires kernel >= stride >= 1, branch ", i + 2, " has ",
                     p.kernel, "/", p.stride);
        PALSEG_CHECK(p.padding >= 0 && p.padding <= p.kernel / 2,
                     "edapp pooling padding out of range on branch ", i + 2);
    }
}

template <typename T>
Edapp<T>::Edapp(const EdappConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    const int in = cfg_.in_channels;
    const int bc = cfg_.branch_channels;

    identity_bn = BatchNorm2d<T>(in);
    identity_conv = Conv2d<T>(in, bc, 1, 1, 1, 0, 0, false, rng);

    for (const PoolSpec& spec : cfg_.pool_specs) {
        PooledBranch b;
        b.spec = spec;
        b.scale_bn = BatchNorm2d<T>(in);
        b.scale_conv = Conv2d<T>(in, bc, 1, 1, 1, 0, 0, false, rng);
        b.blend_v_bn = BatchNorm2d<T>(bc);
        b.blend_v_conv = Conv2d<T>(bc, bc, 3, 1, 1, 1, 0, false, rng);
        b.blend_h_bn = BatchNorm2d<T>(bc);
        b.blend_h_conv = Conv2d<T>(bc, bc, 1, 3, 1, 0, 1, false, rng);
        pooled.push_back(std::move(b));
    }

    if (cfg_.include_global) {
        global.scale_bn = BatchNorm2d<T>(in);
        global.scale_conv = Conv2d<T>(in, bc, 1, 1, 1, 0, 0, false, rng);
        global.fuse_bn = BatchNorm2d<T>(bc);
        global.fuse_conv = Conv2d<T>(bc, bc, 3, 3, 1, 1, 1, false, rng);
    }

    const int n = cfg_.branch_count();
    blend_bn = BatchNorm2d<T>(n * bc);
    blend_conv = Conv2d<T>(n * bc, 2 * bc, 1, 1, 1, 0, 0, false, rng);
    compress_bn = BatchNorm2d<T>(2 * bc);
    compress_conv = Conv2d<T>(2 * bc, cfg_.out_channels, 1, 1, 1, 0, 0, false, rng);
    skip_bn = BatchNorm2d<T>(in);
    skip_conv = Conv2d<T>(in, cfg_.out_channels, 1, 1, 1, 0, 0, false, rng);
}

template <typename T>
VarPtr<T> Edapp<T>::preact(const VarPtr<T>& x, BatchNorm2d<T>& bn, bool training) {
    if (linear_mode_) return x;
    return relu(bn.forward(x, training));
}

template <typename T>
VarPtr<T> Edapp<T>::forward(const VarPtr<T>& x, bool training) {
    PALSEG_CHECK(x && x->value.ndim() == 4, "edapp: input must be NCHW");
    PALSEG_CHECK(x->value.dim(1) == cfg_.in_channels, "edapp: expected ", cfg_.in_channels,
                 " input channels, got ", x->value.dim(1));
    const int H = static_cast<int>(x->value.dim(2));
    const int W = static_cast<int>(x->value.dim(3));

    std::vector<VarPtr<T>> branches;
    VarPtr<T> y = identity_conv.forward(preact(x, identity_bn, training));
    branches.push_back(y);

    const auto pooled_dim = [](int in, const PoolSpec& spec) {
        const int num = in + 2 * spec.padding - spec.kernel;
        return (num >= 0 ? num / spec.stride : -((-num + spec.stride - 1) / spec.stride)) + 1;
    };
    int k = 2;
    for (PooledBranch& b : pooled) {
        const int oh = pooled_dim(H, b.spec);
        const int ow = pooled_dim(W, b.spec);
        PALSEG_CHECK(oh >= 1 && ow >= 1, "edapp: branch ", k, " (kernel ", b.spec.kernel,
                     ", stride ", b.spec.stride, ") collapses a ", H, "x", W,
                     " input below 1x1");
        VarPtr<T> p = avg_pool2d(x, b.spec.kernel, b.spec.stride, b.spec.padding, true);
        VarPtr<T> s = b.scale_conv.forward(preact(p, b.scale_bn, training));
        VarPtr<T> up = upsample_bilinear(s, H, W);
        VarPtr<T> z = add(up, y);
        z = b.blend_v_conv.forward(preact(z, b.blend_v_bn, training));
        y = b.blend_h_conv.forward(preact(z, b.blend_h_bn, training));
        branches.push_back(y);
        ++k;
    }

    if (cfg_.include_global) {
        VarPtr<T> g = global_avg_pool(x);
        VarPtr<T> s = global.scale_conv.forward(preact(g, global.scale_bn, training));
        VarPtr<T> up = upsample_bilinear(s, H, W);
        VarPtr<T> z = add(up, y);
        y = global.fuse_conv.forward(preact(z, global.fuse_bn, training));
        branches.push_back(y);
    }

    VarPtr<T> cat = concat_channels(branches);
    VarPtr<T> blended = blend_conv.forward(preact(cat, blend_bn, training));
    VarPtr<T> compressed = compress_conv.forward(preact(blended, compress_bn, training));
    VarPtr<T> skip = skip_conv.forward(preact(x, skip_bn, training));
    return add(compressed, skip);
}

template <typename T>
void Edapp<T>::collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                       std::vector<BufferEntry<T>>& buffers) {
    identity_bn.collect(prefix + ".branch1.bn", params, buffers);
    identity_conv.collect(prefix + ".branch1.conv", params, buffers);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        const std::string p = prefix + ".branch" + std::to_string(i + 2);
        pooled[i].scale_bn.collect(p + ".scale.bn", params, buffers);
        pooled[i].scale_conv.collect(p + ".scale.conv", params, buffers);
        pooled[i].blend_v_bn.collect(p + ".blend_v.bn", params, buffers);
        pooled[i].blend_v_conv.collect(p + ".blend_v.conv", params, buffers);
        pooled[i].blend_h_bn.collect(p + ".blend_h.bn", params, buffers);
        pooled[i].blend_h_conv.collect(p + ".blend_h.conv", params, buffers);
    }
    if (cfg_.include_global) {
        const std::string p = prefix + ".branch" + std::to_string(cfg_.branch_count());
        global.scale_bn.collect(p + ".scale.bn", params, buffers);
        global.scale_conv.collect(p + ".scale.conv", params, buffers);
        global.fuse_bn.collect(p + ".fuse.bn", params, buffers);
        global.fuse_conv.collect(p + ".fuse.conv", params, buffers);
    }
    blend_bn.collect(prefix + ".blend.bn", params, buffers);
    blend_conv.collect(prefix + ".blend.conv", params, buffers);
    compress_bn.collect(prefix + ".compress.bn", params, buffers);
    compress_conv.collect(prefix + ".compress.conv", params, buffers);
    skip_bn.collect(prefix + ".skip.bn", params, buffers);
    skip_conv.collect(prefix + ".skip.conv", params, buffers);
}

template class Edapp<float>;
template class Edapp<double>;

} // namespace palseg::nn
