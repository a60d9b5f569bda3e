#pragma once

#include "palseg/nn/modules.hpp"

namespace palseg::nn {

struct PoolSpec {
    int kernel = 0;
    int stride = 0;
    int padding = 0;
};

/// Cascaded pyramid-pooling head configuration. The default pyramid is
/// average pooling with kernels 5/9/17 (strides 2/4/8) plus a global
/// branch; with the identity branch that makes five branches.
struct EdappConfig {
    int in_channels = 512;
    int branch_channels = 128;
    int out_channels = 256;
    std::vector<PoolSpec> pool_specs = {{5, 2, 2}, {9, 4, 4}, {17, 8, 8}};
    bool include_global = true;

    int branch_count() const {
        return 1 + static_cast<int>(pool_specs.size()) + (include_global ? 1 : 0);
    }
    void validate() const;
};

/// Pyramid head: an identity 1x1 branch, pooled branches blended
/// branch-by-branch with a 3x1/1x3 pair, a global branch closed by a 3x3,
/// then 1x1 blend + 1x1 compress over the concatenation and a 1x1 skip.
/// Batch norm + rectifier precede every convolution; `linear_mode`
/// removes them so the module becomes a pure linear map (test hook).
template <typename T>
class Edapp {
public:
    Edapp() = default;
    Edapp(const EdappConfig& cfg, Rng& rng);

    VarPtr<T> forward(const VarPtr<T>& x, bool training);
    void collect(const std::string& prefix, std::vector<ParamEntry<T>>& params,
                 std::vector<BufferEntry<T>>& buffers);

    const EdappConfig& config() const { return cfg_; }
    void set_linear_mode(bool on) { linear_mode_ = on; }

    struct PooledBranch {
        PoolSpec spec;
        BatchNorm2d<T> scale_bn;
        Conv2d<T> scale_conv;   // 1x1, in -> branch
        BatchNorm2d<T> blend_v_bn;
        Conv2d<T> blend_v_conv; // 3x1, branch -> branch
        BatchNorm2d<T> blend_h_bn;
        Conv2d<T> blend_h_conv; // 1x3, branch -> branch
    };
    struct GlobalBranch {
        BatchNorm2d<T> scale_bn;
        Conv2d<T> scale_conv;   // 1x1, in -> branch
        BatchNorm2d<T> fuse_bn;
        Conv2d<T> fuse_conv;    // 3x3, branch -> branch
    };

    BatchNorm2d<T> identity_bn;
    Conv2d<T> identity_conv;    // 1x1, in -> branch
    std::vector<PooledBranch> pooled;
    GlobalBranch global;
    BatchNorm2d<T> blend_bn;
    Conv2d<T> blend_conv;       // 1x1, n*branch -> 2*branch
    BatchNorm2d<T> compress_bn;
    Conv2d<T> compress_conv;    // 1x1, 2*branch -> out
    BatchNorm2d<T> skip_bn;
    Conv2d<T> skip_conv;        // 1x1, in -> out

private:
    VarPtr<T> preact(const VarPtr<T>& x, BatchNorm2d<T>& bn, bool training);

    EdappConfig cfg_;
    bool linear_mode_ = false;
};

extern template class Edapp<float>;
extern template class Edapp<double>;

} // namespace palseg::nn
