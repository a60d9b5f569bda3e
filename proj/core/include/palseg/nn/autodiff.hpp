#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "palseg/nn/tensor.hpp"

namespace palseg::nn {

/// Node of the dynamically recorded computation graph. Ops allocate a node
/// per result; `backward_fn` reads this node's gradient and accumulates
/// into the parents' gradients.
template <typename T>
struct VarNode {
    Tensor<T> value;
    Tensor<T> grad; // empty until the backward pass reaches this node
    bool requires_grad = false;
    std::vector<std::shared_ptr<VarNode<T>>> parents;
    std::function<void(VarNode<T>&)> backward_fn;
    std::string name;

    bool has_grad() const { return !grad.empty(); }

    /// Lazily sized gradient accumulator.
    Tensor<T>& grad_buffer() {
        if (grad.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

template <typename T>
using VarPtr = std::shared_ptr<VarNode<T>>;

template <typename T>
VarPtr<T> make_var(Tensor<T> value, bool requires_grad = false, std::string name = "") {
    auto node = std::make_shared<VarNode<T>>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    node->name = std::move(name);
    return node;
}

/// Thread-local recording switch; mirrors the usual inference-mode guard.
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

namespace detail {
bool* grad_flag();
}

/// True when the op should record a backward edge for these inputs.
template <typename T>
bool recording(std::initializer_list<const VarPtr<T>*> inputs) {
    if (!grad_enabled()) return false;
    for (const VarPtr<T>* in : inputs) {
        if (*in && (*in)->requires_grad) return true;
    }
    return false;
}

template <typename T>
void accumulate(VarNode<T>& node, const Tensor<T>& g) {
    Tensor<T>& buf = node.grad_buffer();
    PALSEG_CHECK(buf.same_shape(g), "gradient shape mismatch: ", buf.shape_str(),
                 " vs ", g.shape_str());
    T* dst = buf.data();
    const T* src = g.data();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

/// Reverse-mode sweep from a scalar loss. Frees the recorded graph
/// afterwards unless `retain_graph` is set; parameter gradients survive in
/// the leaves.
template <typename T>
void backward(const VarPtr<T>& loss, bool retain_graph = false);

extern template void backward<float>(const VarPtr<float>&, bool);
extern template void backward<double>(const VarPtr<double>&, bool);

} // namespace palseg::nn
