#include "palseg/nn/autodiff.hpp"

#include <unordered_set>

namespace palseg::nn {

namespace detail {
bool* grad_flag() {
    thread_local bool enabled = true;
    return &enabled;
}
} // namespace detail

bool grad_enabled() { return *detail::grad_flag(); }

NoGradGuard::NoGradGuard() : previous_(*detail::grad_flag()) {
    *detail::grad_flag() = false;
}

NoGradGuard::~NoGradGuard() { *detail::grad_flag() = previous_; }

template <typename T>
void backward(const VarPtr<T>& loss, bool retain_graph) {
    PALSEG_CHECK(loss, "backward on null variable");
    PALSEG_CHECK(loss->value.numel() == 1,
                 "backward expects a scalar loss, got shape ", loss->value.shape_str());

    // Iterative post-order DFS for a topological ordering.
    std::vector<VarNode<T>*> order;
    std::unordered_set<VarNode<T>*> visited;
    std::vector<std::pair<VarNode<T>*, std::size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    visited.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            VarNode<T>* parent = node->parents[next++].get();
            if (visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss->grad_buffer().fill(T(1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        VarNode<T>* node = *it;
        if (node->backward_fn && node->has_grad()) {
            node->backward_fn(*node);
        }
    }

    if (!retain_graph) {
        for (VarNode<T>* node : order) {
            if (node != loss.get() && !node->requires_grad && node->backward_fn) {
                node->grad = Tensor<T>();
            }
            node->backward_fn = nullptr;
            node->parents.clear();
        }
    }
}

template void backward<float>(const VarPtr<float>&, bool);
template void backward<double>(const VarPtr<double>&, bool);

} // namespace palseg::nn
