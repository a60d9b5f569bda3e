#pragma once

#include <vector>

#include "palseg/nn/autodiff.hpp"

namespace palseg::train {

/// One optimizer group: parameters sharing a learning rate and weight
/// decay (the rates change every epoch under the cosine schedule).
template <typename T>
struct ParamGroup {
    std::vector<nn::VarPtr<T>> params;
    double lr = 1e-3;
    double weight_decay = 0.0;
};

/// Adam with bias correction. Weight decay is loss-coupled L2 by default
/// (added to the gradient); `decoupled` switches to the decoupled rule.
template <typename T>
class Adam {
public:
    Adam(std::vector<ParamGroup<T>> groups, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8, bool decoupled = false);

    void set_rates(std::size_t group, double lr, double weight_decay);
    void step();
    void zero_grad();
    std::int64_t steps_taken() const { return t_; }

    std::vector<ParamGroup<T>>& groups() { return groups_; }

private:
    std::vector<ParamGroup<T>> groups_;
    std::vector<std::vector<nn::Tensor<T>>> m_, v_;
    double beta1_, beta2_, eps_;
    bool decoupled_;
    std::int64_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

} // namespace palseg::train
