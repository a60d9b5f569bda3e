#include "palseg/train/adam.hpp"

#include <cmath>

#include "palseg/common/check.hpp"

namespace palseg::train {

template <typename T>
Adam<T>::Adam(std::vector<ParamGroup<T>> groups, double beta1, double beta2, double eps,
              bool decoupled)
    : groups_(std::move(groups)), beta1_(beta1), beta2_(beta2), eps_(eps),
      decoupled_(decoupled) {
    for (const auto& g : groups_) {
        std::vector<nn::Tensor<T>> gm, gv;
        for (const auto& p : g.params) {
            PALSEG_CHECK(p && p->requires_grad, "Adam: every parameter must require grad");
            gm.emplace_back(p->value.shape());
            gv.emplace_back(p->value.shape());
        }
        m_.push_back(std::move(gm));
        v_.push_back(std::move(gv));
    }
}

template <typename T>
void Adam<T>::set_rates(std::size_t group, double lr, double weight_decay) {
    PALSEG_CHECK(group < groups_.size(), "Adam: group index out of range");
    groups_[group].lr = lr;
    groups_[group].weight_decay = weight_decay;
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
        ParamGroup<T>& g = groups_[gi];
        for (std::size_t pi = 0; pi < g.params.size(); ++pi) {
            nn::VarPtr<T>& p = g.params[pi];
            if (!p->has_grad()) continue; // parameter unused this step
            T* theta = p->value.data();
            const T* grad = p->grad.data();
            T* m = m_[gi][pi].data();
            T* v = v_[gi][pi].data();
            const std::int64_t n = p->value.numel();
            const double wd = g.weight_decay;
            for (std::int64_t i = 0; i < n; ++i) {
                double gval = grad[i];
                if (!decoupled_ && wd != 0.0) gval += wd * theta[i];
                const double mi = beta1_ * m[i] + (1.0 - beta1_) * gval;
                const double vi = beta2_ * v[i] + (1.0 - beta2_) * gval * gval;
                m[i] = static_cast<T>(mi);
                v[i] = static_cast<T>(vi);
                const double mhat = mi / bc1;
                const double vhat = vi / bc2;
                double update = g.lr * mhat / (std::sqrt(vhat) + eps_);
                if (decoupled_ && wd != 0.0) update += g.lr * wd * theta[i];
                theta[i] = static_cast<T>(theta[i] - update);
            }
        }
    }
}

template <typename T>
void Adam<T>::zero_grad() {
    for (auto& g : groups_) {
        for (auto& p : g.params) {
            p->grad = nn::Tensor<T>();
        }
    }
}

template class Adam<float>;
template class Adam<double>;

} // namespace palseg::train
