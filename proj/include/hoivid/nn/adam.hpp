#pragma once

#include "hoivid/nn/module.hpp"

namespace hoivid::nn {

template <typename T>
class Adam {
public:
    Adam() = default;
    explicit Adam(const ParamRefs<T>& refs, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& [name, p] : refs) {
            m_.emplace_back(p->value.shape());
            v_.emplace_back(p->value.shape());
        }
    }

    void step(const ParamRefs<T>& refs, double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (size_t pi = 0; pi < refs.size(); ++pi) {
            auto& p = *refs[pi].second;
            auto& m = m_[pi];
            auto& v = v_[pi];
            for (int64_t i = 0; i < p.value.numel(); ++i) {
                const double g = static_cast<double>(p.grad[i]);
                const double mm = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * g;
                const double vv = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * g * g;
                m[i] = static_cast<T>(mm);
                v[i] = static_cast<T>(vv);
                const double mhat = mm / bc1, vhat = vv / bc2;
                p.value[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    int64_t step_count() const { return t_; }
    void set_step_count(int64_t t) { t_ = t; }
    std::vector<Tensor<T>>& moments_m() { return m_; }
    std::vector<Tensor<T>>& moments_v() { return v_; }

private:
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    int64_t t_ = 0;
    std::vector<Tensor<T>> m_, v_;
};

}  // namespace hoivid::nn
