#pragma once

#include "hoivid/nn/module.hpp"

namespace hoivid::nn {

// GroupNorm over [frames, channels, h, w]; statistics per frame per group.
template <typename T>
class GroupNorm {
public:
    GroupNorm() = default;
    GroupNorm(int64_t channels, int64_t groups) : channels_(channels), groups_(groups) {
        if (channels % groups != 0)
            throw std::invalid_argument("groupnorm: channels not divisible by groups");
        gamma.init({channels});
        gamma.value.fill(T(1));
        beta.init({channels});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        const int64_t f = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
        const int64_t cg = c / groups_;
        const int64_t gsize = cg * hw;
        xhat_ = Tensor<T>(x.shape());
        invstd_ = Tensor<T>({f, groups_});
        Tensor<T> y(x.shape());
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t g = 0; g < groups_; ++g) {
                const T* src = x.data() + (fi * c + g * cg) * hw;
                double mean = 0;
                for (int64_t i = 0; i < gsize; ++i) mean += static_cast<double>(src[i]);
                mean /= static_cast<double>(gsize);
                double var = 0;
                for (int64_t i = 0; i < gsize; ++i) {
                    const double d = static_cast<double>(src[i]) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(gsize);
                const T istd = static_cast<T>(1.0 / std::sqrt(var + kEps));
                invstd_.at(fi, g) = istd;
                T* xh = xhat_.data() + (fi * c + g * cg) * hw;
                T* dst = y.data() + (fi * c + g * cg) * hw;
                for (int64_t ci = 0; ci < cg; ++ci) {
                    const T ga = gamma.value[g * cg + ci], be = beta.value[g * cg + ci];
                    for (int64_t i = 0; i < hw; ++i) {
                        const T v = (src[ci * hw + i] - static_cast<T>(mean)) * istd;
                        xh[ci * hw + i] = v;
                        dst[ci * hw + i] = ga * v + be;
                    }
                }
            }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        const int64_t f = grad_out.dim(0), c = grad_out.dim(1);
        const int64_t hw = grad_out.dim(2) * grad_out.dim(3);
        const int64_t cg = c / groups_;
        const int64_t gsize = cg * hw;
        Tensor<T> grad_in(grad_out.shape());
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t g = 0; g < groups_; ++g) {
                const T* go = grad_out.data() + (fi * c + g * cg) * hw;
                const T* xh = xhat_.data() + (fi * c + g * cg) * hw;
                T* gi = grad_in.data() + (fi * c + g * cg) * hw;
                // accumulate param grads and the two reduction terms
                double sum_gxh = 0, sum_g = 0;
                for (int64_t ci = 0; ci < cg; ++ci) {
                    const T ga = gamma.value[g * cg + ci];
                    double dgamma = 0, dbeta = 0;
                    for (int64_t i = 0; i < hw; ++i) {
                        const double gv = static_cast<double>(go[ci * hw + i]);
                        dgamma += gv * static_cast<double>(xh[ci * hw + i]);
                        dbeta += gv;
                        sum_gxh += gv * static_cast<double>(ga) * static_cast<double>(xh[ci * hw + i]);
                        sum_g += gv * static_cast<double>(ga);
                    }
                    gamma.grad[g * cg + ci] += static_cast<T>(dgamma);
                    beta.grad[g * cg + ci] += static_cast<T>(dbeta);
                }
                const double istd = static_cast<double>(invstd_.at(fi, g));
                const double inv_n = 1.0 / static_cast<double>(gsize);
                for (int64_t ci = 0; ci < cg; ++ci) {
                    const double ga = static_cast<double>(gamma.value[g * cg + ci]);
                    for (int64_t i = 0; i < hw; ++i) {
                        const double gv = static_cast<double>(go[ci * hw + i]) * ga;
                        const double xv = static_cast<double>(xh[ci * hw + i]);
                        gi[ci * hw + i] =
                            static_cast<T>(istd * (gv - inv_n * sum_g - xv * inv_n * sum_gxh));
                    }
                }
            }
        return grad_in;
    }

    void params(ParamRefs<T>& refs, const std::string& prefix) {
        add_param(refs, prefix + ".gamma", gamma);
        add_param(refs, prefix + ".beta", beta);
    }

    Param<T> gamma, beta;

private:
    static constexpr double kEps = 1e-5;
    int64_t channels_ = 0, groups_ = 1;
    Tensor<T> xhat_, invstd_;
};

// x * sigmoid(x)
template <typename T>
class SiLU {
public:
    Tensor<T> forward(const Tensor<T>& x) {
        x_cache_ = x;
        Tensor<T> y(x.shape());
        for (int64_t i = 0; i < x.numel(); ++i) {
            const T s = sigmoid(x[i]);
            y[i] = x[i] * s;
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        Tensor<T> grad_in(grad_out.shape());
        for (int64_t i = 0; i < grad_out.numel(); ++i) {
            const T x = x_cache_[i];
            const T s = sigmoid(x);
            grad_in[i] = grad_out[i] * (s + x * s * (T(1) - s));
        }
        return grad_in;
    }

    static T sigmoid(T x) { return T(1) / (T(1) + std::exp(-x)); }

private:
    Tensor<T> x_cache_;
};

template <typename T>
class Sigmoid {
public:
    Tensor<T> forward(const Tensor<T>& x) {
        y_cache_ = Tensor<T>(x.shape());
        for (int64_t i = 0; i < x.numel(); ++i) y_cache_[i] = SiLU<T>::sigmoid(x[i]);
        return y_cache_;
    }
    Tensor<T> backward(const Tensor<T>& grad_out) {
        Tensor<T> grad_in(grad_out.shape());
        for (int64_t i = 0; i < grad_out.numel(); ++i) {
            const T y = y_cache_[i];
            grad_in[i] = grad_out[i] * y * (T(1) - y);
        }
        return grad_in;
    }

private:
    Tensor<T> y_cache_;
};

}  // namespace hoivid::nn
