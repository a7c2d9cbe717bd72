#pragma once

#include "hoivid/core/blas.hpp"
#include "hoivid/nn/module.hpp"

namespace hoivid::nn {

// y = x * W^T + b over token rows; x: [n, in], y: [n, out], W: [out, in].
template <typename T>
class Linear {
public:
    Linear() = default;
    Linear(int64_t in_features, int64_t out_features, bool bias, Rng& rng)
        : in_(in_features), out_(out_features), has_bias_(bias) {
        weight.init({out_, in_});
        init_kaiming(weight, in_, rng);
        if (has_bias_) bias_p.init({out_});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.dim(x.ndim() - 1) != in_)
            throw std::invalid_argument("linear: input width " + x.shape_str() + " != " +
                                        std::to_string(in_));
        const int64_t n = x.numel() / in_;
        x_cache_ = x;
        Tensor<T> y({n, out_});
        gemm(false, true, n, out_, in_, T(1), x.data(), in_, weight.value.data(), in_, T(0),
             y.data(), out_);
        if (has_bias_)
            for (int64_t r = 0; r < n; ++r)
                for (int64_t c = 0; c < out_; ++c) y.at(r, c) += bias_p.value[c];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        const int64_t n = grad_out.numel() / out_;
        // dW += g^T x
        gemm(true, false, out_, in_, n, T(1), grad_out.data(), out_, x_cache_.data(), in_, T(1),
             weight.grad.data(), in_);
        if (has_bias_)
            for (int64_t r = 0; r < n; ++r)
                for (int64_t c = 0; c < out_; ++c) bias_p.grad[c] += grad_out.at(r, c);
        Tensor<T> grad_in({n, in_});
        gemm(false, false, n, in_, out_, T(1), grad_out.data(), out_, weight.value.data(), in_,
             T(0), grad_in.data(), in_);
        return grad_in;
    }

    void params(ParamRefs<T>& refs, const std::string& prefix) {
        add_param(refs, prefix + ".weight", weight);
        if (has_bias_) add_param(refs, prefix + ".bias", bias_p);
    }

    int64_t in_features() const { return in_; }
    int64_t out_features() const { return out_; }

    Param<T> weight;
    Param<T> bias_p;

private:
    int64_t in_ = 0, out_ = 0;
    bool has_bias_ = false;
    Tensor<T> x_cache_;
};

}  // namespace hoivid::nn
