#pragma once

#include "hoivid/core/blas.hpp"
#include "hoivid/nn/module.hpp"

namespace hoivid::nn {

// 3x3 convolution with padding 1 over [frames, channels, h, w], im2col + GEMM per frame.
template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int64_t in_ch, int64_t out_ch, int64_t stride, bool bias, Rng& rng)
        : cin_(in_ch), cout_(out_ch), stride_(stride), has_bias_(bias) {
        weight.init({cout_, cin_, kK, kK});
        init_kaiming(weight, cin_ * kK * kK, rng);
        if (has_bias_) bias_p.init({cout_});
    }

    static int64_t out_dim(int64_t in, int64_t stride) { return (in + 2 * kPad - kK) / stride + 1; }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.ndim() != 4 || x.dim(1) != cin_)
            throw std::invalid_argument("conv2d: expected [f," + std::to_string(cin_) +
                                        ",h,w], got " + x.shape_str());
        const int64_t f = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int64_t ho = out_dim(h, stride_), wo = out_dim(w, stride_);
        const int64_t k = cin_ * kK * kK, positions = ho * wo;

        in_shape_ = {f, cin_, h, w};
        col_cache_ = Tensor<T>({f, k, positions});
        Tensor<T> y({f, cout_, ho, wo});

        for (int64_t fi = 0; fi < f; ++fi) {
            T* col = col_cache_.data() + fi * k * positions;
            im2col(x.data() + fi * cin_ * h * w, h, w, ho, wo, col);
            gemm(false, false, cout_, positions, k, T(1), weight.value.data(), k, col, positions,
                 T(0), y.data() + fi * cout_ * positions, positions);
        }
        if (has_bias_)
            for (int64_t fi = 0; fi < f; ++fi)
                for (int64_t c = 0; c < cout_; ++c) {
                    T* row = y.data() + (fi * cout_ + c) * positions;
                    const T b = bias_p.value[c];
                    for (int64_t p = 0; p < positions; ++p) row[p] += b;
                }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        const int64_t f = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
        const int64_t ho = grad_out.dim(2), wo = grad_out.dim(3);
        const int64_t k = cin_ * kK * kK, positions = ho * wo;

        Tensor<T> grad_in(in_shape_);
        Tensor<T> dcol({k, positions});
        for (int64_t fi = 0; fi < f; ++fi) {
            const T* g = grad_out.data() + fi * cout_ * positions;
            const T* col = col_cache_.data() + fi * k * positions;
            // dW += g * col^T
            gemm(false, true, cout_, k, positions, T(1), g, positions, col, positions, T(1),
                 weight.grad.data(), k);
            // dcol = W^T * g
            gemm(true, false, k, positions, cout_, T(1), weight.value.data(), k, g, positions,
                 T(0), dcol.data(), positions);
            col2im(dcol.data(), h, w, ho, wo, grad_in.data() + fi * cin_ * h * w);
        }
        if (has_bias_)
            for (int64_t fi = 0; fi < f; ++fi)
                for (int64_t c = 0; c < cout_; ++c) {
                    const T* row = grad_out.data() + (fi * cout_ + c) * positions;
                    T acc(0);
                    for (int64_t p = 0; p < positions; ++p) acc += row[p];
                    bias_p.grad[c] += acc;
                }
        return grad_in;
    }

    void params(ParamRefs<T>& refs, const std::string& prefix) {
        add_param(refs, prefix + ".weight", weight);
        if (has_bias_) add_param(refs, prefix + ".bias", bias_p);
    }

    int64_t in_channels() const { return cin_; }
    int64_t out_channels() const { return cout_; }

    Param<T> weight;
    Param<T> bias_p;

private:
    static constexpr int64_t kK = 3;
    static constexpr int64_t kPad = 1;

    void im2col(const T* src, int64_t h, int64_t w, int64_t ho, int64_t wo, T* col) const {
        const int64_t positions = ho * wo;
        for (int64_t c = 0; c < cin_; ++c) {
            const T* plane = src + c * h * w;
            for (int64_t ky = 0; ky < kK; ++ky)
                for (int64_t kx = 0; kx < kK; ++kx) {
                    T* dst = col + ((c * kK + ky) * kK + kx) * positions;
                    for (int64_t oy = 0; oy < ho; ++oy) {
                        const int64_t iy = oy * stride_ + ky - kPad;
                        if (iy < 0 || iy >= h) {
                            for (int64_t ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = T(0);
                            continue;
                        }
                        for (int64_t ox = 0; ox < wo; ++ox) {
                            const int64_t ix = ox * stride_ + kx - kPad;
                            dst[oy * wo + ox] = (ix < 0 || ix >= w) ? T(0) : plane[iy * w + ix];
                        }
                    }
                }
        }
    }

    void col2im(const T* col, int64_t h, int64_t w, int64_t ho, int64_t wo, T* dst) const {
        const int64_t positions = ho * wo;
        for (int64_t c = 0; c < cin_; ++c) {
            T* plane = dst + c * h * w;
            for (int64_t ky = 0; ky < kK; ++ky)
                for (int64_t kx = 0; kx < kK; ++kx) {
                    const T* src = col + ((c * kK + ky) * kK + kx) * positions;
                    for (int64_t oy = 0; oy < ho; ++oy) {
                        const int64_t iy = oy * stride_ + ky - kPad;
                        if (iy < 0 || iy >= h) continue;
                        for (int64_t ox = 0; ox < wo; ++ox) {
                            const int64_t ix = ox * stride_ + kx - kPad;
                            if (ix >= 0 && ix < w) plane[iy * w + ix] += src[oy * wo + ox];
                        }
                    }
                }
        }
    }

    int64_t cin_ = 0, cout_ = 0, stride_ = 1;
    bool has_bias_ = false;
    std::vector<int64_t> in_shape_;
    Tensor<T> col_cache_;
};

// 1x1 convolution (channel mixing) over [f, c, h, w].
template <typename T>
class Conv1x1 {
public:
    Conv1x1() = default;
    Conv1x1(int64_t in_ch, int64_t out_ch, bool bias, Rng& rng)
        : cin_(in_ch), cout_(out_ch), has_bias_(bias) {
        weight.init({cout_, cin_});
        init_kaiming(weight, cin_, rng);
        if (has_bias_) bias_p.init({cout_});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        const int64_t f = x.dim(0), hw = x.dim(2) * x.dim(3);
        x_cache_ = x;
        Tensor<T> y({f, cout_, x.dim(2), x.dim(3)});
        for (int64_t fi = 0; fi < f; ++fi)
            gemm(false, false, cout_, hw, cin_, T(1), weight.value.data(), cin_,
                 x.data() + fi * cin_ * hw, hw, T(0), y.data() + fi * cout_ * hw, hw);
        if (has_bias_)
            for (int64_t fi = 0; fi < f; ++fi)
                for (int64_t c = 0; c < cout_; ++c) {
                    T* row = y.data() + (fi * cout_ + c) * hw;
                    for (int64_t p = 0; p < hw; ++p) row[p] += bias_p.value[c];
                }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        const int64_t f = x_cache_.dim(0), hw = x_cache_.dim(2) * x_cache_.dim(3);
        Tensor<T> grad_in(x_cache_.shape());
        for (int64_t fi = 0; fi < f; ++fi) {
            const T* g = grad_out.data() + fi * cout_ * hw;
            gemm(false, true, cout_, cin_, hw, T(1), g, hw, x_cache_.data() + fi * cin_ * hw, hw,
                 T(1), weight.grad.data(), cin_);
            gemm(true, false, cin_, hw, cout_, T(1), weight.value.data(), cin_, g, hw, T(0),
                 grad_in.data() + fi * cin_ * hw, hw);
        }
        if (has_bias_)
            for (int64_t fi = 0; fi < f; ++fi)
                for (int64_t c = 0; c < cout_; ++c) {
                    const T* row = grad_out.data() + (fi * cout_ + c) * hw;
                    T acc(0);
                    for (int64_t p = 0; p < hw; ++p) acc += row[p];
                    bias_p.grad[c] += acc;
                }
        return grad_in;
    }

    void params(ParamRefs<T>& refs, const std::string& prefix) {
        add_param(refs, prefix + ".weight", weight);
        if (has_bias_) add_param(refs, prefix + ".bias", bias_p);
    }

    Param<T> weight, bias_p;

private:
    int64_t cin_ = 0, cout_ = 0;
    bool has_bias_ = false;
    Tensor<T> x_cache_;
};

}  // namespace hoivid::nn
