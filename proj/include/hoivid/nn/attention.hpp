#pragma once

#include "hoivid/core/blas.hpp"
#include "hoivid/nn/linear.hpp"
#include "hoivid/nn/module.hpp"

namespace hoivid::nn {

template <typename T>
void softmax_rows(Tensor<T>& m) {
    const int64_t rows = m.dim(0), cols = m.dim(1);
    for (int64_t r = 0; r < rows; ++r) {
        T* row = m.data() + r * cols;
        T mx = row[0];
        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
        T sum(0);
        for (int64_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (int64_t c = 0; c < cols; ++c) row[c] /= sum;
    }
}

// Single-head scaled dot-product attention with cached activations for backward.
// Q: [n, d], K: [k, d], V: [k, dv] -> O: [n, dv].
template <typename T>
class AttentionCore {
public:
    Tensor<T> forward(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v) {
        const int64_t n = q.dim(0), d = q.dim(1), kk = k.dim(0), dv = v.dim(1);
        if (k.dim(1) != d) throw std::invalid_argument("attention: K width mismatch");
        if (v.dim(0) != kk) throw std::invalid_argument("attention: V row mismatch");
        q_ = q;
        k_ = k;
        v_ = v;
        scale_ = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
        attn_ = Tensor<T>({n, kk});
        gemm(false, true, n, kk, d, scale_, q.data(), d, k.data(), d, T(0), attn_.data(), kk);
        softmax_rows(attn_);
        Tensor<T> out({n, dv});
        gemm(false, false, n, dv, kk, T(1), attn_.data(), kk, v.data(), dv, T(0), out.data(), dv);
        return out;
    }

    // returns (dQ, dK, dV)
    void backward(const Tensor<T>& grad_out, Tensor<T>& dq, Tensor<T>& dk, Tensor<T>& dv) {
        const int64_t n = q_.dim(0), d = q_.dim(1), kk = k_.dim(0), dvw = v_.dim(1);
        // dV = A^T * g
        dv = Tensor<T>({kk, dvw});
        gemm(true, false, kk, dvw, n, T(1), attn_.data(), kk, grad_out.data(), dvw, T(0), dv.data(),
             dvw);
        // dA = g * V^T
        Tensor<T> da({n, kk});
        gemm(false, true, n, kk, dvw, T(1), grad_out.data(), dvw, v_.data(), dvw, T(0), da.data(),
             kk);
        // softmax backward: dS = A .* (dA - rowsum(dA .* A))
        for (int64_t r = 0; r < n; ++r) {
            T* arow = attn_.data() + r * kk;
            T* drow = da.data() + r * kk;
            T dot(0);
            for (int64_t c = 0; c < kk; ++c) dot += arow[c] * drow[c];
            for (int64_t c = 0; c < kk; ++c) drow[c] = arow[c] * (drow[c] - dot);
        }
        // dQ = scale * dS * K; dK = scale * dS^T * Q
        dq = Tensor<T>({n, d});
        gemm(false, false, n, d, kk, scale_, da.data(), kk, k_.data(), d, T(0), dq.data(), d);
        dk = Tensor<T>({kk, d});
        gemm(true, false, kk, d, n, scale_, da.data(), kk, q_.data(), d, T(0), dk.data(), d);
    }

    const Tensor<T>& attn_weights() const { return attn_; }

private:
    Tensor<T> q_, k_, v_, attn_;
    T scale_ = T(1);
};

// Token self-attention: x [n, m] -> x + Wo(core(Wq x, Wk x, Wv x)).
// Inner width keeps the quadratic term affordable at large m.
template <typename T>
class SelfAttention {
public:
    SelfAttention() = default;
    SelfAttention(int64_t width, int64_t inner, bool residual, Rng& rng)
        : width_(width), inner_(inner), residual_(residual) {
        wq = Linear<T>(width, inner, false, rng);
        wk = Linear<T>(width, inner, false, rng);
        wv = Linear<T>(width, inner, false, rng);
        wo = Linear<T>(inner, width, false, rng);
    }

    Tensor<T> forward(const Tensor<T>& x) {
        auto q = wq.forward(x);
        auto k = wk.forward(x);
        auto v = wv.forward(x);
        auto o = core_.forward(q, k, v);
        auto y = wo.forward(o);
        if (residual_) y += x;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        auto dout = wo.backward(grad_out);
        Tensor<T> dq, dk, dv;
        core_.backward(dout, dq, dk, dv);
        auto gx = wq.backward(dq);
        gx += wk.backward(dk);
        gx += wv.backward(dv);
        if (residual_) gx += grad_out;
        return gx;
    }

    void params(ParamRefs<T>& refs, const std::string& prefix) {
        wq.params(refs, prefix + ".wq");
        wk.params(refs, prefix + ".wk");
        wv.params(refs, prefix + ".wv");
        wo.params(refs, prefix + ".wo");
    }

    const Tensor<T>& attn_weights() const { return core_.attn_weights(); }

    Linear<T> wq, wk, wv, wo;

private:
    int64_t width_ = 0, inner_ = 0;
    bool residual_ = true;
    AttentionCore<T> core_;
};

// Self-attention along the frame axis, shared weights across spatial positions.
// x: [f, c, h, w]; output has the same shape (no residual; caller adds it).
template <typename T>
class TemporalAttention {
public:
    TemporalAttention() = default;
    TemporalAttention(int64_t channels, Rng& rng) : channels_(channels) {
        wq = Linear<T>(channels, channels, false, rng);
        wk = Linear<T>(channels, channels, false, rng);
        wv = Linear<T>(channels, channels, false, rng);
        wo = Linear<T>(channels, channels, false, rng);
    }

    Tensor<T> forward(const Tensor<T>& x) {
        const int64_t f = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        const int64_t hw = h * w;
        in_shape_ = x.shape();
        // tokens: [hw, f, c]
        Tensor<T> tok({hw * f, c});
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t ci = 0; ci < c; ++ci) {
                const T* src = x.data() + (fi * c + ci) * hw;
                for (int64_t p = 0; p < hw; ++p) tok[(p * f + fi) * c + ci] = src[p];
            }
        auto q = wq.forward(tok);
        auto k = wk.forward(tok);
        auto v = wv.forward(tok);
        const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(c)));
        q_ = q;
        k_ = k;
        v_ = v;
        attn_ = Tensor<T>({hw, f, f});
        Tensor<T> o({hw * f, c});
        for (int64_t p = 0; p < hw; ++p) {
            const T* qp = q.data() + p * f * c;
            const T* kp = k.data() + p * f * c;
            const T* vp = v.data() + p * f * c;
            T* ap = attn_.data() + p * f * f;
            gemm(false, true, f, f, c, scale, qp, c, kp, c, T(0), ap, f);
            Tensor<T> arows({f, f});
            std::copy(ap, ap + f * f, arows.data());
            softmax_rows(arows);
            std::copy(arows.data(), arows.data() + f * f, ap);
            gemm(false, false, f, c, f, T(1), ap, f, vp, c, T(0), o.data() + p * f * c, c);
        }
        auto y = wo.forward(o);
        // back to [f, c, h, w]
        Tensor<T> out(in_shape_);
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t ci = 0; ci < c; ++ci) {
                T* dst = out.data() + (fi * c + ci) * hw;
                for (int64_t p = 0; p < hw; ++p) dst[p] = y[(p * f + fi) * c + ci];
            }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        const int64_t f = in_shape_[0], c = in_shape_[1];
        const int64_t hw = in_shape_[2] * in_shape_[3];
        Tensor<T> gtok({hw * f, c});
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t ci = 0; ci < c; ++ci) {
                const T* src = grad_out.data() + (fi * c + ci) * hw;
                for (int64_t p = 0; p < hw; ++p) gtok[(p * f + fi) * c + ci] = src[p];
            }
        auto go = wo.backward(gtok);
        const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(c)));
        Tensor<T> dq({hw * f, c}), dk({hw * f, c}), dv({hw * f, c});
        for (int64_t p = 0; p < hw; ++p) {
            const T* gp = go.data() + p * f * c;
            const T* ap = attn_.data() + p * f * f;
            const T* qp = q_.data() + p * f * c;
            const T* kp = k_.data() + p * f * c;
            const T* vp = v_.data() + p * f * c;
            // dV = A^T g
            gemm(true, false, f, c, f, T(1), ap, f, gp, c, T(0), dv.data() + p * f * c, c);
            // dA = g V^T
            Tensor<T> da({f, f});
            gemm(false, true, f, f, c, T(1), gp, c, vp, c, T(0), da.data(), f);
            for (int64_t r = 0; r < f; ++r) {
                const T* arow = ap + r * f;
                T* drow = da.data() + r * f;
                T dot(0);
                for (int64_t j = 0; j < f; ++j) dot += arow[j] * drow[j];
                for (int64_t j = 0; j < f; ++j) drow[j] = arow[j] * (drow[j] - dot);
            }
            gemm(false, false, f, c, f, scale, da.data(), f, kp, c, T(0), dq.data() + p * f * c, c);
            gemm(true, false, f, c, f, scale, da.data(), f, qp, c, T(0), dk.data() + p * f * c, c);
        }
        auto gx_tok = wq.backward(dq);
        gx_tok += wk.backward(dk);
        gx_tok += wv.backward(dv);
        Tensor<T> gx(in_shape_);
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t ci = 0; ci < c; ++ci) {
                T* dst = gx.data() + (fi * c + ci) * hw;
                for (int64_t p = 0; p < hw; ++p) dst[p] = gx_tok[(p * f + fi) * c + ci];
            }
        return gx;
    }

    void params(ParamRefs<T>& refs, const std::string& prefix) {
        wq.params(refs, prefix + ".wq");
        wk.params(refs, prefix + ".wk");
        wv.params(refs, prefix + ".wv");
        wo.params(refs, prefix + ".wo");
    }

    Linear<T> wq, wk, wv, wo;

private:
    int64_t channels_ = 0;
    std::vector<int64_t> in_shape_;
    Tensor<T> q_, k_, v_, attn_;
};

}  // namespace hoivid::nn
