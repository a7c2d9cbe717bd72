#pragma once

#include "hoivid/nn/attention.hpp"
#include "hoivid/nn/module.hpp"

namespace hoivid {

// Human/object dual cross-attention. Two key/value streams attend from the same
// queries; their outputs are summed:
//   HumanCA  = softmax(Q K_H^T / sqrt(d)) V_H
//   ObjectCA = softmax(Q K_O^T / sqrt(d)) V_O
// with Q = X W_Q, K_H = f_H W_KH, V_H = f_H W_VH, K_O = f_O W_KO, V_O = f_O W_VO.
// W_KO and W_VO start at zero so an untrained adapter behaves human-only.
template <typename T>
class DualAdapter {
public:
    DualAdapter() = default;
    DualAdapter(int64_t hidden_width, int64_t human_width, int64_t object_width, Rng& rng)
        : hidden_(hidden_width) {
        wq = nn::Linear<T>(hidden_width, hidden_width, false, rng);
        wkh = nn::Linear<T>(human_width, hidden_width, false, rng);
        wvh = nn::Linear<T>(human_width, hidden_width, false, rng);
        wko = nn::Linear<T>(object_width, hidden_width, false, rng);
        wvo = nn::Linear<T>(object_width, hidden_width, false, rng);
        wko.weight.value.zero();
        wvo.weight.value.zero();
    }

    // hidden: [n, d] query tokens; f_h: [k_h, m_h]; f_o: [k_o, m_o] -> [n, d]
    Tensor<T> forward(const Tensor<T>& hidden, const Tensor<T>& f_h, const Tensor<T>& f_o) {
        if (hidden.dim(1) != hidden_)
            throw std::invalid_argument("dual_adapter: hidden width " + hidden.shape_str() +
                                        " != " + std::to_string(hidden_));
        auto q = wq.forward(hidden);
        auto kh = wkh.forward(f_h);
        auto vh = wvh.forward(f_h);
        auto ko = wko.forward(f_o);
        auto vo = wvo.forward(f_o);
        auto human = human_core_.forward(q, kh, vh);
        auto object = object_core_.forward(q, ko, vo);
        return human + object;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        Tensor<T> dq_h, dkh, dvh, dq_o, dko, dvo;
        human_core_.backward(grad_out, dq_h, dkh, dvh);
        object_core_.backward(grad_out, dq_o, dko, dvo);
        grad_f_h = wkh.backward(dkh);
        grad_f_h += wvh.backward(dvh);
        grad_f_o = wko.backward(dko);
        grad_f_o += wvo.backward(dvo);
        dq_h += dq_o;
        return wq.backward(dq_h);
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        wq.params(refs, prefix + ".wq");
        wkh.params(refs, prefix + ".wkh");
        wvh.params(refs, prefix + ".wvh");
        wko.params(refs, prefix + ".wko");
        wvo.params(refs, prefix + ".wvo");
    }

    const Tensor<T>& human_attn() const { return human_core_.attn_weights(); }
    const Tensor<T>& object_attn() const { return object_core_.attn_weights(); }

    nn::Linear<T> wq, wkh, wvh, wko, wvo;
    // condition gradients from the most recent backward, for the feature encoders
    Tensor<T> grad_f_h, grad_f_o;

private:
    int64_t hidden_ = 0;
    nn::AttentionCore<T> human_core_, object_core_;
};

// Ablation variant: one cross-attention over the row-concatenated [f_H; f_O].
// Requires matching feature widths.
template <typename T>
class FusedSingleAdapter {
public:
    FusedSingleAdapter() = default;
    FusedSingleAdapter(int64_t hidden_width, int64_t feature_width, Rng& rng) : hidden_(hidden_width) {
        wq = nn::Linear<T>(hidden_width, hidden_width, false, rng);
        wk = nn::Linear<T>(feature_width, hidden_width, false, rng);
        wv = nn::Linear<T>(feature_width, hidden_width, false, rng);
    }

    Tensor<T> forward(const Tensor<T>& hidden, const Tensor<T>& f_h, const Tensor<T>& f_o) {
        if (f_h.dim(1) != f_o.dim(1))
            throw std::invalid_argument("fused adapter: feature width mismatch");
        rows_h_ = f_h.dim(0);
        Tensor<T> cat({f_h.dim(0) + f_o.dim(0), f_h.dim(1)});
        std::copy(f_h.data(), f_h.data() + f_h.numel(), cat.data());
        std::copy(f_o.data(), f_o.data() + f_o.numel(), cat.data() + f_h.numel());
        auto q = wq.forward(hidden);
        auto k = wk.forward(cat);
        auto v = wv.forward(cat);
        return core_.forward(q, k, v);
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        Tensor<T> dq, dk, dv;
        core_.backward(grad_out, dq, dk, dv);
        auto dcat = wk.backward(dk);
        dcat += wv.backward(dv);
        const int64_t width = dcat.dim(1);
        grad_f_h = Tensor<T>({rows_h_, width});
        grad_f_o = Tensor<T>({dcat.dim(0) - rows_h_, width});
        std::copy(dcat.data(), dcat.data() + grad_f_h.numel(), grad_f_h.data());
        std::copy(dcat.data() + grad_f_h.numel(), dcat.data() + dcat.numel(), grad_f_o.data());
        return wq.backward(dq);
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        wq.params(refs, prefix + ".wq");
        wk.params(refs, prefix + ".wk");
        wv.params(refs, prefix + ".wv");
    }

    nn::Linear<T> wq, wk, wv;
    Tensor<T> grad_f_h, grad_f_o;

private:
    int64_t hidden_ = 0;
    int64_t rows_h_ = 0;
    nn::AttentionCore<T> core_;
};

}  // namespace hoivid
