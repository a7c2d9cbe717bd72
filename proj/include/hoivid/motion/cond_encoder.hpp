#pragma once

#include "hoivid/nn/conv2d.hpp"
#include "hoivid/nn/norm_act.hpp"

namespace hoivid {

// Lightweight nine-layer convolutional condition encoder. Kernel 3 throughout,
// SiLU between layers, strides (2,1,2,1,2,1,1,1,1) to reach the latent grid.
// The depth stream and the pose+hand stream each get their own instance with
// unshared parameters.
template <typename T>
class MotionCondEncoder {
public:
    static constexpr int64_t kLayers = 9;
    static constexpr int64_t kFactor = 8;

    MotionCondEncoder() = default;
    MotionCondEncoder(int64_t in_channels, const std::vector<int64_t>& hidden,
                      int64_t out_channels, bool bias, Rng& rng) {
        if (static_cast<int64_t>(hidden.size()) != kLayers - 1)
            throw std::invalid_argument("cond_encoder: need " + std::to_string(kLayers - 1) +
                                        " hidden channel counts");
        static constexpr int64_t strides[kLayers] = {2, 1, 2, 1, 2, 1, 1, 1, 1};
        int64_t prev = in_channels;
        for (int64_t i = 0; i < kLayers; ++i) {
            const int64_t ch = (i == kLayers - 1) ? out_channels : hidden[static_cast<size_t>(i)];
            convs_[static_cast<size_t>(i)] = nn::Conv2d<T>(prev, ch, strides[i], bias, rng);
            prev = ch;
        }
        // damp the final layer so injection starts gentle
        convs_[kLayers - 1].weight.value *= T(0.1);
        if (bias) convs_[kLayers - 1].bias_p.value.zero();
    }

    // x: [f, c_in, H, W] with H, W divisible by 8 -> [f, c_out, H/8, W/8]
    Tensor<T> forward(const Tensor<T>& x) {
        if (x.dim(2) % kFactor != 0 || x.dim(3) % kFactor != 0)
            throw std::invalid_argument("cond_encoder: resolution " + x.shape_str() +
                                        " not reducible to the latent grid by the stride plan");
        Tensor<T> h = x;
        for (size_t i = 0; i < convs_.size(); ++i) {
            h = convs_[i].forward(h);
            if (i + 1 < convs_.size()) h = acts_[i].forward(h);
        }
        return h;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        Tensor<T> g = grad_out;
        for (size_t i = convs_.size(); i-- > 0;) {
            if (i + 1 < convs_.size()) g = acts_[i].backward(g);
            g = convs_[i].backward(g);
        }
        return g;
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        for (size_t i = 0; i < convs_.size(); ++i)
            convs_[i].params(refs, prefix + ".conv" + std::to_string(i));
    }

    nn::Conv2d<T>& layer(size_t i) { return convs_[i]; }

private:
    std::array<nn::Conv2d<T>, kLayers> convs_;
    std::array<nn::SiLU<T>, kLayers - 1> acts_;
};

}  // namespace hoivid
