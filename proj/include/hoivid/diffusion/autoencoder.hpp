#pragma once

#include "hoivid/core/image.hpp"
#include "hoivid/nn/conv2d.hpp"
#include "hoivid/nn/norm_act.hpp"

namespace hoivid {

// Frame autoencoder with spatial factor 8. Fully convolutional, so one model
// serves every training resolution. Decoder output is sigmoid-bounded to [0,1].
template <typename T>
class FrameAutoencoder {
public:
    static constexpr int64_t kFactor = 8;

    FrameAutoencoder() = default;
    FrameAutoencoder(int64_t latent_channels, int64_t base_channels, Rng& rng)
        : latent_channels_(latent_channels), base_(base_channels) {
        const int64_t c1 = base_, c2 = base_ * 3 / 2, c3 = base_ * 2;
        enc_ = {nn::Conv2d<T>(3, c1, 1, true, rng),  nn::Conv2d<T>(c1, c2, 2, true, rng),
                nn::Conv2d<T>(c2, c3, 2, true, rng), nn::Conv2d<T>(c3, c3, 2, true, rng),
                nn::Conv2d<T>(c3, latent_channels_, 1, true, rng)};
        dec_ = {nn::Conv2d<T>(latent_channels_, c3, 1, true, rng),
                nn::Conv2d<T>(c3, c3, 1, true, rng),
                nn::Conv2d<T>(c3, c2, 1, true, rng),
                nn::Conv2d<T>(c2, c1, 1, true, rng),
                nn::Conv2d<T>(c1, 3, 1, true, rng)};
    }

    int64_t latent_channels() const { return latent_channels_; }

    // frames: [f, 3, H, W] with H, W divisible by 8 -> [f, c, H/8, W/8]
    Tensor<T> encode(const Tensor<T>& frames) {
        if (frames.ndim() != 4 || frames.dim(1) != 3)
            throw std::invalid_argument("autoencoder: expected [f,3,H,W], got " +
                                        frames.shape_str());
        if (frames.dim(2) % kFactor != 0 || frames.dim(3) % kFactor != 0)
            throw std::invalid_argument("autoencoder: dims " + frames.shape_str() +
                                        " not divisible by factor " + std::to_string(kFactor));
        Tensor<T> x = frames;
        for (size_t i = 0; i < enc_.size(); ++i) {
            x = enc_[i].forward(x);
            if (i + 1 < enc_.size()) x = enc_act_[i].forward(x);
        }
        return x;
    }

    Tensor<T> encode_backward(const Tensor<T>& grad_latent) {
        Tensor<T> g = grad_latent;
        for (size_t i = enc_.size(); i-- > 0;) {
            if (i + 1 < enc_.size()) g = enc_act_[i].backward(g);
            g = enc_[i].backward(g);
        }
        return g;
    }

    // latents: [f, c, h, w] -> frames [f, 3, 8h, 8w] in [0,1]
    Tensor<T> decode(const Tensor<T>& latents) {
        if (latents.ndim() != 4 || latents.dim(1) != latent_channels_)
            throw std::invalid_argument("autoencoder: expected [f," +
                                        std::to_string(latent_channels_) + ",h,w], got " +
                                        latents.shape_str());
        Tensor<T> x = latents;
        for (size_t i = 0; i < dec_.size(); ++i) {
            if (i >= 1 && i <= 3) x = upsample2(x);
            x = dec_[i].forward(x);
            if (i + 1 < dec_.size()) x = dec_act_[i].forward(x);
        }
        return out_act_.forward(x);
    }

    Tensor<T> decode_backward(const Tensor<T>& grad_frames) {
        Tensor<T> g = out_act_.backward(grad_frames);
        for (size_t i = dec_.size(); i-- > 0;) {
            if (i + 1 < dec_.size()) g = dec_act_[i].backward(g);
            g = dec_[i].backward(g);
            if (i >= 1 && i <= 3) g = downsample2_sum(g);
        }
        return g;
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        for (size_t i = 0; i < enc_.size(); ++i)
            enc_[i].params(refs, prefix + ".enc" + std::to_string(i));
        for (size_t i = 0; i < dec_.size(); ++i)
            dec_[i].params(refs, prefix + ".dec" + std::to_string(i));
    }

private:
    static Tensor<T> upsample2(const Tensor<T>& x) {
        const int64_t f = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        Tensor<T> y({f, c, h * 2, w * 2});
        for (int64_t i = 0; i < f * c; ++i) {
            const T* src = x.data() + i * h * w;
            T* dst = y.data() + i * h * w * 4;
            for (int64_t yy = 0; yy < h; ++yy)
                for (int64_t xx = 0; xx < w; ++xx) {
                    const T v = src[yy * w + xx];
                    dst[(2 * yy) * 2 * w + 2 * xx] = v;
                    dst[(2 * yy) * 2 * w + 2 * xx + 1] = v;
                    dst[(2 * yy + 1) * 2 * w + 2 * xx] = v;
                    dst[(2 * yy + 1) * 2 * w + 2 * xx + 1] = v;
                }
        }
        return y;
    }

    static Tensor<T> downsample2_sum(const Tensor<T>& g) {
        const int64_t f = g.dim(0), c = g.dim(1), h = g.dim(2) / 2, w = g.dim(3) / 2;
        Tensor<T> y({f, c, h, w});
        for (int64_t i = 0; i < f * c; ++i) {
            const T* src = g.data() + i * h * w * 4;
            T* dst = y.data() + i * h * w;
            for (int64_t yy = 0; yy < h; ++yy)
                for (int64_t xx = 0; xx < w; ++xx)
                    dst[yy * w + xx] = src[(2 * yy) * 2 * w + 2 * xx] +
                                       src[(2 * yy) * 2 * w + 2 * xx + 1] +
                                       src[(2 * yy + 1) * 2 * w + 2 * xx] +
                                       src[(2 * yy + 1) * 2 * w + 2 * xx + 1];
        }
        return y;
    }

    int64_t latent_channels_ = 8, base_ = 32;
    std::array<nn::Conv2d<T>, 5> enc_;
    std::array<nn::Conv2d<T>, 5> dec_;
    std::array<nn::SiLU<T>, 4> enc_act_;
    std::array<nn::SiLU<T>, 4> dec_act_;
    nn::Sigmoid<T> out_act_;
};

}  // namespace hoivid
