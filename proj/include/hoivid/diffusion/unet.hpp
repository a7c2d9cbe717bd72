#pragma once

#include <optional>

#include "hoivid/appearance/adapter.hpp"
#include "hoivid/nn/attention.hpp"
#include "hoivid/nn/conv2d.hpp"
#include "hoivid/nn/norm_act.hpp"

namespace hoivid {

enum class AdapterMode { dual, fused_single };

struct DenoiserConfig {
    int64_t latent_channels = 8;
    int64_t base_channels = 64;
    std::vector<int64_t> channel_mult = {1, 2, 4};
    int64_t gn_groups = 8;
    int64_t temb_dim = 128;
    int64_t human_width = 32;   // f_H feature width
    int64_t object_width = 32;  // f_O feature width
    bool temporal_layers = true;
    AdapterMode adapter_mode = AdapterMode::dual;

    int64_t levels() const { return static_cast<int64_t>(channel_mult.size()); }
};

// All conditioning for one clip, already encoded. Reference latents are repeated
// across frames; motion features match the first-conv output grid. Empty motion
// tensors mean "no injection".
template <typename T>
struct ConditioningBundle {
    Tensor<T> ref_human;           // [f, c_lat, h, w]
    Tensor<T> ref_object;          // [f, c_lat, h, w]
    Tensor<T> f_human;             // [k_h, m_h]
    Tensor<T> f_object;            // [k_o, m_o]
    Tensor<T> motion_depth;        // [f, c1, h, w] or empty
    Tensor<T> motion_posehand;     // [f, c1, h, w] or empty
    bool cfg_dropped = false;      // all condition groups zeroed jointly

    // Unconditional twin: same shapes, all condition content zeroed.
    ConditioningBundle zeroed() const {
        ConditioningBundle out;
        out.ref_human = Tensor<T>(ref_human.shape());
        out.ref_object = Tensor<T>(ref_object.shape());
        out.f_human = Tensor<T>(f_human.shape());
        out.f_object = Tensor<T>(f_object.shape());
        if (!motion_depth.empty()) out.motion_depth = Tensor<T>(motion_depth.shape());
        if (!motion_posehand.empty()) out.motion_posehand = Tensor<T>(motion_posehand.shape());
        out.cfg_dropped = true;
        return out;
    }
};

namespace detail {

// [f, c, h, w] <-> token rows [f*h*w, c]
template <typename T>
Tensor<T> to_tokens(const Tensor<T>& x) {
    const int64_t f = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor<T> tok({f * hw, c});
    for (int64_t fi = 0; fi < f; ++fi)
        for (int64_t ci = 0; ci < c; ++ci) {
            const T* src = x.data() + (fi * c + ci) * hw;
            for (int64_t p = 0; p < hw; ++p) tok[(fi * hw + p) * c + ci] = src[p];
        }
    return tok;
}

template <typename T>
Tensor<T> from_tokens(const Tensor<T>& tok, const std::vector<int64_t>& shape) {
    const int64_t f = shape[0], c = shape[1], hw = shape[2] * shape[3];
    Tensor<T> x(shape);
    for (int64_t fi = 0; fi < f; ++fi)
        for (int64_t ci = 0; ci < c; ++ci) {
            T* dst = x.data() + (fi * c + ci) * hw;
            for (int64_t p = 0; p < hw; ++p) dst[p] = tok[(fi * hw + p) * c + ci];
        }
    return x;
}

}  // namespace detail

// Residual block with timestep conditioning.
template <typename T>
class ResBlock {
public:
    ResBlock() = default;
    ResBlock(int64_t cin, int64_t cout, int64_t temb_dim, int64_t gn_groups, Rng& rng)
        : cin_(cin), cout_(cout) {
        gn1_ = nn::GroupNorm<T>(cin, std::gcd(gn_groups, cin));
        conv1_ = nn::Conv2d<T>(cin, cout, 1, true, rng);
        temb_proj_ = nn::Linear<T>(temb_dim, cout, true, rng);
        gn2_ = nn::GroupNorm<T>(cout, std::gcd(gn_groups, cout));
        conv2_ = nn::Conv2d<T>(cout, cout, 1, true, rng);
        if (cin != cout) skip_ = nn::Conv1x1<T>(cin, cout, false, rng);
    }

    Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& temb) {
        auto h = act1_.forward(gn1_.forward(x));
        h = conv1_.forward(h);
        auto tp = temb_proj_.forward(temb);  // [1, cout]
        const int64_t f = h.dim(0), hw = h.dim(2) * h.dim(3);
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t c = 0; c < cout_; ++c) {
                T* row = h.data() + (fi * cout_ + c) * hw;
                for (int64_t p = 0; p < hw; ++p) row[p] += tp[c];
            }
        h = act2_.forward(gn2_.forward(h));
        h = conv2_.forward(h);
        if (cin_ != cout_) return h + skip_->forward(x);
        return h + x;
    }

    // Returns grad_x; accumulates grad_temb into the provided tensor [1, temb_dim].
    Tensor<T> backward(const Tensor<T>& grad_out, Tensor<T>& grad_temb) {
        auto g = conv2_.backward(grad_out);
        g = gn2_.backward(act2_.backward(g));
        // temb projection gradient: sum over frames and positions
        const int64_t f = g.dim(0), hw = g.dim(2) * g.dim(3);
        Tensor<T> gtp({1, cout_});
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t c = 0; c < cout_; ++c) {
                const T* row = g.data() + (fi * cout_ + c) * hw;
                T acc(0);
                for (int64_t p = 0; p < hw; ++p) acc += row[p];
                gtp[c] += acc;
            }
        grad_temb += temb_proj_.backward(gtp);
        auto gx = gn1_.backward(act1_.backward(conv1_.backward(g)));
        if (cin_ != cout_)
            gx += skip_->backward(grad_out);
        else
            gx += grad_out;
        return gx;
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        gn1_.params(refs, prefix + ".gn1");
        conv1_.params(refs, prefix + ".conv1");
        temb_proj_.params(refs, prefix + ".temb_proj");
        gn2_.params(refs, prefix + ".gn2");
        conv2_.params(refs, prefix + ".conv2");
        if (cin_ != cout_) skip_->params(refs, prefix + ".skip");
    }

private:
    int64_t cin_ = 0, cout_ = 0;
    nn::GroupNorm<T> gn1_, gn2_;
    nn::SiLU<T> act1_, act2_;
    nn::Conv2d<T> conv1_, conv2_;
    nn::Linear<T> temb_proj_;
    std::optional<nn::Conv1x1<T>> skip_;
};

// One cross-attention socket: pre-norm, adapter over spatial tokens, residual.
template <typename T>
class CondSocket {
public:
    CondSocket() = default;
    CondSocket(int64_t channels, const DenoiserConfig& cfg, Rng& rng) : channels_(channels) {
        gn_ = nn::GroupNorm<T>(channels, std::gcd(cfg.gn_groups, channels));
        mode_ = cfg.adapter_mode;
        if (mode_ == AdapterMode::dual)
            dual_ = DualAdapter<T>(channels, cfg.human_width, cfg.object_width, rng);
        else
            fused_ = FusedSingleAdapter<T>(channels, cfg.human_width, rng);
    }

    Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& f_h, const Tensor<T>& f_o) {
        in_shape_ = x.shape();
        auto tok = detail::to_tokens(gn_.forward(x));
        Tensor<T> out = (mode_ == AdapterMode::dual) ? dual_->forward(tok, f_h, f_o)
                                                     : fused_->forward(tok, f_h, f_o);
        return x + detail::from_tokens(out, in_shape_);
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        auto gtok = detail::to_tokens(grad_out);
        Tensor<T> gin_tok = (mode_ == AdapterMode::dual) ? dual_->backward(gtok)
                                                         : fused_->backward(gtok);
        auto gx = gn_.backward(detail::from_tokens(gin_tok, in_shape_));
        gx += grad_out;
        return gx;
    }

    const Tensor<T>& grad_f_h() const { return mode_ == AdapterMode::dual ? dual_->grad_f_h : fused_->grad_f_h; }
    const Tensor<T>& grad_f_o() const { return mode_ == AdapterMode::dual ? dual_->grad_f_o : fused_->grad_f_o; }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        gn_.params(refs, prefix + ".gn");
        if (mode_ == AdapterMode::dual)
            dual_->params(refs, prefix + ".adapter");
        else
            fused_->params(refs, prefix + ".adapter");
    }

    DualAdapter<T>& dual() { return *dual_; }

private:
    int64_t channels_ = 0;
    AdapterMode mode_ = AdapterMode::dual;
    nn::GroupNorm<T> gn_;
    std::optional<DualAdapter<T>> dual_;
    std::optional<FusedSingleAdapter<T>> fused_;
    std::vector<int64_t> in_shape_;
};

template <typename T>
class TemporalBlock {
public:
    TemporalBlock() = default;
    TemporalBlock(int64_t channels, int64_t gn_groups, Rng& rng) {
        gn_ = nn::GroupNorm<T>(channels, std::gcd(gn_groups, channels));
        attn_ = nn::TemporalAttention<T>(channels, rng);
    }

    Tensor<T> forward(const Tensor<T>& x) { return x + attn_.forward(gn_.forward(x)); }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        auto g = gn_.backward(attn_.backward(grad_out));
        g += grad_out;
        return g;
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        gn_.params(refs, prefix + ".gn");
        attn_.params(refs, prefix + ".attn");
    }

private:
    nn::GroupNorm<T> gn_;
    nn::TemporalAttention<T> attn_;
};

// Conditioned video UNet predicting the added noise.
//
// Input is the channel concatenation [Z_t | Z_H | Z_O] per frame; the two motion
// features are added element-wise to the first convolution's output; every block
// (3 down, 1 mid, 3 up at the default config) runs one cross-attention socket.
template <typename T>
class CondUNet {
public:
    CondUNet() = default;
    CondUNet(const DenoiserConfig& cfg, Rng& rng) : cfg_(cfg) {
        if (cfg.levels() < 2) throw std::invalid_argument("unet: need at least 2 levels");
        const int64_t c_in = cfg.latent_channels * 3;
        std::vector<int64_t> ch(static_cast<size_t>(cfg.levels()));
        for (int64_t i = 0; i < cfg.levels(); ++i)
            ch[static_cast<size_t>(i)] = cfg.base_channels * cfg.channel_mult[static_cast<size_t>(i)];

        conv_in_ = nn::Conv2d<T>(c_in, ch[0], 1, true, rng);
        temb_l1_ = nn::Linear<T>(kSinDim, cfg.temb_dim, true, rng);
        temb_l2_ = nn::Linear<T>(cfg.temb_dim, cfg.temb_dim, true, rng);

        int64_t prev = ch[0];
        for (int64_t i = 0; i < cfg.levels(); ++i) {
            const int64_t c = ch[static_cast<size_t>(i)];
            down_res_.emplace_back(prev, c, cfg.temb_dim, cfg.gn_groups, rng);
            down_sock_.emplace_back(c, cfg, rng);
            if (cfg.temporal_layers) down_temp_.emplace_back(c, cfg.gn_groups, rng);
            if (i + 1 < cfg.levels()) down_samp_.emplace_back(c, c, 2, true, rng);
            prev = c;
        }
        mid_res1_ = ResBlock<T>(prev, prev, cfg.temb_dim, cfg.gn_groups, rng);
        mid_sock_ = CondSocket<T>(prev, cfg, rng);
        mid_res2_ = ResBlock<T>(prev, prev, cfg.temb_dim, cfg.gn_groups, rng);

        for (int64_t i = cfg.levels() - 1; i >= 0; --i) {
            const int64_t c = ch[static_cast<size_t>(i)];
            up_res_.emplace_back(prev + c, c, cfg.temb_dim, cfg.gn_groups, rng);
            up_sock_.emplace_back(c, cfg, rng);
            if (cfg.temporal_layers) up_temp_.emplace_back(c, cfg.gn_groups, rng);
            if (i > 0) up_samp_.emplace_back(c, ch[static_cast<size_t>(i - 1)], 1, true, rng);
            prev = (i > 0) ? ch[static_cast<size_t>(i - 1)] : c;
        }
        out_gn_ = nn::GroupNorm<T>(ch[0], std::gcd(cfg.gn_groups, ch[0]));
        out_conv_ = nn::Conv2d<T>(ch[0], cfg.latent_channels, 1, true, rng);
        // start near zero so the initial prediction is small
        out_conv_.weight.value *= T(0.01);
    }

    const DenoiserConfig& config() const { return cfg_; }
    int64_t socket_count() const {
        return static_cast<int64_t>(down_sock_.size() + up_sock_.size()) + 1;
    }

    Tensor<T> forward(const Tensor<T>& zt, const ConditioningBundle<T>& bundle, int64_t timestep) {
        check_inputs(zt, bundle);
        const int64_t f = zt.dim(0), c_lat = zt.dim(1), hw = zt.dim(2) * zt.dim(3);

        Tensor<T> x({f, c_lat * 3, zt.dim(2), zt.dim(3)});
        for (int64_t fi = 0; fi < f; ++fi) {
            std::copy(zt.data() + fi * c_lat * hw, zt.data() + (fi + 1) * c_lat * hw,
                      x.data() + fi * 3 * c_lat * hw);
            std::copy(bundle.ref_human.data() + fi * c_lat * hw,
                      bundle.ref_human.data() + (fi + 1) * c_lat * hw,
                      x.data() + (fi * 3 + 1) * c_lat * hw);
            std::copy(bundle.ref_object.data() + fi * c_lat * hw,
                      bundle.ref_object.data() + (fi + 1) * c_lat * hw,
                      x.data() + (fi * 3 + 2) * c_lat * hw);
        }

        auto h = conv_in_.forward(x);
        if (!bundle.motion_depth.empty()) h += bundle.motion_depth;
        if (!bundle.motion_posehand.empty()) h += bundle.motion_posehand;

        auto temb = timestep_embedding(timestep);
        temb = temb_act_.forward(temb_l1_.forward(temb));
        temb = temb_l2_.forward(temb);
        temb_cache_ = temb;

        skips_.clear();
        for (size_t i = 0; i < down_res_.size(); ++i) {
            h = down_res_[i].forward(h, temb);
            h = down_sock_[i].forward(h, bundle.f_human, bundle.f_object);
            if (cfg_.temporal_layers) h = down_temp_[i].forward(h);
            skips_.push_back(h);
            if (i < down_samp_.size()) h = down_samp_[i].forward(h);
        }
        h = mid_res1_.forward(h, temb);
        h = mid_sock_.forward(h, bundle.f_human, bundle.f_object);
        h = mid_res2_.forward(h, temb);

        for (size_t i = 0; i < up_res_.size(); ++i) {
            const auto& skip = skips_[skips_.size() - 1 - i];
            h = concat_channels(h, skip);
            h = up_res_[i].forward(h, temb);
            h = up_sock_[i].forward(h, bundle.f_human, bundle.f_object);
            if (cfg_.temporal_layers) h = up_temp_[i].forward(h);
            if (i < up_samp_.size()) {
                h = upsample2(h);
                h = up_samp_[i].forward(h);
            }
        }
        h = out_act_.forward(out_gn_.forward(h));
        return out_conv_.forward(h);
    }

    // Backward through the whole net; param grads accumulate. Condition gradients
    // are exposed for the upstream encoders (fusion, motion encoders).
    void backward(const Tensor<T>& grad_eps) {
        Tensor<T> grad_temb({1, cfg_.temb_dim});
        auto g = out_conv_.backward(grad_eps);
        g = out_gn_.backward(out_act_.backward(g));

        std::vector<Tensor<T>> skip_grads(skips_.size());
        grad_f_h_ = Tensor<T>();
        grad_f_o_ = Tensor<T>();
        for (size_t i = up_res_.size(); i-- > 0;) {
            if (i < up_samp_.size()) {
                g = up_samp_[i].backward(g);
                g = downsample2_sum(g);
            }
            if (cfg_.temporal_layers) g = up_temp_[i].backward(g);
            g = up_sock_[i].backward(g);
            accumulate_cond_grads(up_sock_[i]);
            g = up_res_[i].backward(g, grad_temb);
            // split concat [h | skip]
            const size_t skip_idx = skips_.size() - 1 - i;
            auto parts = split_channels(g, skips_[skip_idx].dim(1));
            g = std::move(parts.first);
            skip_grads[skip_idx] = std::move(parts.second);
        }
        g = mid_res2_.backward(g, grad_temb);
        g = mid_sock_.backward(g);
        accumulate_cond_grads(mid_sock_);
        g = mid_res1_.backward(g, grad_temb);

        for (size_t i = down_res_.size(); i-- > 0;) {
            if (i < down_samp_.size()) g = down_samp_[i].backward(g);
            g += skip_grads[i];
            if (cfg_.temporal_layers) g = down_temp_[i].backward(g);
            g = down_sock_[i].backward(g);
            accumulate_cond_grads(down_sock_[i]);
            g = down_res_[i].backward(g, grad_temb);
        }
        grad_motion_ = g;  // gradient at the injection socket
        conv_in_.backward(g);

        auto gt = temb_l2_.backward(grad_temb);
        temb_l1_.backward(temb_act_.backward(gt));
    }

    const Tensor<T>& grad_motion() const { return grad_motion_; }
    const Tensor<T>& grad_f_human() const { return grad_f_h_; }
    const Tensor<T>& grad_f_object() const { return grad_f_o_; }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        conv_in_.params(refs, prefix + ".conv_in");
        temb_l1_.params(refs, prefix + ".temb_l1");
        temb_l2_.params(refs, prefix + ".temb_l2");
        for (size_t i = 0; i < down_res_.size(); ++i) {
            const std::string b = prefix + ".down" + std::to_string(i);
            down_res_[i].params(refs, b + ".res");
            down_sock_[i].params(refs, b + ".sock");
            if (cfg_.temporal_layers) down_temp_[i].params(refs, b + ".temp");
            if (i < down_samp_.size()) down_samp_[i].params(refs, b + ".samp");
        }
        mid_res1_.params(refs, prefix + ".mid.res1");
        mid_sock_.params(refs, prefix + ".mid.sock");
        mid_res2_.params(refs, prefix + ".mid.res2");
        for (size_t i = 0; i < up_res_.size(); ++i) {
            const std::string b = prefix + ".up" + std::to_string(i);
            up_res_[i].params(refs, b + ".res");
            up_sock_[i].params(refs, b + ".sock");
            if (cfg_.temporal_layers) up_temp_[i].params(refs, b + ".temp");
            if (i < up_samp_.size()) up_samp_[i].params(refs, b + ".samp");
        }
        out_gn_.params(refs, prefix + ".out_gn");
        out_conv_.params(refs, prefix + ".out_conv");
    }

    CondSocket<T>& socket(size_t i) {
        if (i < down_sock_.size()) return down_sock_[i];
        if (i == down_sock_.size()) return mid_sock_;
        return up_sock_[i - down_sock_.size() - 1];
    }

private:
    static constexpr int64_t kSinDim = 64;

    void check_inputs(const Tensor<T>& zt, const ConditioningBundle<T>& bundle) const {
        if (zt.ndim() != 4 || zt.dim(1) != cfg_.latent_channels)
            throw std::invalid_argument("denoiser: bad Z_t shape " + zt.shape_str());
        if (!bundle.ref_human.same_shape(zt) || !bundle.ref_object.same_shape(zt))
            throw std::invalid_argument("denoiser: reference latent shape mismatch: Z_t " +
                                        zt.shape_str() + " vs Z_H " + bundle.ref_human.shape_str() +
                                        " / Z_O " + bundle.ref_object.shape_str());
        if (bundle.f_human.ndim() != 2 || bundle.f_human.dim(1) != cfg_.human_width)
            throw std::invalid_argument("denoiser: f_H width mismatch " + bundle.f_human.shape_str());
        if (bundle.f_object.ndim() != 2 || bundle.f_object.dim(1) != cfg_.object_width)
            throw std::invalid_argument("denoiser: f_O width mismatch " + bundle.f_object.shape_str());
        const std::vector<int64_t> inj{zt.dim(0), cfg_.base_channels * cfg_.channel_mult[0],
                                       zt.dim(2), zt.dim(3)};
        for (const auto* mf : {&bundle.motion_depth, &bundle.motion_posehand})
            if (!mf->empty() && mf->shape() != inj)
                throw std::invalid_argument("denoiser: motion feature shape " + mf->shape_str() +
                                            " does not match first-conv grid");
    }

    void accumulate_cond_grads(const CondSocket<T>& sock) {
        if (grad_f_h_.empty())
            grad_f_h_ = sock.grad_f_h();
        else
            grad_f_h_ += sock.grad_f_h();
        if (grad_f_o_.empty())
            grad_f_o_ = sock.grad_f_o();
        else
            grad_f_o_ += sock.grad_f_o();
    }

    Tensor<T> timestep_embedding(int64_t t) const {
        Tensor<T> e({1, kSinDim});
        const int64_t half = kSinDim / 2;
        for (int64_t i = 0; i < half; ++i) {
            const double freq =
                std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
            e[i] = static_cast<T>(std::sin(static_cast<double>(t) * freq));
            e[half + i] = static_cast<T>(std::cos(static_cast<double>(t) * freq));
        }
        return e;
    }

    static Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
        const int64_t f = a.dim(0), hw = a.dim(2) * a.dim(3);
        Tensor<T> out({f, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
        for (int64_t fi = 0; fi < f; ++fi) {
            std::copy(a.data() + fi * a.dim(1) * hw, a.data() + (fi + 1) * a.dim(1) * hw,
                      out.data() + fi * out.dim(1) * hw);
            std::copy(b.data() + fi * b.dim(1) * hw, b.data() + (fi + 1) * b.dim(1) * hw,
                      out.data() + fi * out.dim(1) * hw + a.dim(1) * hw);
        }
        return out;
    }

    static std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& g, int64_t c_second) {
        const int64_t f = g.dim(0), c_first = g.dim(1) - c_second, hw = g.dim(2) * g.dim(3);
        Tensor<T> a({f, c_first, g.dim(2), g.dim(3)}), b({f, c_second, g.dim(2), g.dim(3)});
        for (int64_t fi = 0; fi < f; ++fi) {
            std::copy(g.data() + fi * g.dim(1) * hw, g.data() + fi * g.dim(1) * hw + c_first * hw,
                      a.data() + fi * c_first * hw);
            std::copy(g.data() + fi * g.dim(1) * hw + c_first * hw,
                      g.data() + (fi + 1) * g.dim(1) * hw, b.data() + fi * c_second * hw);
        }
        return {std::move(a), std::move(b)};
    }

    static Tensor<T> upsample2(const Tensor<T>& x) {
        const int64_t f = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        Tensor<T> y({f, c, h * 2, w * 2});
        for (int64_t i = 0; i < f * c; ++i) {
            const T* src = x.data() + i * h * w;
            T* dst = y.data() + i * 4 * h * w;
            for (int64_t yy = 0; yy < h; ++yy)
                for (int64_t xx = 0; xx < w; ++xx) {
                    const T v = src[yy * w + xx];
                    dst[2 * yy * 2 * w + 2 * xx] = v;
                    dst[2 * yy * 2 * w + 2 * xx + 1] = v;
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
            const T* src = g.data() + i * 4 * h * w;
            T* dst = y.data() + i * h * w;
            for (int64_t yy = 0; yy < h; ++yy)
                for (int64_t xx = 0; xx < w; ++xx)
                    dst[yy * w + xx] = src[2 * yy * 2 * w + 2 * xx] +
                                       src[2 * yy * 2 * w + 2 * xx + 1] +
                                       src[(2 * yy + 1) * 2 * w + 2 * xx] +
                                       src[(2 * yy + 1) * 2 * w + 2 * xx + 1];
        }
        return y;
    }

    DenoiserConfig cfg_;
    nn::Conv2d<T> conv_in_, out_conv_;
    nn::Linear<T> temb_l1_, temb_l2_;
    nn::SiLU<T> temb_act_;
    nn::GroupNorm<T> out_gn_;
    nn::SiLU<T> out_act_;
    std::vector<ResBlock<T>> down_res_, up_res_;
    std::vector<CondSocket<T>> down_sock_, up_sock_;
    std::vector<TemporalBlock<T>> down_temp_, up_temp_;
    std::vector<nn::Conv2d<T>> down_samp_, up_samp_;
    ResBlock<T> mid_res1_, mid_res2_;
    CondSocket<T> mid_sock_;
    std::vector<Tensor<T>> skips_;
    Tensor<T> temb_cache_, grad_motion_, grad_f_h_, grad_f_o_;
};

}  // namespace hoivid
