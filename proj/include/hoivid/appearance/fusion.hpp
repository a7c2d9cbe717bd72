#pragma once

#include "hoivid/nn/attention.hpp"

namespace hoivid {

// Token-axis mixing: out [rows_out, m] = W [rows_out, rows_in] * x [rows_in, m].
template <typename T>
class TokenMix {
public:
    TokenMix() = default;
    TokenMix(int64_t rows_in, int64_t rows_out, Rng& rng) : in_(rows_in), out_(rows_out) {
        weight.init({out_, in_});
        nn::init_kaiming(weight, in_, rng);
    }

    Tensor<T> forward(const Tensor<T>& x) {
        x_cache_ = x;
        Tensor<T> y({out_, x.dim(1)});
        gemm(false, false, out_, x.dim(1), in_, T(1), weight.value.data(), in_, x.data(), x.dim(1),
             T(0), y.data(), x.dim(1));
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        const int64_t m = x_cache_.dim(1);
        gemm(false, true, out_, in_, m, T(1), grad_out.data(), m, x_cache_.data(), m, T(1),
             weight.grad.data(), in_);
        Tensor<T> grad_in({in_, m});
        gemm(true, false, in_, m, out_, T(1), weight.value.data(), in_, grad_out.data(), m, T(0),
             grad_in.data(), m);
        return grad_in;
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        add_param(refs, prefix + ".weight", weight);
    }

    Param<T> weight;

private:
    int64_t in_ = 0, out_ = 0;
};

struct FusionConfig {
    int64_t tokens_per_view = 10;  // n
    int64_t width = 32;            // m
    int64_t views = 3;
    int64_t detail_rows = 16;
    int64_t attn_inner = 32;       // inner attention width, capped for large m
};

// Multi-view object feature fusion. Two branches:
//   A: concat the view embeddings along the token axis (views*n x m), one
//      self-attention layer across views, slice the front view's n rows, a
//      second self-attention layer, then a learned token-axis projection
//      n -> detail_rows.
//   B: the views' global tokens (views x m) through a shared linear map.
// Output rows: [A; B] = detail_rows + views (19 x m at the default 16 + 3).
template <typename T>
class MultiViewFusion {
public:
    MultiViewFusion() = default;
    MultiViewFusion(const FusionConfig& cfg, Rng& rng, bool detail_branch_enabled = true)
        : cfg_(cfg), detail_enabled_(detail_branch_enabled) {
        if (detail_enabled_) {
            attn_views_ = nn::SelfAttention<T>(cfg.width, cfg.attn_inner, true, rng);
            attn_front_ = nn::SelfAttention<T>(cfg.width, cfg.attn_inner, true, rng);
            project_ = TokenMix<T>(cfg.tokens_per_view, cfg.detail_rows, rng);
        }
        global_linear_ = nn::Linear<T>(cfg.width, cfg.width, false, rng);
    }

    const FusionConfig& config() const { return cfg_; }
    int64_t output_rows() const { return (detail_enabled_ ? cfg_.detail_rows : 0) + cfg_.views; }

    Tensor<T> forward(const std::vector<Tensor<T>>& view_embeddings) {
        if (static_cast<int64_t>(view_embeddings.size()) != cfg_.views)
            throw std::invalid_argument("fuse_multiview: expected " + std::to_string(cfg_.views) +
                                        " views, got " + std::to_string(view_embeddings.size()));
        const int64_t n = cfg_.tokens_per_view, m = cfg_.width;
        for (const auto& e : view_embeddings)
            if (e.ndim() != 2 || e.dim(0) != n || e.dim(1) != m)
                throw std::invalid_argument("fuse_multiview: view embedding shape " +
                                            e.shape_str() + " != [" + std::to_string(n) + "," +
                                            std::to_string(m) + "]");

        Tensor<T> out({output_rows(), m});
        if (detail_enabled_) {
            Tensor<T> cat({cfg_.views * n, m});
            for (int64_t v = 0; v < cfg_.views; ++v)
                std::copy(view_embeddings[static_cast<size_t>(v)].data(),
                          view_embeddings[static_cast<size_t>(v)].data() + n * m,
                          cat.data() + v * n * m);
            auto mixed = attn_views_.forward(cat);
            // front view occupies rows [n, 2n)
            Tensor<T> front({n, m});
            std::copy(mixed.data() + n * m, mixed.data() + 2 * n * m, front.data());
            auto refined = attn_front_.forward(front);
            auto detail = project_.forward(refined);
            std::copy(detail.data(), detail.data() + cfg_.detail_rows * m, out.data());
        }
        // global branch: token 0 of each view through a shared linear layer
        Tensor<T> cls({cfg_.views, m});
        for (int64_t v = 0; v < cfg_.views; ++v)
            std::copy(view_embeddings[static_cast<size_t>(v)].data(),
                      view_embeddings[static_cast<size_t>(v)].data() + m, cls.data() + v * m);
        auto global_rows = global_linear_.forward(cls);
        std::copy(global_rows.data(), global_rows.data() + cfg_.views * m,
                  out.data() + (detail_enabled_ ? cfg_.detail_rows : 0) * m);
        return out;
    }

    // Returns per-view gradients w.r.t. the input embeddings.
    std::vector<Tensor<T>> backward(const Tensor<T>& grad_out) {
        const int64_t n = cfg_.tokens_per_view, m = cfg_.width;
        std::vector<Tensor<T>> grads(static_cast<size_t>(cfg_.views), Tensor<T>({n, m}));
        if (detail_enabled_) {
            Tensor<T> gdetail({cfg_.detail_rows, m});
            std::copy(grad_out.data(), grad_out.data() + cfg_.detail_rows * m, gdetail.data());
            auto grefined = project_.backward(gdetail);
            auto gfront = attn_front_.backward(grefined);
            Tensor<T> gmixed({cfg_.views * n, m});
            std::copy(gfront.data(), gfront.data() + n * m, gmixed.data() + n * m);
            auto gcat = attn_views_.backward(gmixed);
            for (int64_t v = 0; v < cfg_.views; ++v)
                std::copy(gcat.data() + v * n * m, gcat.data() + (v + 1) * n * m,
                          grads[static_cast<size_t>(v)].data());
        }
        Tensor<T> gcls({cfg_.views, m});
        std::copy(grad_out.data() + (detail_enabled_ ? cfg_.detail_rows : 0) * m,
                  grad_out.data() + grad_out.numel(), gcls.data());
        auto gin = global_linear_.backward(gcls);
        for (int64_t v = 0; v < cfg_.views; ++v)
            for (int64_t j = 0; j < m; ++j) grads[static_cast<size_t>(v)][j] += gin.at(v, j);
        return grads;
    }

    void params(nn::ParamRefs<T>& refs, const std::string& prefix) {
        if (detail_enabled_) {
            attn_views_.params(refs, prefix + ".attn_views");
            attn_front_.params(refs, prefix + ".attn_front");
            project_.params(refs, prefix + ".project");
        }
        global_linear_.params(refs, prefix + ".global_linear");
    }

    nn::SelfAttention<T>& view_attention() { return attn_views_; }
    nn::SelfAttention<T>& front_attention() { return attn_front_; }
    TokenMix<T>& projection() { return project_; }
    nn::Linear<T>& global_linear() { return global_linear_; }

private:
    FusionConfig cfg_;
    bool detail_enabled_ = true;
    nn::SelfAttention<T> attn_views_, attn_front_;
    TokenMix<T> project_;
    nn::Linear<T> global_linear_;
};

}  // namespace hoivid
