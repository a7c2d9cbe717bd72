#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "hoivid/core/image.hpp"
#include "hoivid/core/rng.hpp"

namespace hoivid {

enum class ViewId { left45 = 0, front = 1, right45 = 2 };

struct EmbedderConfig {
    std::string name = "oracle";
    int64_t grid_h = 3;          // patch grid; token count n = 1 + grid_h * grid_w
    int64_t grid_w = 3;
    int64_t width = 32;          // m
    bool global_only = false;    // emit only the pooled global token (k = 1)
    uint64_t seed = 2024;

    int64_t tokens() const { return global_only ? 1 : 1 + grid_h * grid_w; }
};

// Deterministic image embedder: each grid cell is sampled on a fixed 4x4 point
// lattice (bilinear, centered at mid-gray) and mapped through a seeded random
// projection; token 0 is the mean-pooled global token. Stands in for the frozen
// vision backbones behind the same token-shape contract.
class OracleEmbedder {
public:
    explicit OracleEmbedder(EmbedderConfig cfg) : cfg_(std::move(cfg)) {
        Rng rng(seed_stream(cfg_.seed, "embedder/" + cfg_.name));
        proj_ = TensorD({kPatchDim, cfg_.width});
        const double std = 1.0 / std::sqrt(static_cast<double>(kPatchDim));
        rng.fill_normal(proj_, std);
    }

    const EmbedderConfig& config() const { return cfg_; }

    // image: [3, H, W] -> tokens [n, m] (or [1, m] in global-only mode)
    TensorD embed(const Raster& image) const {
        const int64_t gh = cfg_.grid_h, gw = cfg_.grid_w, m = cfg_.width;
        const int64_t patches = gh * gw;
        TensorD patch_tokens({patches, m});
        const double cell_h = static_cast<double>(image.dim(1)) / static_cast<double>(gh);
        const double cell_w = static_cast<double>(image.dim(2)) / static_cast<double>(gw);
        std::array<double, kPatchDim> feat{};
        for (int64_t gy = 0; gy < gh; ++gy)
            for (int64_t gx = 0; gx < gw; ++gx) {
                int64_t fi = 0;
                for (int64_t sy = 0; sy < kSamples; ++sy)
                    for (int64_t sx = 0; sx < kSamples; ++sx) {
                        const double px = (static_cast<double>(gx) +
                                           (static_cast<double>(sx) + 0.5) / kSamples) * cell_w - 0.5;
                        const double py = (static_cast<double>(gy) +
                                           (static_cast<double>(sy) + 0.5) / kSamples) * cell_h - 0.5;
                        for (int64_t c = 0; c < 3; ++c)
                            feat[static_cast<size_t>(fi++)] =
                                static_cast<double>(sample_bilinear(image, std::min<int64_t>(c, image.dim(0) - 1), px, py)) - 0.5;
                    }
                double* row = patch_tokens.data() + (gy * gw + gx) * m;
                for (int64_t j = 0; j < m; ++j) {
                    double acc = 0;
                    for (int64_t i = 0; i < kPatchDim; ++i) acc += feat[static_cast<size_t>(i)] * proj_.at(i, j);
                    row[j] = acc;
                }
            }
        TensorD global({1, m});
        for (int64_t p = 0; p < patches; ++p)
            for (int64_t j = 0; j < m; ++j) global[j] += patch_tokens.at(p, j);
        for (int64_t j = 0; j < m; ++j) global[j] /= static_cast<double>(patches);

        if (cfg_.global_only) return global;
        TensorD tokens({1 + patches, m});
        std::copy(global.data(), global.data() + m, tokens.data());
        std::copy(patch_tokens.data(), patch_tokens.data() + patches * m, tokens.data() + m);
        return tokens;
    }

private:
    static constexpr int64_t kSamples = 4;
    static constexpr int64_t kPatchDim = kSamples * kSamples * 3;

    EmbedderConfig cfg_;
    TensorD proj_;
};

// Embedders are registered by name; configs pick one per condition stream.
class EmbedderRegistry {
public:
    using Factory = std::function<std::shared_ptr<OracleEmbedder>(const EmbedderConfig&)>;

    static EmbedderRegistry& instance() {
        static EmbedderRegistry reg;
        return reg;
    }

    void register_factory(const std::string& name, Factory f) { factories_[name] = std::move(f); }

    std::shared_ptr<OracleEmbedder> create(const EmbedderConfig& cfg) const {
        auto it = factories_.find(cfg.name);
        if (it == factories_.end())
            throw std::invalid_argument("embedder: unknown name '" + cfg.name + "'");
        return it->second(cfg);
    }

private:
    EmbedderRegistry() {
        factories_["oracle"] = [](const EmbedderConfig& cfg) {
            return std::make_shared<OracleEmbedder>(cfg);
        };
    }
    std::map<std::string, Factory> factories_;
};

// Exactly three views, in (left45, front, right45) order. Duplicate images are
// permitted when side captures are missing.
inline std::array<TensorD, 3> embed_object_views(const std::array<Raster, 3>& views,
                                                 const OracleEmbedder& embedder) {
    std::array<TensorD, 3> out;
    for (size_t i = 0; i < 3; ++i) out[i] = embedder.embed(views[i]);
    return out;
}

inline TensorD embed_human(const Raster& image, const OracleEmbedder& embedder) {
    return embedder.embed(image);
}

}  // namespace hoivid
