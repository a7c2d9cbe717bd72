#pragma once

#include "hoivid/core/image.hpp"
#include "hoivid/motion/similarity.hpp"

namespace hoivid {

// Inverse-mapped bilinear warp, zero fill outside the source canvas.
inline Raster warp_raster(const Raster& src, const SimilarityTransform& t) {
    const auto inv = t.inverse();
    Raster out(src.shape());
    for (int64_t c = 0; c < src.dim(0); ++c)
        for (int64_t y = 0; y < src.dim(1); ++y)
            for (int64_t x = 0; x < src.dim(2); ++x) {
                auto [sx, sy] = inv.apply(static_cast<double>(x), static_cast<double>(y));
                out.at(c, y, x) = sample_bilinear(src, c, sx, sy);
            }
    return out;
}

// Warp a binary mask; bilinear then threshold keeps it in {0,1}.
inline Raster warp_mask(const Raster& mask, const SimilarityTransform& t) {
    Raster out = warp_raster(mask, t);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.5f ? 1.f : 0.f;
    return out;
}

inline KeypointFrame apply_to_keypoints(const SimilarityTransform& t, const KeypointFrame& kps) {
    KeypointFrame out;
    out.reserve(kps.size());
    for (const auto& p : kps) out.push_back(t.apply(p));
    return out;
}

// All motion condition streams for one clip, at pixel resolution.
struct ConditionStreams {
    std::vector<Raster> pose_render;   // [3,H,W]
    std::vector<Raster> hand_render;   // [1,H,W]
    std::vector<Raster> hand_depth;    // [1,H,W], shared depth convention
    std::vector<Raster> obj_depth;     // [1,H,W], shared depth convention
    std::vector<Raster> obj_mask;      // [1,H,W] binary
    std::vector<Raster> hand_mask;     // [1,H,W] binary
    std::vector<KeypointFrame> keypoints;

    size_t frames() const { return pose_render.size(); }
};

// One shared transform applied to every stream and every frame. Rasters are
// bilinearly resampled (masks re-thresholded); keypoints map exactly.
inline ConditionStreams apply_alignment(const SimilarityTransform& t, const ConditionStreams& in) {
    ConditionStreams out;
    out.pose_render.reserve(in.frames());
    for (const auto& r : in.pose_render) out.pose_render.push_back(warp_raster(r, t));
    for (const auto& r : in.hand_render) out.hand_render.push_back(warp_raster(r, t));
    for (const auto& r : in.hand_depth) out.hand_depth.push_back(warp_raster(r, t));
    for (const auto& r : in.obj_depth) out.obj_depth.push_back(warp_raster(r, t));
    for (const auto& r : in.obj_mask) out.obj_mask.push_back(warp_mask(r, t));
    for (const auto& r : in.hand_mask) out.hand_mask.push_back(warp_mask(r, t));
    for (const auto& k : in.keypoints) out.keypoints.push_back(apply_to_keypoints(t, k));
    return out;
}

}  // namespace hoivid
