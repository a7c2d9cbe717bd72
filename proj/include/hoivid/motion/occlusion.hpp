#pragma once

#include "hoivid/core/image.hpp"

namespace hoivid {

// Zero the hand render wherever the object mask is set and the object sits
// nearer the camera (smaller depth value in the shared convention). Idempotent.
inline Raster occlusion_mask_hands(const Raster& hand_render, const Raster& hand_depth,
                                   const Raster& obj_mask, const Raster& obj_depth) {
    if (!hand_render.same_shape(hand_depth) || !hand_render.same_shape(obj_mask) ||
        !hand_render.same_shape(obj_depth))
        throw std::invalid_argument("occlusion_mask_hands: raster shape mismatch");
    Raster out = hand_render;
    for (int64_t i = 0; i < out.numel(); ++i)
        if (obj_mask[i] > 0.5f && obj_depth[i] < hand_depth[i]) out[i] = 0.f;
    return out;
}

}  // namespace hoivid
