#pragma once

#include <vector>

#include "hoivid/core/image.hpp"

namespace hoivid {

// Interaction region at latent resolution plus the pixel-space area statistics
// that drive the loss reweighting. Areas are per-frame, summarized by their
// clip means since hand/object extent varies across frames.
struct InteractionMask {
    Tensor<float> latent_mask;  // [f, h, w], entries in {0,1}
    double area_total = 0;      // S: source pixels per frame
    double area_obj = 0;        // mean S_obj over frames
    double area_hand = 0;       // mean S_hand over frames
    std::vector<double> per_frame_obj, per_frame_hand;

    bool empty_interaction() const { return area_obj + area_hand <= 0.0; }
};

// M_inter = obj_mask OR hand_mask, max-pooled onto the latent grid so small
// hands and objects survive downsampling. Areas are counted at source
// resolution before pooling.
inline InteractionMask build_interaction_mask(const std::vector<Raster>& obj_masks,
                                              const std::vector<Raster>& hand_masks,
                                              int64_t factor) {
    if (obj_masks.size() != hand_masks.size())
        throw std::invalid_argument("build_interaction_mask: frame count mismatch");
    if (obj_masks.empty()) throw std::invalid_argument("build_interaction_mask: no frames");
    const int64_t h = obj_masks[0].dim(1), w = obj_masks[0].dim(2);
    if (h % factor != 0 || w % factor != 0)
        throw std::invalid_argument("build_interaction_mask: dims not divisible by factor");

    const int64_t f = static_cast<int64_t>(obj_masks.size());
    InteractionMask out;
    out.latent_mask = Tensor<float>({f, h / factor, w / factor});
    out.area_total = static_cast<double>(h * w);
    for (int64_t fi = 0; fi < f; ++fi) {
        const auto& om = obj_masks[static_cast<size_t>(fi)];
        const auto& hm = hand_masks[static_cast<size_t>(fi)];
        if (om.dim(1) != h || om.dim(2) != w || hm.dim(1) != h || hm.dim(2) != w)
            throw std::invalid_argument("build_interaction_mask: raster dim mismatch");
        double s_obj = 0, s_hand = 0;
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                const bool o = om.at(0, y, x) > 0.5f;
                const bool hnd = hm.at(0, y, x) > 0.5f;
                if (o) s_obj += 1;
                if (hnd) s_hand += 1;
                if (o || hnd) out.latent_mask.at(fi, y / factor, x / factor) = 1.f;
            }
        out.per_frame_obj.push_back(s_obj);
        out.per_frame_hand.push_back(s_hand);
        out.area_obj += s_obj / static_cast<double>(f);
        out.area_hand += s_hand / static_cast<double>(f);
    }
    return out;
}

// Per-element weights of the reweighted objective:
//   w = (1 - M) + eta * (S / (S_obj + S_hand)) * M
// broadcast over channels. Empty-interaction clips degenerate to plain
// diffusion loss (the reweight term is defined as 0).
template <typename T>
Tensor<T> reweight_weights(const InteractionMask& mask, double eta,
                           const std::vector<int64_t>& err_shape) {
    if (eta < 0) throw std::invalid_argument("hoi_reweighted_loss: eta must be >= 0");
    const int64_t f = err_shape[0], c = err_shape[1], h = err_shape[2], w = err_shape[3];
    if (mask.latent_mask.dim(0) != f || mask.latent_mask.dim(1) != h ||
        mask.latent_mask.dim(2) != w)
        throw std::invalid_argument("hoi_reweighted_loss: mask grid " +
                                    mask.latent_mask.shape_str() + " does not match error grid");
    // written as eta / interaction_fraction so that eta == (S_obj+S_hand)/S
    // cancels exactly in floating point
    const double denom = mask.area_obj + mask.area_hand;
    const double inside = (denom > 0.0) ? eta / (denom / mask.area_total) : 0.0;
    Tensor<T> wgt(err_shape);
    for (int64_t fi = 0; fi < f; ++fi)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                const bool m = mask.latent_mask.at(fi, y, x) > 0.5f;
                const T v = m ? static_cast<T>(inside) : T(1);
                for (int64_t ci = 0; ci < c; ++ci) wgt.at(fi, ci, y, x) = v;
            }
    return wgt;
}

// L_final as the mean over all elements of the weighted per-element squared
// error. The gradient w.r.t. the error grid is weights / numel.
template <typename T>
double hoi_reweighted_loss(const Tensor<T>& per_element_sq_err, const InteractionMask& mask,
                           double eta) {
    auto wgt = reweight_weights<T>(mask, eta, per_element_sq_err.shape());
    double acc = 0;
    for (int64_t i = 0; i < per_element_sq_err.numel(); ++i)
        acc += static_cast<double>(wgt[i]) * static_cast<double>(per_element_sq_err[i]);
    return acc / static_cast<double>(per_element_sq_err.numel());
}

}  // namespace hoivid
