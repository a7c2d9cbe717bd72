#pragma once

#include <complex>
#include <vector>

#include "hoivid/core/tensor.hpp"

namespace hoivid {

struct Keypoint {
    double x = 0, y = 0;
    double conf = 1.0;  // <= 0 means invisible

    bool visible() const { return conf > 0; }
};

using KeypointFrame = std::vector<Keypoint>;

// Skeleton convention used across the toolkit.
namespace skeleton {
enum Index {
    head = 0,
    neck,
    r_shoulder,
    r_elbow,
    r_wrist,
    l_shoulder,
    l_elbow,
    l_wrist,
    r_hip,
    l_hip,
    r_hand,
    l_hand,
    count
};
inline const std::vector<int>& torso_indices() {
    static const std::vector<int> idx{r_shoulder, l_shoulder, r_hip, l_hip};
    return idx;
}
inline const std::vector<int>& hand_indices() {
    static const std::vector<int> idx{r_wrist, l_wrist, r_hand, l_hand};
    return idx;
}
}  // namespace skeleton

struct DegenerateAlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 4-DOF 2D similarity: p' = s R(theta) p + t.
struct SimilarityTransform {
    double scale = 1.0;
    double theta = 0.0;
    double tx = 0.0, ty = 0.0;

    std::pair<double, double> apply(double x, double y) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {scale * (c * x - s * y) + tx, scale * (s * x + c * y) + ty};
    }

    Keypoint apply(const Keypoint& p) const {
        auto [x, y] = apply(p.x, p.y);
        return {x, y, p.conf};
    }

    SimilarityTransform inverse() const {
        if (!(scale > 0) || !std::isfinite(scale))
            throw DegenerateAlignmentError("similarity: non-invertible transform");
        SimilarityTransform inv;
        inv.scale = 1.0 / scale;
        inv.theta = -theta;
        auto [ix, iy] = inv_point(tx, ty);
        inv.tx = -ix;
        inv.ty = -iy;
        return inv;
    }

private:
    std::pair<double, double> inv_point(double x, double y) const {
        const double c = std::cos(-theta), s = std::sin(-theta);
        const double is = 1.0 / scale;
        return {is * (c * x - s * y), is * (s * x + c * y)};
    }
};

// Closed-form least-squares similarity fit (complex formulation of the
// Umeyama problem without reflection) over the shared visible keypoints at
// the given indices. Exact on correspondences generated by a true similarity.
inline SimilarityTransform estimate_similarity(const KeypointFrame& from, const KeypointFrame& to,
                                               const std::vector<int>& indices) {
    using cd = std::complex<double>;
    std::vector<cd> z, w;
    for (int idx : indices) {
        if (idx < 0 || idx >= static_cast<int>(from.size()) || idx >= static_cast<int>(to.size()))
            continue;
        const auto& a = from[static_cast<size_t>(idx)];
        const auto& b = to[static_cast<size_t>(idx)];
        if (!a.visible() || !b.visible()) continue;
        z.emplace_back(a.x, a.y);
        w.emplace_back(b.x, b.y);
    }
    if (z.size() < 2)
        throw DegenerateAlignmentError("estimate_similarity: fewer than 2 shared visible keypoints");

    cd mz(0, 0), mw(0, 0);
    for (size_t i = 0; i < z.size(); ++i) {
        mz += z[i];
        mw += w[i];
    }
    mz /= static_cast<double>(z.size());
    mw /= static_cast<double>(z.size());

    cd num(0, 0);
    double den = 0;
    for (size_t i = 0; i < z.size(); ++i) {
        const cd zc = z[i] - mz;
        num += std::conj(zc) * (w[i] - mw);
        den += std::norm(zc);
    }
    if (den < 1e-12)
        throw DegenerateAlignmentError("estimate_similarity: source keypoints are coincident");
    const cd q = num / den;
    SimilarityTransform t;
    t.scale = std::abs(q);
    if (t.scale < 1e-12)
        throw DegenerateAlignmentError("estimate_similarity: degenerate correspondence");
    t.theta = std::arg(q);
    const cd trans = mw - q * mz;
    t.tx = trans.real();
    t.ty = trans.imag();
    return t;
}

inline SimilarityTransform estimate_similarity_torso(const KeypointFrame& from,
                                                     const KeypointFrame& to) {
    return estimate_similarity(from, to, skeleton::torso_indices());
}

}  // namespace hoivid
