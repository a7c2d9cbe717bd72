#pragma once

#include <optional>

#include <json.hpp>

#include "hoivid/appearance/embedder.hpp"
#include "hoivid/motion/similarity.hpp"
#include "hoivid/synth/scene.hpp"

namespace hoivid {

// Mean over frames of |A intersect B| / |A union B|. Frames where both masks are
// empty agree on "no object" and contribute 1.0.
double object_iou(const std::vector<Raster>& gen_masks, const std::vector<Raster>& gt_masks);

// Mean Euclidean distance over pairwise-visible keypoints across frames, raw pixels.
double lmd(const std::vector<KeypointFrame>& gen, const std::vector<KeypointFrame>& gt);

double cosine_similarity(const TensorD& a, const TensorD& b);

// Mean over crops of the best cosine between the crop's global embedding token
// and the reference views' global tokens.
double object_cos(const std::vector<Raster>& gen_crops, const std::vector<Raster>& reference_views,
                  const OracleEmbedder& embedder);

double face_cos(const std::vector<Raster>& gen_face_crops, const Raster& ref_face,
                const OracleEmbedder& embedder);

// Color-prototype segmentation: a pixel belongs to the mask when its nearest
// palette prototype is an object color within the distance cap. Desk-scale
// stand-in for a promptable video segmenter.
struct ColorPrototypes {
    std::vector<Rgb> object_colors;
    std::vector<Rgb> other_colors;
    double max_dist = 0.40;
};
Raster mask_from_palette(const Raster& frame, const ColorPrototypes& prototypes);

// Hand keypoints from a generated frame: pixels near the shaded-hand prototype,
// connected components, up to two largest blob centroids assigned to the
// ground-truth hands by proximity. Undetected hands come back invisible.
KeypointFrame detect_hand_centers(const Raster& frame, Rgb skin, const KeypointFrame& gt_hands);

// Crop helpers for the embedding metrics.
std::optional<Raster> crop_mask_bbox(const Raster& frame, const Raster& mask, int64_t pad);
Raster crop_centered(const Raster& frame, double cx, double cy, int64_t half);

struct ClipMetrics {
    std::string id;
    double obj_iou = 0;
    double obj_cos = 0;
    double lmd_hand = 0;
    std::optional<double> face_cos;
    int64_t width = 0, height = 0;
};

struct MetricReport {
    std::vector<ClipMetrics> clips;
    std::string mask_extractor = "color_prototype";
    std::string embedder_name = "oracle";

    double mean_obj_iou() const;
    double mean_obj_cos() const;
    double mean_lmd() const;
    std::optional<double> mean_face_cos() const;

    nlohmann::json to_json() const;
    static MetricReport from_json(const nlohmann::json& j);
    std::string table() const;
};

}  // namespace hoivid
