#include "hoivid/metrics/metrics.hpp"

#include <deque>
#include <sstream>

namespace hoivid {

double object_iou(const std::vector<Raster>& gen_masks, const std::vector<Raster>& gt_masks) {
    if (gen_masks.size() != gt_masks.size())
        throw std::invalid_argument("object_iou: frame count mismatch");
    if (gen_masks.empty()) throw std::invalid_argument("object_iou: no frames");
    double acc = 0;
    for (size_t f = 0; f < gen_masks.size(); ++f) {
        const auto& a = gen_masks[f];
        const auto& b = gt_masks[f];
        if (!a.same_shape(b)) throw std::invalid_argument("object_iou: mask dim mismatch");
        int64_t inter = 0, uni = 0;
        for (int64_t i = 0; i < a.numel(); ++i) {
            const bool av = a[i] > 0.5f, bv = b[i] > 0.5f;
            inter += (av && bv) ? 1 : 0;
            uni += (av || bv) ? 1 : 0;
        }
        acc += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return acc / static_cast<double>(gen_masks.size());
}

double lmd(const std::vector<KeypointFrame>& gen, const std::vector<KeypointFrame>& gt) {
    if (gen.size() != gt.size()) throw std::invalid_argument("lmd: frame count mismatch");
    double acc = 0;
    int64_t count = 0;
    for (size_t f = 0; f < gen.size(); ++f) {
        const size_t n = std::min(gen[f].size(), gt[f].size());
        for (size_t i = 0; i < n; ++i) {
            const auto& a = gen[f][i];
            const auto& b = gt[f][i];
            if (!a.visible() || !b.visible()) continue;
            acc += std::hypot(a.x - b.x, a.y - b.y);
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("lmd: zero shared visible keypoints");
    return acc / static_cast<double>(count);
}

double cosine_similarity(const TensorD& a, const TensorD& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("cosine: shape mismatch");
    double dot = 0, na = 0, nb = 0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0 || nb <= 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {
TensorD global_token(const TensorD& tokens) {
    TensorD g({1, tokens.dim(1)});
    std::copy(tokens.data(), tokens.data() + tokens.dim(1), g.data());
    return g;
}
}  // namespace

double object_cos(const std::vector<Raster>& gen_crops, const std::vector<Raster>& reference_views,
                  const OracleEmbedder& embedder) {
    if (gen_crops.empty()) throw std::invalid_argument("object_cos: empty crop set");
    if (reference_views.empty()) throw std::invalid_argument("object_cos: no reference views");
    std::vector<TensorD> refs;
    refs.reserve(reference_views.size());
    for (const auto& v : reference_views) refs.push_back(global_token(embedder.embed(v)));
    double acc = 0;
    for (const auto& crop : gen_crops) {
        const auto e = global_token(embedder.embed(crop));
        double best = -1.0;
        for (const auto& r : refs) best = std::max(best, cosine_similarity(e, r));
        acc += best;
    }
    return acc / static_cast<double>(gen_crops.size());
}

double face_cos(const std::vector<Raster>& gen_face_crops, const Raster& ref_face,
                const OracleEmbedder& embedder) {
    if (gen_face_crops.empty()) throw std::invalid_argument("face_cos: no face region");
    const auto ref = global_token(embedder.embed(ref_face));
    double acc = 0;
    for (const auto& crop : gen_face_crops)
        acc += cosine_similarity(global_token(embedder.embed(crop)), ref);
    return acc / static_cast<double>(gen_face_crops.size());
}

namespace {
double color_dist2(const Raster& img, int64_t y, int64_t x, const Rgb& c) {
    const double dr = static_cast<double>(img.at(0, y, x)) - c.r;
    const double dg = static_cast<double>(img.at(1, y, x)) - c.g;
    const double db = static_cast<double>(img.at(2, y, x)) - c.b;
    return dr * dr + dg * dg + db * db;
}
}  // namespace

Raster mask_from_palette(const Raster& frame, const ColorPrototypes& prototypes) {
    Raster mask({1, frame.dim(1), frame.dim(2)});
    const double cap2 = prototypes.max_dist * prototypes.max_dist;
    for (int64_t y = 0; y < frame.dim(1); ++y)
        for (int64_t x = 0; x < frame.dim(2); ++x) {
            double best_obj = 1e18, best_other = 1e18;
            for (const auto& c : prototypes.object_colors)
                best_obj = std::min(best_obj, color_dist2(frame, y, x, c));
            for (const auto& c : prototypes.other_colors)
                best_other = std::min(best_other, color_dist2(frame, y, x, c));
            if (best_obj < best_other && best_obj <= cap2) mask.at(0, y, x) = 1.f;
        }
    return mask;
}

KeypointFrame detect_hand_centers(const Raster& frame, Rgb skin, const KeypointFrame& gt_hands) {
    const int64_t h = frame.dim(1), w = frame.dim(2);
    // shaded-hand prototype; the face keeps the unshaded skin tone
    const Rgb hand{skin.r * 0.28f, skin.g * 0.28f, skin.b * 0.28f};
    std::vector<uint8_t> sel(static_cast<size_t>(h * w), 0);
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x)
            if (color_dist2(frame, y, x, hand) < 0.05) sel[static_cast<size_t>(y * w + x)] = 1;

    // connected components (4-neighborhood)
    std::vector<int32_t> label(static_cast<size_t>(h * w), -1);
    struct Blob {
        double sx = 0, sy = 0;
        int64_t n = 0;
    };
    std::vector<Blob> blobs;
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            const int64_t idx = y * w + x;
            if (!sel[static_cast<size_t>(idx)] || label[static_cast<size_t>(idx)] >= 0) continue;
            const int32_t id = static_cast<int32_t>(blobs.size());
            blobs.push_back({});
            std::deque<int64_t> queue{idx};
            label[static_cast<size_t>(idx)] = id;
            while (!queue.empty()) {
                const int64_t cur = queue.front();
                queue.pop_front();
                const int64_t cy = cur / w, cx = cur % w;
                blobs[static_cast<size_t>(id)].sx += static_cast<double>(cx);
                blobs[static_cast<size_t>(id)].sy += static_cast<double>(cy);
                blobs[static_cast<size_t>(id)].n += 1;
                const int64_t nx[4] = {cx - 1, cx + 1, cx, cx};
                const int64_t ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
                    const int64_t nidx = ny[k] * w + nx[k];
                    if (sel[static_cast<size_t>(nidx)] && label[static_cast<size_t>(nidx)] < 0) {
                        label[static_cast<size_t>(nidx)] = id;
                        queue.push_back(nidx);
                    }
                }
            }
        }

    std::vector<std::pair<double, double>> centers;
    for (const auto& b : blobs)
        if (b.n >= 4) centers.emplace_back(b.sx / static_cast<double>(b.n), b.sy / static_cast<double>(b.n));

    // assign blobs to ground-truth hands by nearest center
    KeypointFrame out(gt_hands.size());
    for (size_t i = 0; i < gt_hands.size(); ++i) out[i] = {0, 0, 0};
    std::vector<bool> used(centers.size(), false);
    for (size_t i = 0; i < gt_hands.size(); ++i) {
        if (!gt_hands[i].visible()) continue;
        double best = 1e18;
        int64_t pick = -1;
        for (size_t c = 0; c < centers.size(); ++c) {
            if (used[c]) continue;
            const double d = std::hypot(centers[c].first - gt_hands[i].x,
                                        centers[c].second - gt_hands[i].y);
            if (d < best) {
                best = d;
                pick = static_cast<int64_t>(c);
            }
        }
        if (pick >= 0) {
            used[static_cast<size_t>(pick)] = true;
            out[i] = {centers[static_cast<size_t>(pick)].first,
                      centers[static_cast<size_t>(pick)].second, 1.0};
        }
    }
    return out;
}

std::optional<Raster> crop_mask_bbox(const Raster& frame, const Raster& mask, int64_t pad) {
    int64_t x0 = frame.dim(2), x1 = -1, y0 = frame.dim(1), y1 = -1;
    for (int64_t y = 0; y < mask.dim(1); ++y)
        for (int64_t x = 0; x < mask.dim(2); ++x)
            if (mask.at(0, y, x) > 0.5f) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return std::nullopt;
    x0 = std::max<int64_t>(0, x0 - pad);
    y0 = std::max<int64_t>(0, y0 - pad);
    x1 = std::min(frame.dim(2) - 1, x1 + pad);
    y1 = std::min(frame.dim(1) - 1, y1 + pad);
    return crop(frame, y0, x0, y1 - y0 + 1, x1 - x0 + 1);
}

Raster crop_centered(const Raster& frame, double cx, double cy, int64_t half) {
    return crop(frame, static_cast<int64_t>(cy) - half, static_cast<int64_t>(cx) - half, 2 * half,
                2 * half);
}

double MetricReport::mean_obj_iou() const {
    double a = 0;
    for (const auto& c : clips) a += c.obj_iou;
    return clips.empty() ? 0 : a / static_cast<double>(clips.size());
}
double MetricReport::mean_obj_cos() const {
    double a = 0;
    for (const auto& c : clips) a += c.obj_cos;
    return clips.empty() ? 0 : a / static_cast<double>(clips.size());
}
double MetricReport::mean_lmd() const {
    double a = 0;
    for (const auto& c : clips) a += c.lmd_hand;
    return clips.empty() ? 0 : a / static_cast<double>(clips.size());
}
std::optional<double> MetricReport::mean_face_cos() const {
    double a = 0;
    int64_t n = 0;
    for (const auto& c : clips)
        if (c.face_cos) {
            a += *c.face_cos;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return a / static_cast<double>(n);
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["extractors"] = {{"mask", mask_extractor}, {"embedder", embedder_name}};
    auto& arr = j["clips"] = nlohmann::json::array();
    for (const auto& c : clips) {
        nlohmann::json e;
        e["id"] = c.id;
        e["obj_iou"] = c.obj_iou;
        e["obj_cos"] = c.obj_cos;
        e["lmd_hand"] = c.lmd_hand;
        if (c.face_cos) e["face_cos"] = *c.face_cos;
        e["width"] = c.width;
        e["height"] = c.height;
        arr.push_back(e);
    }
    j["aggregate"] = {{"obj_iou", mean_obj_iou()}, {"obj_cos", mean_obj_cos()}, {"lmd_hand", mean_lmd()}};
    if (auto f = mean_face_cos()) j["aggregate"]["face_cos"] = *f;
    return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
    MetricReport r;
    r.mask_extractor = j.at("extractors").at("mask").get<std::string>();
    r.embedder_name = j.at("extractors").at("embedder").get<std::string>();
    for (const auto& e : j.at("clips")) {
        ClipMetrics c;
        c.id = e.at("id").get<std::string>();
        c.obj_iou = e.at("obj_iou").get<double>();
        c.obj_cos = e.at("obj_cos").get<double>();
        c.lmd_hand = e.at("lmd_hand").get<double>();
        if (e.contains("face_cos")) c.face_cos = e.at("face_cos").get<double>();
        c.width = e.at("width").get<int64_t>();
        c.height = e.at("height").get<int64_t>();
        r.clips.push_back(c);
    }
    return r;
}

std::string MetricReport::table() const {
    std::ostringstream os;
    os << "clip                    Obj-IoU  Obj-Cos  LMD(Hand)  Face-Cos\n";
    auto row = [&os](const std::string& name, double iou, double cos, double l,
                     std::optional<double> f) {
        char buf[160];
        if (f)
            std::snprintf(buf, sizeof(buf), "%-22s  %7.3f  %7.3f  %9.2f  %8.3f\n", name.c_str(),
                          iou, cos, l, *f);
        else
            std::snprintf(buf, sizeof(buf), "%-22s  %7.3f  %7.3f  %9.2f  %8s\n", name.c_str(), iou,
                          cos, l, "-");
        os << buf;
    };
    for (const auto& c : clips) row(c.id, c.obj_iou, c.obj_cos, c.lmd_hand, c.face_cos);
    row("mean", mean_obj_iou(), mean_obj_cos(), mean_lmd(), mean_face_cos());
    return os.str();
}

}  // namespace hoivid
