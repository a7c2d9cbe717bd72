#include "hoivid/synth/corpus.hpp"

#include <filesystem>

#include "hoivid/core/png_io.hpp"
#include "hoivid/data/archive.hpp"

namespace fs = std::filesystem;

namespace hoivid {

namespace {

Rgb hsv(double h, double s, double v) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    return {static_cast<float>(r + m), static_cast<float>(g + m), static_cast<float>(b + m)};
}

nlohmann::json rgb_json(const Rgb& c) { return {c.r, c.g, c.b}; }

TrajectorySpec trajectory_for(int64_t i) {
    switch (i % 4) {
        case 0: return {Trajectory::lift, 0.0, -20.0, 0.0};
        case 1: return {Trajectory::present_and_move, 22.0, 5.0, 0.0};
        case 2: return {Trajectory::rotate, 0.0, 0.0, 40.0};
        default: return {Trajectory::hold_still, 0.0, 0.0, 0.0};
    }
}

const char* trajectory_name(Trajectory t) {
    switch (t) {
        case Trajectory::hold_still: return "hold_still";
        case Trajectory::lift: return "lift";
        case Trajectory::rotate: return "rotate";
        case Trajectory::present_and_move: return "present_and_move";
    }
    return "?";
}

void blacken(std::vector<Raster>& rasters) {
    for (auto& r : rasters) r.zero();
}

struct RecordSink {
    const CorpusConfig& cfg;
    nlohmann::json records = nlohmann::json::array();

    void write(const std::string& id, const std::string& split, const std::string& source,
               const std::string& object_id, int64_t anchor_id, const SceneSpec& base_spec,
               const std::vector<std::array<int64_t, 2>>& resolutions) {
        const std::string rec_dir = cfg.root + "/records/" + id;
        fs::create_directories(rec_dir);

        nlohmann::json meta;
        meta["id"] = id;
        meta["split"] = split;
        meta["source"] = source;
        meta["object_id"] = object_id;
        meta["anchor_id"] = anchor_id;
        meta["frames"] = base_spec.frames;
        meta["fps"] = base_spec.fps;
        meta["trajectory"] = trajectory_name(base_spec.trajectory.kind);
        meta["palette"] = {{"skin", rgb_json(base_spec.palette.skin)},
                           {"torso", rgb_json(base_spec.palette.torso)},
                           {"limb", rgb_json(base_spec.palette.limb)},
                           {"hair", rgb_json(base_spec.palette.hair)},
                           {"background", rgb_json(base_spec.palette.background)}};
        if (!object_id.empty())
            meta["object"] = {{"base", rgb_json(base_spec.object.base)},
                              {"secondary", rgb_json(base_spec.object.secondary)},
                              {"emblem", rgb_json(base_spec.object.emblem)}};
        auto& res_meta = meta["resolutions"] = nlohmann::json::object();

        std::vector<std::string> res_keys;
        for (const auto& res : resolutions) {
            SceneSpec spec = base_spec;
            spec.height = res[0];
            spec.width = res[1];
            RenderedClip clip = generate_scene(spec);
            if (source == "human_only") {
                // black conditions stand in for absent object/hand extraction
                blacken(clip.conditions.hand_render);
                blacken(clip.conditions.hand_depth);
                blacken(clip.conditions.obj_depth);
                blacken(clip.conditions.obj_mask);
                blacken(clip.conditions.hand_mask);
            }
            const std::string key = resolution_key(res[0], res[1]);
            res_keys.push_back(key);
            const std::string res_dir = rec_dir + "/" + key;
            write_frames_dir(res_dir + "/frames", clip.frames, spec.fps);
            write_condition_archive(res_dir + "/conditions", clip.conditions, spec.fps);
            fs::create_directories(res_dir + "/refs");
            write_png(res_dir + "/refs/human.png", clip.ref_human);
            const std::string stem = object_id.empty() ? "object" : object_id;
            write_png(res_dir + "/refs/" + stem + "_left.png", clip.ref_object[0]);
            write_png(res_dir + "/refs/" + stem + "_front.png", clip.ref_object[1]);
            write_png(res_dir + "/refs/" + stem + "_right.png", clip.ref_object[2]);
            res_meta[key] = {{"ref_pose", keypoint_frame_to_json(clip.ref_pose)}};
        }
        write_json(rec_dir + "/meta.json", meta);

        nlohmann::json entry;
        entry["id"] = id;
        entry["split"] = split;
        entry["source"] = source;
        entry["object_id"] = object_id;
        entry["anchor_id"] = anchor_id;
        entry["frames"] = base_spec.frames;
        entry["fps"] = base_spec.fps;
        entry["resolutions"] = res_keys;
        entry["path"] = "records/" + id;
        records.push_back(entry);
    }
};

}  // namespace

std::string resolution_key(int64_t height, int64_t width) {
    return std::to_string(height) + "x" + std::to_string(width);
}

AnchorPalette anchor_palette(uint64_t corpus_seed, int64_t anchor_id, bool held_out) {
    Rng rng(seed_stream(corpus_seed, held_out ? "palette/test" : "palette/train",
                        static_cast<uint64_t>(anchor_id)));
    // train hues cover [0, 0.70); held-out anchors live in [0.75, 0.95)
    const double hue = held_out ? rng.uniform(0.75, 0.95) : rng.uniform(0.0, 0.70);
    AnchorPalette p;
    p.skin = hsv(0.07 + rng.uniform(-0.015, 0.015), 0.38 + rng.uniform(0, 0.1),
                 0.82 + rng.uniform(0, 0.1));
    p.torso = hsv(hue, 0.62, 0.55 + rng.uniform(0, 0.15));
    p.limb = hsv(hue + 0.08, 0.45, 0.38 + rng.uniform(0, 0.1));
    p.hair = hsv(hue + 0.5, 0.35, 0.22);
    p.background = hsv(hue + 0.33, 0.10, 0.90 + rng.uniform(0, 0.05));
    return p;
}

ObjectSpec object_spec_for(uint64_t corpus_seed, const std::string& object_id) {
    Rng rng(seed_stream(corpus_seed, "object/" + object_id));
    ObjectSpec o;
    const int64_t shape = rng.uniform_int(3), pattern = rng.uniform_int(3),
                  glyph = rng.uniform_int(4);
    o.shape = static_cast<ObjectShape>(shape);
    o.pattern = static_cast<TexturePattern>(pattern);
    o.glyph = static_cast<Glyph>(glyph);
    const double hue = rng.uniform(0.0, 1.0);
    o.base = hsv(hue, 0.85, 0.95);
    o.secondary = hsv(hue + 0.12, 0.75, 0.55);
    o.emblem = hsv(hue + 0.5, 0.9, 0.95);
    o.width = 0.18 + rng.uniform(0, 0.05);
    o.height = 0.14 + rng.uniform(0, 0.05);
    o.pattern_cells = 3.0 + static_cast<double>(rng.uniform_int(3));
    return o;
}

Manifest generate_corpus(const CorpusConfig& cfg) {
    if (cfg.counts.train_hoi < 0 || cfg.counts.train_human_only < 0 ||
        cfg.counts.finetune_objects < 0 || cfg.counts.test_clips < 0)
        throw std::invalid_argument("generate_corpus: negative counts");
    fs::create_directories(cfg.root);
    RecordSink sink{cfg};

    // train split
    for (int64_t i = 0; i < cfg.counts.train_hoi; ++i) {
        SceneSpec spec;
        spec.seed = seed_stream(cfg.seed, "scene/train_hoi", static_cast<uint64_t>(i));
        spec.palette = anchor_palette(cfg.seed, i, false);
        const std::string obj_id = "train_obj_" + std::to_string(i);
        spec.object = object_spec_for(cfg.seed, obj_id);
        spec.trajectory = trajectory_for(i);
        spec.frames = cfg.train_frames;
        spec.fps = cfg.fps;
        spec.has_object = true;
        sink.write("train_hoi_" + std::to_string(i), "train", "hoi", obj_id, i, spec,
                   cfg.train_resolutions);
    }
    for (int64_t i = 0; i < cfg.counts.train_human_only; ++i) {
        SceneSpec spec;
        spec.seed = seed_stream(cfg.seed, "scene/train_human", static_cast<uint64_t>(i));
        spec.palette = anchor_palette(cfg.seed, cfg.counts.train_hoi + i, false);
        spec.trajectory = trajectory_for(i + 1);
        spec.frames = cfg.train_frames;
        spec.fps = cfg.fps;
        spec.has_object = false;
        sink.write("train_human_" + std::to_string(i), "train", "human_only", "",
                   cfg.counts.train_hoi + i, spec, cfg.train_resolutions);
    }

    // fine-tune split: >= finetune_seconds of footage per object
    const int64_t clips_per_object = static_cast<int64_t>(
        std::ceil(cfg.finetune_seconds * cfg.fps / static_cast<double>(cfg.finetune_clip_frames)));
    for (int64_t j = 0; j < cfg.counts.finetune_objects; ++j) {
        const std::string obj_id = "ft_obj_" + std::to_string(j);
        for (int64_t k = 0; k < clips_per_object; ++k) {
            SceneSpec spec;
            spec.seed = seed_stream(cfg.seed, "scene/finetune",
                                    static_cast<uint64_t>(j * 1000 + k));
            const int64_t anchor = (j + k) % std::max<int64_t>(1, cfg.counts.train_hoi);
            spec.palette = anchor_palette(cfg.seed, anchor, false);
            spec.object = object_spec_for(cfg.seed, obj_id);
            spec.trajectory = trajectory_for(k);
            spec.frames = cfg.finetune_clip_frames;
            spec.fps = cfg.fps;
            spec.has_object = true;
            sink.write(obj_id + "_clip_" + std::to_string(k), "finetune", "hoi", obj_id, anchor,
                       spec, {cfg.eval_resolution});
        }
    }

    // held-out test clips: unseen anchor palettes driving the fine-tuned object
    for (int64_t k = 0; k < cfg.counts.test_clips; ++k) {
        const std::string obj_id = "ft_obj_" + std::to_string(cfg.test_object_index);
        SceneSpec spec;
        spec.seed = seed_stream(cfg.seed, "scene/test", static_cast<uint64_t>(k));
        spec.palette = anchor_palette(cfg.seed, 100 + k, true);
        spec.object = object_spec_for(cfg.seed, obj_id);
        spec.trajectory = (k % 2 == 0) ? TrajectorySpec{Trajectory::lift, 0.0, -18.0, 0.0}
                                       : TrajectorySpec{Trajectory::present_and_move, 20.0, 4.0, 0.0};
        spec.frames = cfg.test_frames;
        spec.fps = cfg.fps;
        spec.has_object = true;
        sink.write("test_" + std::to_string(k), "test", "hoi", obj_id, 100 + k, spec,
                   {cfg.eval_resolution});
    }

    nlohmann::json index;
    index["seed"] = cfg.seed;
    index["fps"] = cfg.fps;
    index["records"] = sink.records;
    write_json(cfg.root + "/index.json", index);
    return Manifest::load(cfg.root);
}

Manifest Manifest::load(const std::string& root) {
    const auto index = load_json(root + "/index.json");
    Manifest m;
    m.root = root;
    m.seed = index.at("seed").get<uint64_t>();
    m.fps = index.at("fps").get<double>();
    for (const auto& e : index.at("records")) {
        RecordEntry r;
        r.id = e.at("id").get<std::string>();
        r.split = e.at("split").get<std::string>();
        r.source = e.at("source").get<std::string>();
        r.object_id = e.at("object_id").get<std::string>();
        r.anchor_id = e.at("anchor_id").get<int64_t>();
        r.frames = e.at("frames").get<int64_t>();
        r.fps = e.at("fps").get<double>();
        r.resolutions = e.at("resolutions").get<std::vector<std::string>>();
        r.path = root + "/" + e.at("path").get<std::string>();
        m.records.push_back(std::move(r));
    }
    return m;
}

}  // namespace hoivid
