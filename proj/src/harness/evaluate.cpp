#include "hoivid/harness/evaluate.hpp"

#include <filesystem>

#include "hoivid/core/png_io.hpp"
#include "hoivid/core/serialize.hpp"
#include "hoivid/data/archive.hpp"

namespace fs = std::filesystem;

namespace hoivid {

namespace {

Rgb rgb_from_json(const nlohmann::json& j) {
    return {j.at(0).get<float>(), j.at(1).get<float>(), j.at(2).get<float>()};
}

ColorPrototypes prototypes_from_meta(const nlohmann::json& meta) {
    ColorPrototypes p;
    const auto& obj = meta.at("object");
    p.object_colors = {rgb_from_json(obj.at("base")), rgb_from_json(obj.at("secondary")),
                       rgb_from_json(obj.at("emblem"))};
    const auto& pal = meta.at("palette");
    const Rgb skin = rgb_from_json(pal.at("skin"));
    p.other_colors = {skin,
                      rgb_from_json(pal.at("torso")),
                      rgb_from_json(pal.at("limb")),
                      rgb_from_json(pal.at("hair")),
                      rgb_from_json(pal.at("background")),
                      {skin.r * 0.28f, skin.g * 0.28f, skin.b * 0.28f}};
    return p;
}

}  // namespace

ClipMetrics evaluate_record(Pipeline& pipe, size_t record_idx, const EvalOptions& opts) {
    const auto& rec = pipe.manifest().records.at(record_idx);
    const auto meta = load_json(rec.path + "/meta.json");
    const std::string res_key = rec.resolutions.back();
    const std::string res_dir = rec.path + "/" + res_key;

    InferRequest req;
    req.conditions = read_condition_archive(res_dir + "/conditions");
    req.ref_human = read_png(res_dir + "/refs/human.png");
    req.ref_pose = keypoint_frame_from_json(
        meta.at("resolutions").at(res_key).at("ref_pose"));
    const std::string stem = rec.object_id.empty() ? "object" : rec.object_id;
    req.object_views = {read_png(res_dir + "/refs/" + stem + "_left.png"),
                        read_png(res_dir + "/refs/" + stem + "_front.png"),
                        read_png(res_dir + "/refs/" + stem + "_right.png")};
    const auto& s = pipe.config().sampling;
    req.cfg_scale = s.cfg_scale;
    req.window = s.window;
    req.overlap = s.overlap;
    req.steps = s.steps;
    req.seed = seed_stream(opts.seed, "eval/" + rec.id);

    auto result = pipe.infer(req);
    const int64_t H = req.ref_human.dim(1), W = req.ref_human.dim(2);

    if (!opts.save_dir.empty()) {
        const std::string dir = opts.save_dir + "/" + rec.id;
        write_frames_dir(dir, result.frames, rec.fps);
    }

    const auto prototypes = prototypes_from_meta(meta);
    const Rgb skin = rgb_from_json(meta.at("palette").at("skin"));

    std::vector<Raster> gen_masks;
    std::vector<Raster> crops;
    std::vector<KeypointFrame> gen_hands, gt_hands;
    std::vector<Raster> face_crops;
    const auto& hand_idx = skeleton::hand_indices();

    for (size_t fi = 0; fi < result.frames.size(); ++fi) {
        const auto& frame = result.frames[fi];
        gen_masks.push_back(mask_from_palette(frame, prototypes));
        if (auto c = crop_mask_bbox(frame, gen_masks.back(), 2)) crops.push_back(*c);

        const auto& kps = result.aligned.keypoints[fi];
        KeypointFrame gt;
        for (int idx : hand_idx)
            gt.push_back(idx < static_cast<int>(kps.size()) ? kps[static_cast<size_t>(idx)]
                                                            : Keypoint{0, 0, 0});
        // only the hand centers are detectable from pixels; wrists stay invisible
        KeypointFrame gt_centers{gt[2], gt[3]};
        gt_hands.push_back(gt_centers);
        gen_hands.push_back(detect_hand_centers(frame, skin, gt_centers));

        const auto& head = kps[skeleton::head];
        if (head.visible())
            face_crops.push_back(crop_centered(frame, head.x, head.y,
                                               static_cast<int64_t>(0.12 * static_cast<double>(H))));
    }

    ClipMetrics cm;
    cm.id = rec.id;
    cm.width = W;
    cm.height = H;
    cm.obj_iou = object_iou(gen_masks, result.aligned.obj_mask);
    try {
        cm.obj_cos = crops.empty() ? 0.0
                                   : object_cos(crops, {req.object_views[0], req.object_views[1],
                                                        req.object_views[2]},
                                                pipe.embedder());
    } catch (const std::invalid_argument&) {
        cm.obj_cos = 0.0;
    }
    try {
        cm.lmd_hand = lmd(gen_hands, gt_hands);
    } catch (const std::invalid_argument&) {
        cm.lmd_hand = std::hypot(static_cast<double>(W), static_cast<double>(H));  // no detection
    }
    if (!face_crops.empty()) {
        const auto ref_head = req.ref_pose[skeleton::head];
        const auto ref_face = crop_centered(req.ref_human, ref_head.x, ref_head.y,
                                            static_cast<int64_t>(0.12 * static_cast<double>(H)));
        cm.face_cos = face_cos(face_crops, ref_face, pipe.embedder());
    }
    return cm;
}

MetricReport evaluate_split(Pipeline& pipe, const std::string& split, const EvalOptions& opts) {
    MetricReport report;
    report.embedder_name = pipe.config().model.embedder_name;
    const auto ids = pipe.manifest().select(split, "");
    if (ids.empty()) throw std::runtime_error("evaluate: split '" + split + "' is empty");
    for (size_t idx : ids) report.clips.push_back(evaluate_record(pipe, idx, opts));
    return report;
}

Toggles toggles_for_ablation(const std::string& name) {
    Toggles t;
    if (name == "no_dual_adapter")
        t.dual_adapter = false;
    else if (name == "no_multiview_attn")
        t.multiview_attn = false;
    else if (name == "no_motion_injection")
        t.motion_injection = false;
    else if (name == "no_reweight_loss")
        t.reweight_loss = false;
    else if (name == "no_finetune")
        t.finetune = false;
    else
        throw std::invalid_argument("run_ablation: unknown ablation name '" + name + "'");
    return t;
}

MetricReport run_ablation(const std::string& name, RunConfig cfg,
                          const std::string& reuse_ae_checkpoint) {
    cfg.toggles = toggles_for_ablation(name);
    cfg.out_dir += "/ablate_" + name;
    Pipeline pipe(cfg);
    if (!reuse_ae_checkpoint.empty()) pipe.load_autoencoder_from(reuse_ae_checkpoint);
    pipe.train_stage(1);
    pipe.train_stage(2);
    if (cfg.toggles.finetune) {
        const std::string object_id = "ft_obj_" + std::to_string(cfg.synth.test_object_index);
        pipe.finetune_object(object_id);
    }
    EvalOptions opts;
    opts.seed = cfg.seed;
    opts.save_dir = cfg.out_dir + "/frames";
    auto report = evaluate_split(pipe, "test", opts);
    write_json(cfg.out_dir + "/report.json", report.to_json());
    std::ofstream table(cfg.out_dir + "/table.txt");
    table << report.table();
    return report;
}

}  // namespace hoivid
