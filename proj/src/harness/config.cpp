#include "hoivid/harness/config.hpp"

#include <fstream>

namespace hoivid {

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

void read_stage(const nlohmann::json& j, StageConfig& s) {
    read_if(j, "iterations", s.iterations);
    if (j.contains("resolution")) {
        auto r = j.at("resolution").get<std::vector<int64_t>>();
        if (r.size() != 2) throw std::invalid_argument("config: resolution must be [H, W]");
        s.resolution = {r[0], r[1]};
    }
    read_if(j, "frames_per_sample", s.frames_per_sample);
    read_if(j, "lr", s.lr);
    read_if(j, "warmup", s.warmup);
    read_if(j, "mix_ratio", s.mix_ratio);
    read_if(j, "eta", s.eta);
    read_if(j, "cfg_dropout", s.cfg_dropout);
    read_if(j, "batch_size", s.batch_size);
    read_if(j, "checkpoint_every", s.checkpoint_every);
}

nlohmann::json stage_json(const StageConfig& s) {
    return {{"iterations", s.iterations},
            {"resolution", {s.resolution[0], s.resolution[1]}},
            {"frames_per_sample", s.frames_per_sample},
            {"lr", s.lr},
            {"warmup", s.warmup},
            {"mix_ratio", s.mix_ratio},
            {"eta", s.eta},
            {"cfg_dropout", s.cfg_dropout},
            {"batch_size", s.batch_size},
            {"checkpoint_every", s.checkpoint_every}};
}

}  // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    read_if(j, "seed", c.seed);
    read_if(j, "dataset_root", c.dataset_root);
    read_if(j, "out_dir", c.out_dir);
    read_if(j, "threads", c.threads);
    if (j.contains("model")) {
        const auto& m = j.at("model");
        read_if(m, "latent_channels", c.model.latent_channels);
        read_if(m, "base_channels", c.model.base_channels);
        read_if(m, "channel_mult", c.model.channel_mult);
        read_if(m, "gn_groups", c.model.gn_groups);
        read_if(m, "temb_dim", c.model.temb_dim);
        read_if(m, "timesteps", c.model.timesteps);
        read_if(m, "temporal_layers", c.model.temporal_layers);
        read_if(m, "embedder_name", c.model.embedder_name);
        if (m.contains("embed_grid")) {
            auto g = m.at("embed_grid").get<std::vector<int64_t>>();
            c.model.embed_grid = {g.at(0), g.at(1)};
        }
        read_if(m, "embed_width", c.model.embed_width);
        read_if(m, "fusion_detail_rows", c.model.fusion_detail_rows);
        read_if(m, "fusion_attn_inner", c.model.fusion_attn_inner);
        read_if(m, "encoder_hidden", c.model.encoder_hidden);
    }
    if (j.contains("autoencoder")) {
        const auto& a = j.at("autoencoder");
        read_if(a, "base_channels", c.autoencoder.base_channels);
        read_if(a, "iterations", c.autoencoder.iterations);
        read_if(a, "lr", c.autoencoder.lr);
        read_if(a, "batch_frames", c.autoencoder.batch_frames);
    }
    if (j.contains("stage1")) read_stage(j.at("stage1"), c.stage1);
    if (j.contains("stage2")) read_stage(j.at("stage2"), c.stage2);
    if (j.contains("finetune")) read_stage(j.at("finetune"), c.finetune);
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        read_if(s, "steps", c.sampling.steps);
        read_if(s, "cfg_scale", c.sampling.cfg_scale);
        read_if(s, "window", c.sampling.window);
        read_if(s, "overlap", c.sampling.overlap);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        read_if(s, "fps", c.synth.fps);
        read_if(s, "train_frames", c.synth.train_frames);
        read_if(s, "finetune_seconds", c.synth.finetune_seconds);
        read_if(s, "finetune_clip_frames", c.synth.finetune_clip_frames);
        read_if(s, "test_frames", c.synth.test_frames);
        read_if(s, "test_object_index", c.synth.test_object_index);
        if (s.contains("counts")) {
            const auto& n = s.at("counts");
            read_if(n, "train_hoi", c.synth.counts.train_hoi);
            read_if(n, "train_human_only", c.synth.counts.train_human_only);
            read_if(n, "finetune_objects", c.synth.counts.finetune_objects);
            read_if(n, "test_clips", c.synth.counts.test_clips);
        }
        if (s.contains("train_resolutions")) {
            c.synth.train_resolutions.clear();
            for (const auto& r : s.at("train_resolutions"))
                c.synth.train_resolutions.push_back({r.at(0).get<int64_t>(), r.at(1).get<int64_t>()});
        }
        if (s.contains("eval_resolution")) {
            const auto& r = s.at("eval_resolution");
            c.synth.eval_resolution = {r.at(0).get<int64_t>(), r.at(1).get<int64_t>()};
        }
    }
    c.synth.seed = c.seed;
    c.synth.root = c.dataset_root;
    c.validate();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    return from_json(nlohmann::json::parse(is));
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["dataset_root"] = dataset_root;
    j["out_dir"] = out_dir;
    j["threads"] = threads;
    j["model"] = {{"latent_channels", model.latent_channels},
                  {"base_channels", model.base_channels},
                  {"channel_mult", model.channel_mult},
                  {"gn_groups", model.gn_groups},
                  {"temb_dim", model.temb_dim},
                  {"timesteps", model.timesteps},
                  {"temporal_layers", model.temporal_layers},
                  {"embedder_name", model.embedder_name},
                  {"embed_grid", {model.embed_grid[0], model.embed_grid[1]}},
                  {"embed_width", model.embed_width},
                  {"fusion_detail_rows", model.fusion_detail_rows},
                  {"fusion_attn_inner", model.fusion_attn_inner},
                  {"encoder_hidden", model.encoder_hidden}};
    j["autoencoder"] = {{"base_channels", autoencoder.base_channels},
                        {"iterations", autoencoder.iterations},
                        {"lr", autoencoder.lr},
                        {"batch_frames", autoencoder.batch_frames}};
    j["stage1"] = stage_json(stage1);
    j["stage2"] = stage_json(stage2);
    j["finetune"] = stage_json(finetune);
    j["sampling"] = {{"steps", sampling.steps},
                     {"cfg_scale", sampling.cfg_scale},
                     {"window", sampling.window},
                     {"overlap", sampling.overlap}};
    j["synth"] = {{"fps", synth.fps},
                  {"train_frames", synth.train_frames},
                  {"finetune_seconds", synth.finetune_seconds},
                  {"finetune_clip_frames", synth.finetune_clip_frames},
                  {"test_frames", synth.test_frames},
                  {"test_object_index", synth.test_object_index},
                  {"counts",
                   {{"train_hoi", synth.counts.train_hoi},
                    {"train_human_only", synth.counts.train_human_only},
                    {"finetune_objects", synth.counts.finetune_objects},
                    {"test_clips", synth.counts.test_clips}}}};
    return j;
}

void RunConfig::validate() const {
    for (const StageConfig* s : {&stage1, &stage2, &finetune}) {
        if (s->iterations <= 0) throw std::invalid_argument("config: iterations must be > 0");
        if (s->warmup > s->iterations)
            throw std::invalid_argument("config: warmup exceeds iterations");
        if (s->resolution[0] % 32 != 0 || s->resolution[1] % 32 != 0)
            throw std::invalid_argument(
                "config: resolution must be divisible by 32 (factor 8 plus two 2x levels)");
        if (s->mix_ratio < 0 || s->mix_ratio > 1)
            throw std::invalid_argument("config: mix_ratio must be in [0,1]");
        if (s->eta < 0) throw std::invalid_argument("config: eta must be >= 0");
    }
    if (sampling.cfg_scale < 0) throw std::invalid_argument("config: cfg_scale must be >= 0");
    if (sampling.steps < 1) throw std::invalid_argument("config: sampling steps must be >= 1");
    if (sampling.overlap >= sampling.window)
        throw std::invalid_argument("config: overlap must be < window");
    if (static_cast<int64_t>(model.encoder_hidden.size()) != 8)
        throw std::invalid_argument("config: encoder_hidden needs 8 entries");
}

}  // namespace hoivid
