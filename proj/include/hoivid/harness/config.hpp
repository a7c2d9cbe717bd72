#pragma once

#include <array>
#include <string>

#include <json.hpp>

#include "hoivid/synth/corpus.hpp"

namespace hoivid {

struct StageConfig {
    int64_t iterations = 0;
    std::array<int64_t, 2> resolution{96, 160};  // {H, W}
    int64_t frames_per_sample = 10;
    double lr = 1e-4;
    int64_t warmup = 300;
    double mix_ratio = 0.65;  // primary-source probability
    double eta = 1.0;
    double cfg_dropout = 0.1;
    int64_t batch_size = 1;
    int64_t checkpoint_every = 500;
};

struct ModelConfig {
    int64_t latent_channels = 8;
    int64_t base_channels = 64;
    std::vector<int64_t> channel_mult{1, 2, 4};
    int64_t gn_groups = 8;
    int64_t temb_dim = 128;
    int64_t timesteps = 1000;
    bool temporal_layers = true;
    // embedders (oracle): token grid and width
    std::string embedder_name = "oracle";
    std::array<int64_t, 2> embed_grid{3, 3};
    int64_t embed_width = 32;
    // fusion
    int64_t fusion_detail_rows = 16;
    int64_t fusion_attn_inner = 32;
    // motion condition encoders: 8 hidden channel counts, 9th layer = base_channels
    std::vector<int64_t> encoder_hidden{16, 16, 24, 24, 32, 32, 48, 48};
};

struct AutoencoderConfig {
    int64_t base_channels = 32;
    int64_t iterations = 1500;
    double lr = 1e-3;
    int64_t batch_frames = 8;
};

struct SamplingConfig {
    int64_t steps = 25;
    double cfg_scale = 4.0;
    int64_t window = 10;
    int64_t overlap = 4;
};

// Ablation toggles; all on for the full system.
struct Toggles {
    bool dual_adapter = true;
    bool multiview_attn = true;
    bool motion_injection = true;
    bool reweight_loss = true;
    bool finetune = true;
};

struct RunConfig {
    uint64_t seed = 7;
    std::string dataset_root = "data/corpus";
    std::string out_dir = "runs/default";
    int threads = 1;

    ModelConfig model;
    AutoencoderConfig autoencoder;
    StageConfig stage1{2000, {64, 96}, 10, 1e-4, 300, 0.65, 1.0, 0.1, 1, 500};
    StageConfig stage2{600, {96, 160}, 6, 5e-5, 100, 0.65, 1.0, 0.1, 1, 300};
    StageConfig finetune{500, {96, 160}, 6, 1e-5, 100, 0.80, 1.0, 0.1, 1, 250};
    SamplingConfig sampling;
    CorpusConfig synth;
    Toggles toggles;

    static RunConfig defaults();
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;

    const StageConfig& stage(int n) const {
        if (n == 1) return stage1;
        if (n == 2) return stage2;
        throw std::invalid_argument("config: stage must be 1 or 2");
    }

    void validate() const;
};

}  // namespace hoivid
