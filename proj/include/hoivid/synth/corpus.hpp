#pragma once

#include <optional>

#include "hoivid/synth/scene.hpp"

namespace hoivid {

struct CorpusCounts {
    int64_t train_hoi = 8;
    int64_t train_human_only = 4;
    int64_t finetune_objects = 5;  // mirrors the five simultaneously tuned products
    int64_t test_clips = 2;
};

struct CorpusConfig {
    std::string root;
    uint64_t seed = 7;
    double fps = 8.0;
    int64_t train_frames = 24;
    double finetune_seconds = 60.0;  // per-object fine-tune footage
    int64_t finetune_clip_frames = 40;
    int64_t test_frames = 16;
    int64_t test_object_index = 0;  // which fine-tune object the held-out clips use
    std::vector<std::array<int64_t, 2>> train_resolutions{{64, 96}, {96, 160}};  // {H, W}
    std::array<int64_t, 2> eval_resolution{96, 160};
    CorpusCounts counts;
};

struct RecordEntry {
    std::string id;
    std::string split;      // train | finetune | test
    std::string source;     // hoi | human_only
    std::string object_id;  // empty for human-only
    int64_t anchor_id = 0;
    int64_t frames = 0;
    double fps = 0;
    std::vector<std::string> resolutions;  // e.g. "96x160"
    std::string path;                      // absolute record directory
};

struct Manifest {
    uint64_t seed = 0;
    double fps = 0;
    std::string root;
    std::vector<RecordEntry> records;

    static Manifest load(const std::string& root);

    std::vector<size_t> select(const std::string& split, const std::string& source,
                               const std::string& object_id = "") const {
        std::vector<size_t> out;
        for (size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            if (!split.empty() && r.split != split) continue;
            if (!source.empty() && r.source != source) continue;
            if (!object_id.empty() && r.object_id != object_id) continue;
            out.push_back(i);
        }
        return out;
    }
};

// Renders the whole synthetic corpus (train/finetune/test splits at the
// configured resolutions) and writes index.json. Deterministic per seed.
Manifest generate_corpus(const CorpusConfig& cfg);

// Deterministic palette/object derivations (exposed for tests and eval).
AnchorPalette anchor_palette(uint64_t corpus_seed, int64_t anchor_id, bool held_out);
ObjectSpec object_spec_for(uint64_t corpus_seed, const std::string& object_id);
std::string resolution_key(int64_t height, int64_t width);

}  // namespace hoivid
