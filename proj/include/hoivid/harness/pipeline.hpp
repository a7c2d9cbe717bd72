#pragma once

#include <map>
#include <memory>

#include "hoivid/appearance/embedder.hpp"
#include "hoivid/appearance/fusion.hpp"
#include "hoivid/diffusion/autoencoder.hpp"
#include "hoivid/diffusion/sampler.hpp"
#include "hoivid/diffusion/unet.hpp"
#include "hoivid/harness/config.hpp"
#include "hoivid/loss/reweight.hpp"
#include "hoivid/motion/cond_encoder.hpp"
#include "hoivid/nn/adam.hpp"
#include "hoivid/synth/mixing.hpp"

namespace hoivid {

using BundleF = ConditioningBundle<float>;

// Preprocessed clip at one resolution: frozen-encoder outputs are cached, the
// trainable fusion runs per step on the cached view embeddings.
struct ClipCache {
    int64_t frames = 0, height = 0, width = 0;
    TensorF latents;                        // [F, c, h, w], scaled
    TensorF ref_h_latent, ref_o_latent;     // [1, c, h, w]
    TensorF f_human;                        // [k_h, m]
    std::vector<TensorF> view_embeddings;   // 3 x [n, m]
    TensorF depth_in;                       // [F, 1, H, W], min-max normalized
    TensorF posehand_in;                    // [F, 4, H, W]: pose RGB + occlusion-masked hand
    InteractionMask imask;                  // whole clip
    bool hoi = false;
};

struct InferRequest {
    Raster ref_human;
    KeypointFrame ref_pose;
    std::array<Raster, 3> object_views;  // left45, front, right45
    ConditionStreams conditions;
    double cfg_scale = 4.0;
    int64_t window = 10;
    int64_t overlap = 4;
    int64_t steps = 25;
    uint64_t seed = 0;
};

struct InferResult {
    std::vector<Raster> frames;
    ConditionStreams aligned;  // conditions after similarity alignment
    SimilarityTransform transform;
};

class Pipeline {
public:
    explicit Pipeline(const RunConfig& cfg, bool open_dataset = true);

    const RunConfig& config() const { return cfg_; }
    const NoiseSchedule& schedule() const { return sched_; }
    const Manifest& manifest() const { return manifest_; }
    float latent_scale() const { return latent_scale_; }
    bool ae_trained() const { return ae_trained_; }
    const std::string& completed() const { return completed_; }

    void train_autoencoder();
    double autoencoder_psnr(int64_t max_frames = 16);  // held-out test frames

    void train_stage(int stage_num);
    void finetune_object(const std::string& object_id);

    InferResult infer(const InferRequest& req);

    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

    // One supervised step on explicit inputs; updates nothing unless asked.
    // Exposed for the determinism / loss-algebra tests.
    double train_step_loss(const TensorF& z0, BundleF& bundle, const InteractionMask& mask,
                           double eta, int64_t t, const TensorF& eps, bool reweight,
                           bool backprop);

    const ClipCache& clip(size_t record_idx, const std::array<int64_t, 2>& resolution);
    BundleF make_bundle(const ClipCache& clip, int64_t start, int64_t frames, bool dropped,
                        bool track_fusion);

    // loss-path counters for the ablation assertion
    int64_t reweighted_steps() const { return reweighted_steps_; }
    int64_t plain_steps() const { return plain_steps_; }

    CondUNet<float>& unet() { return *unet_; }
    MultiViewFusion<float>& fusion() { return *fusion_; }
    FrameAutoencoder<float>& autoencoder() { return *ae_; }
    const OracleEmbedder& embedder() const { return *embedder_; }

    TensorF encode_frames(const std::vector<Raster>& frames);  // scaled latents
    std::vector<Raster> decode_latents(const TensorF& latents);

private:
    void build_models();
    void collect_params();
    void run_training_loop(const StageConfig& sc, const std::string& tag, const MixingSampler& mix);
    void log_line(std::ofstream& log, int64_t iteration, double loss, double lr, double seconds,
                  bool reweighted);
    TensorF repeat_frames(const TensorF& single, int64_t frames) const;
    static TensorF slice_frames(const TensorF& t, int64_t start, int64_t count);
    InteractionMask slice_mask(const InteractionMask& m, int64_t start, int64_t count) const;

    RunConfig cfg_;
    NoiseSchedule sched_;
    Manifest manifest_;
    bool dataset_open_ = false;

    std::shared_ptr<OracleEmbedder> embedder_;
    std::unique_ptr<FrameAutoencoder<float>> ae_;
    std::unique_ptr<CondUNet<float>> unet_;
    std::unique_ptr<MultiViewFusion<float>> fusion_;
    std::unique_ptr<MotionCondEncoder<float>> enc_depth_, enc_posehand_;

    nn::ParamRefs<float> trainable_, ae_params_;
    nn::Adam<float> adam_, ae_adam_;

    float latent_scale_ = 1.0f;
    bool ae_trained_ = false;
    std::string completed_ = "init";   // last finished phase
    std::string in_progress_;          // phase a resumable checkpoint was taken in
    int64_t iteration_ = 0;            // completed iterations within in_progress_

    int64_t reweighted_steps_ = 0, plain_steps_ = 0;

    std::map<std::pair<size_t, std::string>, ClipCache> cache_;
};

}  // namespace hoivid
