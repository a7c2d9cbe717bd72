#include "hoivid/harness/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "hoivid/core/blas.hpp"
#include "hoivid/core/serialize.hpp"
#include "hoivid/data/archive.hpp"
#include "hoivid/motion/occlusion.hpp"

namespace fs = std::filesystem;

namespace hoivid {

namespace {
double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}
}  // namespace

Pipeline::Pipeline(const RunConfig& cfg, bool open_dataset)
    : cfg_(cfg), sched_(cfg.model.timesteps) {
    set_blas_threads(cfg_.threads);
    build_models();
    collect_params();
    adam_ = nn::Adam<float>(trainable_);
    ae_adam_ = nn::Adam<float>(ae_params_);
    if (open_dataset && fs::exists(cfg_.dataset_root + "/index.json")) {
        manifest_ = Manifest::load(cfg_.dataset_root);
        dataset_open_ = true;
    }
}

void Pipeline::build_models() {
    EmbedderConfig ec;
    ec.name = cfg_.model.embedder_name;
    ec.grid_h = cfg_.model.embed_grid[0];
    ec.grid_w = cfg_.model.embed_grid[1];
    ec.width = cfg_.model.embed_width;
    ec.seed = cfg_.seed;
    embedder_ = EmbedderRegistry::instance().create(ec);

    Rng ae_rng(seed_stream(cfg_.seed, "init/ae"));
    ae_ = std::make_unique<FrameAutoencoder<float>>(cfg_.model.latent_channels,
                                                    cfg_.autoencoder.base_channels, ae_rng);

    DenoiserConfig dc;
    dc.latent_channels = cfg_.model.latent_channels;
    dc.base_channels = cfg_.model.base_channels;
    dc.channel_mult = cfg_.model.channel_mult;
    dc.gn_groups = cfg_.model.gn_groups;
    dc.temb_dim = cfg_.model.temb_dim;
    dc.human_width = cfg_.model.embed_width;
    dc.object_width = cfg_.model.embed_width;
    dc.temporal_layers = cfg_.model.temporal_layers;
    dc.adapter_mode = cfg_.toggles.dual_adapter ? AdapterMode::dual : AdapterMode::fused_single;
    Rng unet_rng(seed_stream(cfg_.seed, "init/unet"));
    unet_ = std::make_unique<CondUNet<float>>(dc, unet_rng);

    FusionConfig fc;
    fc.tokens_per_view = embedder_->config().tokens();
    fc.width = cfg_.model.embed_width;
    fc.views = 3;
    fc.detail_rows = cfg_.model.fusion_detail_rows;
    fc.attn_inner = cfg_.model.fusion_attn_inner;
    Rng fusion_rng(seed_stream(cfg_.seed, "init/fusion"));
    fusion_ = std::make_unique<MultiViewFusion<float>>(fc, fusion_rng, cfg_.toggles.multiview_attn);

    Rng ed_rng(seed_stream(cfg_.seed, "init/enc_depth"));
    enc_depth_ = std::make_unique<MotionCondEncoder<float>>(1, cfg_.model.encoder_hidden,
                                                            cfg_.model.base_channels, true, ed_rng);
    Rng ep_rng(seed_stream(cfg_.seed, "init/enc_posehand"));
    enc_posehand_ = std::make_unique<MotionCondEncoder<float>>(
        4, cfg_.model.encoder_hidden, cfg_.model.base_channels, true, ep_rng);
}

void Pipeline::collect_params() {
    trainable_.clear();
    unet_->params(trainable_, "unet");
    fusion_->params(trainable_, "fusion");
    enc_depth_->params(trainable_, "enc_depth");
    enc_posehand_->params(trainable_, "enc_posehand");
    ae_params_.clear();
    ae_->params(ae_params_, "ae");
}

TensorF Pipeline::encode_frames(const std::vector<Raster>& frames) {
    if (frames.empty()) throw std::invalid_argument("encode_frames: no frames");
    const int64_t f = static_cast<int64_t>(frames.size());
    const int64_t h = frames[0].dim(1), w = frames[0].dim(2);
    TensorF batch({f, 3, h, w});
    for (int64_t i = 0; i < f; ++i) {
        const auto& fr = frames[static_cast<size_t>(i)];
        if (fr.dim(1) != h || fr.dim(2) != w)
            throw std::invalid_argument("encode_frames: frame dimension mismatch at frame " +
                                        std::to_string(i));
        std::copy(fr.data(), fr.data() + fr.numel(), batch.data() + i * 3 * h * w);
    }
    auto z = ae_->encode(batch);
    z *= latent_scale_;
    return z;
}

std::vector<Raster> Pipeline::decode_latents(const TensorF& latents) {
    TensorF z = latents;
    z *= 1.0f / latent_scale_;
    auto frames = ae_->decode(z);
    std::vector<Raster> out;
    const int64_t f = frames.dim(0), h = frames.dim(2), w = frames.dim(3);
    for (int64_t i = 0; i < f; ++i) {
        Raster fr({3, h, w});
        std::copy(frames.data() + i * 3 * h * w, frames.data() + (i + 1) * 3 * h * w, fr.data());
        out.push_back(std::move(fr));
    }
    return out;
}

// ---- dataset cache ----------------------------------------------------------

const ClipCache& Pipeline::clip(size_t record_idx, const std::array<int64_t, 2>& resolution) {
    const std::string key = resolution_key(resolution[0], resolution[1]);
    const auto cache_key = std::make_pair(record_idx, key);
    auto it = cache_.find(cache_key);
    if (it != cache_.end()) return it->second;
    if (!ae_trained_) throw std::runtime_error("clip cache: autoencoder not trained yet");

    const auto& rec = manifest_.records.at(record_idx);
    const std::string res_dir = rec.path + "/" + key;
    if (!fs::exists(res_dir))
        throw std::runtime_error("clip cache: record " + rec.id + " lacks resolution " + key);

    ClipCache c;
    c.hoi = rec.source == "hoi";
    auto frames = read_frames_dir(res_dir + "/frames");
    auto streams = read_condition_archive(res_dir + "/conditions");
    c.frames = static_cast<int64_t>(frames.size());
    c.height = resolution[0];
    c.width = resolution[1];
    c.latents = encode_frames(frames);

    const auto ref_human = read_png(res_dir + "/refs/human.png");
    c.ref_h_latent = encode_frames({ref_human});
    c.f_human = embed_human(ref_human, *embedder_).cast<float>();

    const std::string stem = rec.object_id.empty() ? "object" : rec.object_id;
    std::array<Raster, 3> views{read_png(res_dir + "/refs/" + stem + "_left.png"),
                                read_png(res_dir + "/refs/" + stem + "_front.png"),
                                read_png(res_dir + "/refs/" + stem + "_right.png")};
    c.ref_o_latent = encode_frames({views[1]});
    auto emb = embed_object_views(views, *embedder_);
    for (auto& e : emb) c.view_embeddings.push_back(e.cast<float>());

    // motion encoder inputs at pixel resolution
    const int64_t H = c.height, W = c.width;
    c.depth_in = TensorF({c.frames, 1, H, W});
    c.posehand_in = TensorF({c.frames, 4, H, W});
    for (int64_t fi = 0; fi < c.frames; ++fi) {
        const auto& od = streams.obj_depth[static_cast<size_t>(fi)];
        // per-clip min-max normalization over the object support
        float dmin = 1e9f, dmax = -1e9f;
        for (int64_t i = 0; i < od.numel(); ++i)
            if (od[i] > 0) {
                dmin = std::min(dmin, od[i]);
                dmax = std::max(dmax, od[i]);
            }
        float* dst = c.depth_in.data() + fi * H * W;
        for (int64_t i = 0; i < od.numel(); ++i)
            dst[i] = od[i] > 0
                         ? (dmax > dmin ? 0.05f + 0.95f * (od[i] - dmin) / (dmax - dmin) : 1.0f)
                         : 0.0f;

        const auto masked_hand =
            occlusion_mask_hands(streams.hand_render[static_cast<size_t>(fi)],
                                 streams.hand_depth[static_cast<size_t>(fi)],
                                 streams.obj_mask[static_cast<size_t>(fi)],
                                 streams.obj_depth[static_cast<size_t>(fi)]);
        const auto& pr = streams.pose_render[static_cast<size_t>(fi)];
        std::copy(pr.data(), pr.data() + 3 * H * W, c.posehand_in.data() + (fi * 4) * H * W);
        std::copy(masked_hand.data(), masked_hand.data() + H * W,
                  c.posehand_in.data() + (fi * 4 + 3) * H * W);
    }
    c.imask = build_interaction_mask(streams.obj_mask, streams.hand_mask,
                                     FrameAutoencoder<float>::kFactor);
    return cache_.emplace(cache_key, std::move(c)).first->second;
}

TensorF Pipeline::repeat_frames(const TensorF& single, int64_t frames) const {
    const int64_t per = single.numel();
    TensorF out({frames, single.dim(1), single.dim(2), single.dim(3)});
    for (int64_t f = 0; f < frames; ++f)
        std::copy(single.data(), single.data() + per, out.data() + f * per);
    return out;
}

TensorF Pipeline::slice_frames(const TensorF& t, int64_t start, int64_t count) {
    std::vector<int64_t> shape = t.shape();
    shape[0] = count;
    TensorF out(shape);
    const int64_t per = t.numel() / t.dim(0);
    std::copy(t.data() + start * per, t.data() + (start + count) * per, out.data());
    return out;
}

InteractionMask Pipeline::slice_mask(const InteractionMask& m, int64_t start, int64_t count) const {
    InteractionMask out;
    out.latent_mask = TensorF({count, m.latent_mask.dim(1), m.latent_mask.dim(2)});
    const int64_t per = m.latent_mask.dim(1) * m.latent_mask.dim(2);
    std::copy(m.latent_mask.data() + start * per, m.latent_mask.data() + (start + count) * per,
              out.latent_mask.data());
    out.area_total = m.area_total;
    for (int64_t i = start; i < start + count; ++i) {
        out.per_frame_obj.push_back(m.per_frame_obj[static_cast<size_t>(i)]);
        out.per_frame_hand.push_back(m.per_frame_hand[static_cast<size_t>(i)]);
        out.area_obj += m.per_frame_obj[static_cast<size_t>(i)] / static_cast<double>(count);
        out.area_hand += m.per_frame_hand[static_cast<size_t>(i)] / static_cast<double>(count);
    }
    return out;
}

BundleF Pipeline::make_bundle(const ClipCache& c, int64_t start, int64_t frames, bool dropped,
                              bool track_fusion) {
    BundleF b;
    if (dropped) {
        b.ref_human = TensorF({frames, cfg_.model.latent_channels, c.ref_h_latent.dim(2),
                               c.ref_h_latent.dim(3)});
        b.ref_object = TensorF(b.ref_human.shape());
        b.f_human = TensorF({c.f_human.dim(0), c.f_human.dim(1)});
        b.f_object = TensorF({fusion_->output_rows(), cfg_.model.embed_width});
        b.cfg_dropped = true;
        if (cfg_.toggles.motion_injection) {
            const int64_t h = c.ref_h_latent.dim(2), w = c.ref_h_latent.dim(3);
            b.motion_depth = TensorF({frames, cfg_.model.base_channels, h, w});
            b.motion_posehand = TensorF({frames, cfg_.model.base_channels, h, w});
        }
        return b;
    }
    b.ref_human = repeat_frames(c.ref_h_latent, frames);
    b.ref_object = repeat_frames(c.ref_o_latent, frames);
    b.f_human = c.f_human;
    b.f_object = fusion_->forward(c.view_embeddings);
    (void)track_fusion;
    if (cfg_.toggles.motion_injection) {
        b.motion_depth = enc_depth_->forward(slice_frames(c.depth_in, start, frames));
        b.motion_posehand = enc_posehand_->forward(slice_frames(c.posehand_in, start, frames));
    }
    return b;
}

// ---- autoencoder training ---------------------------------------------------

void Pipeline::train_autoencoder() {
    if (!dataset_open_) throw std::runtime_error("train_autoencoder: dataset not found at " +
                                                 cfg_.dataset_root);
    const auto pool = manifest_.select("train", "");
    if (pool.empty()) throw std::runtime_error("train_autoencoder: empty train split");

    fs::create_directories(cfg_.out_dir);
    std::ofstream log(cfg_.out_dir + "/ae_log.ndjson", std::ios::trunc);

    // preload pixel frames once
    struct FrameRef {
        size_t rec;
        std::string res;
    };
    std::vector<std::pair<FrameRef, std::vector<Raster>>> data;
    for (size_t idx : pool) {
        const auto& rec = manifest_.records[idx];
        for (const auto& key : rec.resolutions)
            data.push_back({{idx, key}, read_frames_dir(rec.path + "/" + key + "/frames")});
    }

    const auto& ac = cfg_.autoencoder;
    const double t0 = now_seconds();
    for (int64_t it = 0; it < ac.iterations; ++it) {
        Rng rng(seed_stream(cfg_.seed, "ae_step", static_cast<uint64_t>(it)));
        nn::zero_grads(ae_params_);
        double loss_acc = 0;
        // one same-resolution mini batch per iteration
        const auto& group = data[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(data.size())))];
        const auto& frames = group.second;
        const int64_t bs = std::min<int64_t>(ac.batch_frames, static_cast<int64_t>(frames.size()));
        TensorF batch({bs, 3, frames[0].dim(1), frames[0].dim(2)});
        for (int64_t b = 0; b < bs; ++b) {
            const auto& fr = frames[static_cast<size_t>(
                rng.uniform_int(static_cast<int64_t>(frames.size())))];
            std::copy(fr.data(), fr.data() + fr.numel(), batch.data() + b * fr.numel());
        }
        auto z = ae_->encode(batch);
        auto rec = ae_->decode(z);
        TensorF grad(rec.shape());
        const double inv_n = 1.0 / static_cast<double>(rec.numel());
        for (int64_t i = 0; i < rec.numel(); ++i) {
            const double d = static_cast<double>(rec[i]) - static_cast<double>(batch[i]);
            loss_acc += d * d * inv_n;
            grad[i] = static_cast<float>(2.0 * d * inv_n);
        }
        auto gz = ae_->decode_backward(grad);
        ae_->encode_backward(gz);
        ae_adam_.step(ae_params_, ac.lr);
        if (!std::isfinite(loss_acc))
            throw std::runtime_error("train_autoencoder: non-finite loss at iteration " +
                                     std::to_string(it));
        if (it % 50 == 0 || it + 1 == ac.iterations)
            log << "{\"iteration\":" << it << ",\"loss\":" << loss_acc
                << ",\"seconds\":" << now_seconds() - t0 << "}\n";
    }

    // latent scale: unit global std over a corpus sample
    double sq = 0, mean = 0;
    int64_t n = 0;
    latent_scale_ = 1.0f;
    for (size_t i = 0; i < std::min<size_t>(data.size(), 8); ++i) {
        const auto& frames = data[i].second;
        std::vector<Raster> sample(frames.begin(),
                                   frames.begin() + std::min<size_t>(frames.size(), 8));
        auto z = encode_frames(sample);
        for (int64_t k = 0; k < z.numel(); ++k) {
            mean += z[k];
            sq += static_cast<double>(z[k]) * static_cast<double>(z[k]);
            ++n;
        }
    }
    mean /= static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - mean * mean;
    latent_scale_ = static_cast<float>(1.0 / std::sqrt(std::max(var, 1e-8)));
    ae_trained_ = true;
    completed_ = "ae";
    cache_.clear();
}

double Pipeline::autoencoder_psnr(int64_t max_frames) {
    const auto pool = manifest_.select("test", "");
    if (pool.empty()) throw std::runtime_error("autoencoder_psnr: no test split");
    double acc = 0;
    int64_t n = 0;
    for (size_t idx : pool) {
        const auto& rec = manifest_.records[idx];
        const auto frames = read_frames_dir(rec.path + "/" + rec.resolutions.back() + "/frames");
        for (const auto& fr : frames) {
            if (n >= max_frames) break;
            TensorF one({1, 3, fr.dim(1), fr.dim(2)});
            std::copy(fr.data(), fr.data() + fr.numel(), one.data());
            auto rec_frames = ae_->decode(ae_->encode(one));
            Raster out({3, fr.dim(1), fr.dim(2)});
            std::copy(rec_frames.data(), rec_frames.data() + rec_frames.numel(), out.data());
            acc += psnr(fr, out);
            ++n;
        }
    }
    return acc / static_cast<double>(std::max<int64_t>(n, 1));
}

// ---- diffusion training -----------------------------------------------------

double Pipeline::train_step_loss(const TensorF& z0, BundleF& bundle, const InteractionMask& mask,
                                 double eta, int64_t t, const TensorF& eps, bool reweight,
                                 bool backprop) {
    if (t < 1 || t > sched_.timesteps())
        throw std::out_of_range("train_step: t outside [1, T]");
    auto zt = sched_.add_noise(z0, t, eps);
    auto pred = unet_->forward(zt, bundle, t);
    if (!pred.all_finite())
        throw std::runtime_error("train_step: non-finite denoiser output (component: denoiser)");

    TensorF err(pred.shape());
    for (int64_t i = 0; i < pred.numel(); ++i) {
        const float d = pred[i] - eps[i];
        err[i] = d * d;
    }
    double loss;
    TensorF weights;
    if (reweight) {
        weights = reweight_weights<float>(mask, eta, err.shape());
        loss = hoi_reweighted_loss(err, mask, eta);
    } else {
        weights = TensorF(err.shape(), 1.0f);
        loss = static_cast<double>(err.template cast<double>().mean());
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("train_step: non-finite loss (component: " +
                                 std::string(reweight ? "hoi_reweighted_loss" : "plain mse") + ")");
    if (backprop) {
        TensorF grad(pred.shape());
        const float inv_n = 1.0f / static_cast<float>(pred.numel());
        for (int64_t i = 0; i < pred.numel(); ++i)
            grad[i] = weights[i] * 2.0f * (pred[i] - eps[i]) * inv_n;
        unet_->backward(grad);
    }
    if (reweight)
        ++reweighted_steps_;
    else
        ++plain_steps_;
    return loss;
}

void Pipeline::run_training_loop(const StageConfig& sc, const std::string& tag,
                                 const MixingSampler& mix) {
    fs::create_directories(cfg_.out_dir);
    std::ofstream log(cfg_.out_dir + "/" + tag + "_log.ndjson",
                      iteration_ > 0 ? std::ios::app : std::ios::trunc);
    in_progress_ = tag;
    const double t0 = now_seconds();

    for (int64_t it = iteration_; it < sc.iterations; ++it) {
        const double lr =
            sc.warmup > 0
                ? sc.lr * std::min(1.0, static_cast<double>(it) / static_cast<double>(sc.warmup))
                : sc.lr;
        nn::zero_grads(trainable_);
        double loss_acc = 0;
        bool any_fusion = false, any_motion = false;
        for (int64_t b = 0; b < sc.batch_size; ++b) {
            const uint64_t sub = static_cast<uint64_t>(it * sc.batch_size + b);
            Rng rng(seed_stream(cfg_.seed, "step/" + tag, sub));
            const size_t rec_idx = mix.draw(sub);
            const auto& c = clip(rec_idx, sc.resolution);
            const int64_t f = std::min(sc.frames_per_sample, c.frames);
            const int64_t start = rng.uniform_int(c.frames - f + 1);
            const int64_t t = 1 + rng.uniform_int(sched_.timesteps());
            const bool dropped = rng.uniform() < sc.cfg_dropout;

            auto z0 = slice_frames(c.latents, start, f);
            TensorF eps(z0.shape());
            rng.fill_normal(eps);
            auto bundle = make_bundle(c, start, f, dropped, true);
            auto wmask = slice_mask(c.imask, start, f);

            loss_acc += train_step_loss(z0, bundle, wmask, sc.eta, t, eps,
                                        cfg_.toggles.reweight_loss, true);
            if (!dropped) {
                any_fusion = true;
                // fusion gradient from the adapter sockets
                fusion_->backward(unet_->grad_f_object());
                if (cfg_.toggles.motion_injection) {
                    any_motion = true;
                    enc_depth_->backward(unet_->grad_motion());
                    enc_posehand_->backward(unet_->grad_motion());
                }
            }
        }
        (void)any_fusion;
        (void)any_motion;
        loss_acc /= static_cast<double>(sc.batch_size);
        adam_.step(trainable_, lr);
        log_line(log, it, loss_acc, lr, now_seconds() - t0, cfg_.toggles.reweight_loss);
        iteration_ = it + 1;
        if (sc.checkpoint_every > 0 && (it + 1) % sc.checkpoint_every == 0 &&
            it + 1 < sc.iterations)
            save_checkpoint(cfg_.out_dir + "/" + tag + "_iter" + std::to_string(it + 1) + ".ckpt");
    }
    completed_ = tag;
    in_progress_.clear();
    iteration_ = 0;
    save_checkpoint(cfg_.out_dir + "/" + tag + "_final.ckpt");
}

void Pipeline::log_line(std::ofstream& log, int64_t iteration, double loss, double lr,
                        double seconds, bool reweighted) {
    nlohmann::json j{{"iteration", iteration},
                     {"loss", loss},
                     {"lr", lr},
                     {"seconds", seconds},
                     {"loss_path", reweighted ? "reweighted" : "plain"}};
    log << j.dump() << "\n";
}

void Pipeline::train_stage(int stage_num) {
    if (!dataset_open_) throw std::runtime_error("train_stage: dataset not found");
    const StageConfig& sc = cfg_.stage(stage_num);
    if (stage_num == 1 && !ae_trained_) train_autoencoder();
    if (stage_num == 2 && completed_ != "stage1" && in_progress_ != "stage2")
        throw std::runtime_error("train_stage: stage 2 requires a stage-1 checkpoint");
    if (in_progress_ != ("stage" + std::to_string(stage_num))) iteration_ = 0;

    const auto hoi = manifest_.select("train", "hoi");
    const auto human = manifest_.select("train", "human_only");
    MixingSampler mix(hoi, human, sc.mix_ratio,
                      seed_stream(cfg_.seed, "mix/stage" + std::to_string(stage_num)));
    run_training_loop(sc, "stage" + std::to_string(stage_num), mix);
}

void Pipeline::finetune_object(const std::string& object_id) {
    if (!dataset_open_) throw std::runtime_error("finetune: dataset not found");
    if (completed_ != "stage2" && in_progress_ != "finetune")
        throw std::runtime_error("finetune: base checkpoint must be trained through stage 2");
    const auto primary = manifest_.select("finetune", "hoi", object_id);
    if (primary.empty())
        throw std::runtime_error("finetune: no fine-tune records for object " + object_id);
    const auto human = manifest_.select("train", "human_only");
    if (in_progress_ != "finetune") iteration_ = 0;
    MixingSampler mix(primary, human, cfg_.finetune.mix_ratio,
                      seed_stream(cfg_.seed, "mix/finetune/" + object_id));
    run_training_loop(cfg_.finetune, "finetune", mix);
}

// ---- inference --------------------------------------------------------------

InferResult Pipeline::infer(const InferRequest& req) {
    if (req.conditions.frames() == 0) throw std::invalid_argument("infer: missing conditions");
    const int64_t F = static_cast<int64_t>(req.conditions.frames());
    for (const auto* s : {&req.conditions.hand_render, &req.conditions.hand_depth,
                          &req.conditions.obj_depth, &req.conditions.obj_mask,
                          &req.conditions.hand_mask})
        if (static_cast<int64_t>(s->size()) != F)
            throw std::invalid_argument("infer: condition streams are misaligned");
    if (static_cast<int64_t>(req.conditions.keypoints.size()) != F)
        throw std::invalid_argument("infer: keypoint stream misaligned");

    InferResult res;
    res.transform = estimate_similarity_torso(req.conditions.keypoints[0], req.ref_pose);
    res.aligned = apply_alignment(res.transform, req.conditions);

    const int64_t H = req.ref_human.dim(1), W = req.ref_human.dim(2);
    const int64_t h = H / FrameAutoencoder<float>::kFactor,
                  w = W / FrameAutoencoder<float>::kFactor;
    const int64_t c_lat = cfg_.model.latent_channels;

    // conditioning pieces shared by all windows
    auto ref_h_latent = encode_frames({req.ref_human});
    auto ref_o_latent = encode_frames({req.object_views[1]});
    auto f_h = embed_human(req.ref_human, *embedder_).cast<float>();
    auto emb = embed_object_views(req.object_views, *embedder_);
    std::vector<TensorF> view_embeddings;
    for (auto& e : emb) view_embeddings.push_back(e.cast<float>());
    auto f_o = fusion_->forward(view_embeddings);

    TensorF depth_in({F, 1, H, W}), posehand_in({F, 4, H, W});
    for (int64_t fi = 0; fi < F; ++fi) {
        const auto& od = res.aligned.obj_depth[static_cast<size_t>(fi)];
        float dmin = 1e9f, dmax = -1e9f;
        for (int64_t i = 0; i < od.numel(); ++i)
            if (od[i] > 0) {
                dmin = std::min(dmin, od[i]);
                dmax = std::max(dmax, od[i]);
            }
        float* dst = depth_in.data() + fi * H * W;
        for (int64_t i = 0; i < od.numel(); ++i)
            dst[i] = od[i] > 0
                         ? (dmax > dmin ? 0.05f + 0.95f * (od[i] - dmin) / (dmax - dmin) : 1.0f)
                         : 0.0f;
        const auto masked = occlusion_mask_hands(res.aligned.hand_render[static_cast<size_t>(fi)],
                                                 res.aligned.hand_depth[static_cast<size_t>(fi)],
                                                 res.aligned.obj_mask[static_cast<size_t>(fi)],
                                                 res.aligned.obj_depth[static_cast<size_t>(fi)]);
        const auto& pr = res.aligned.pose_render[static_cast<size_t>(fi)];
        std::copy(pr.data(), pr.data() + 3 * H * W, posehand_in.data() + (fi * 4) * H * W);
        std::copy(masked.data(), masked.data() + H * W,
                  posehand_in.data() + (fi * 4 + 3) * H * W);
    }
    TensorF motion_depth, motion_posehand;
    if (cfg_.toggles.motion_injection) {
        motion_depth = enc_depth_->forward(depth_in);
        motion_posehand = enc_posehand_->forward(posehand_in);
    }

    auto make_window_bundle = [&](int64_t start, int64_t length) {
        BundleF b;
        b.ref_human = repeat_frames(ref_h_latent, length);
        b.ref_object = repeat_frames(ref_o_latent, length);
        b.f_human = f_h;
        b.f_object = f_o;
        if (cfg_.toggles.motion_injection) {
            b.motion_depth = slice_frames(motion_depth, start, length);
            b.motion_posehand = slice_frames(motion_posehand, start, length);
        }
        return b;
    };

    Rng noise_rng(seed_stream(req.seed, "infer/noise"));
    TensorF noise({F, c_lat, h, w});
    noise_rng.fill_normal(noise);

    const int64_t window = std::min<int64_t>(req.window, F);
    auto latents = fuse_long_video(*unet_, sched_, F, window, std::min(req.overlap, window - 1),
                                   noise, make_window_bundle, req.steps, req.cfg_scale);
    res.frames = decode_latents(latents);
    return res;
}

// ---- checkpointing ----------------------------------------------------------

void Pipeline::save_checkpoint(const std::string& path) const {
    WeightContainer wc;
    wc.meta["config"] = cfg_.to_json();
    wc.meta["schedule"] = {{"timesteps", sched_.timesteps()}};
    wc.meta["latent_scale"] = latent_scale_;
    wc.meta["ae_trained"] = ae_trained_;
    wc.meta["completed"] = completed_;
    wc.meta["in_progress"] = in_progress_;
    wc.meta["iteration"] = iteration_;
    wc.meta["adam_step"] = adam_.step_count();
    wc.meta["toggles"] = {{"dual_adapter", cfg_.toggles.dual_adapter},
                          {"multiview_attn", cfg_.toggles.multiview_attn},
                          {"motion_injection", cfg_.toggles.motion_injection},
                          {"reweight_loss", cfg_.toggles.reweight_loss},
                          {"finetune", cfg_.toggles.finetune}};
    for (const auto& [name, p] : ae_params_) wc.put(name, p->value);
    for (const auto& [name, p] : trainable_) wc.put(name, p->value);
    auto& adam = const_cast<nn::Adam<float>&>(adam_);
    for (size_t i = 0; i < trainable_.size(); ++i) {
        wc.put("opt.m." + trainable_[i].first, adam.moments_m()[i]);
        wc.put("opt.v." + trainable_[i].first, adam.moments_v()[i]);
    }
    fs::create_directories(fs::path(path).parent_path().empty()
                               ? "."
                               : fs::path(path).parent_path().string());
    wc.save(path);
}

void Pipeline::load_checkpoint(const std::string& path) {
    auto wc = WeightContainer::load(path);
    latent_scale_ = wc.meta.at("latent_scale").get<float>();
    ae_trained_ = wc.meta.at("ae_trained").get<bool>();
    completed_ = wc.meta.at("completed").get<std::string>();
    in_progress_ = wc.meta.value("in_progress", std::string());
    iteration_ = wc.meta.at("iteration").get<int64_t>();
    for (const auto& [name, p] : ae_params_) {
        const auto& t = wc.get(name);
        if (!t.same_shape(p->value))
            throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
        p->value = t;
    }
    for (const auto& [name, p] : trainable_) {
        const auto& t = wc.get(name);
        if (!t.same_shape(p->value))
            throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
        p->value = t;
    }
    adam_ = nn::Adam<float>(trainable_);
    adam_.set_step_count(wc.meta.at("adam_step").get<int64_t>());
    for (size_t i = 0; i < trainable_.size(); ++i) {
        adam_.moments_m()[i] = wc.get("opt.m." + trainable_[i].first);
        adam_.moments_v()[i] = wc.get("opt.v." + trainable_[i].first);
    }
    cache_.clear();
}

}  // namespace hoivid
