#pragma once

#include <functional>

#include "hoivid/diffusion/schedule.hpp"
#include "hoivid/diffusion/unet.hpp"

namespace hoivid {

// Deterministic DDIM update ladder from t = T down to 0.
inline std::vector<int64_t> sample_timesteps(int64_t total, int64_t steps) {
    if (steps < 1) throw std::invalid_argument("sampler: steps must be >= 1");
    std::vector<int64_t> ts;
    for (int64_t k = steps; k >= 1; --k)
        ts.push_back((total * k + steps / 2) / steps);
    ts.push_back(0);
    return ts;
}

// Classifier-free guidance: eps_hat = eps_uncond + scale * (eps_cond - eps_uncond).
// Scales 1 and 0 short-circuit to the conditional / unconditional branch so the
// algebraic identities hold bitwise.
template <typename T>
Tensor<T> cfg_prediction(CondUNet<T>& unet, const Tensor<T>& zt,
                         const ConditioningBundle<T>& bundle, int64_t t, double cfg_scale) {
    if (cfg_scale < 0) throw std::invalid_argument("sampler: cfg_scale must be >= 0");
    if (cfg_scale == 1.0) return unet.forward(zt, bundle, t);
    const auto uncond = bundle.zeroed();
    if (cfg_scale == 0.0) return unet.forward(zt, uncond, t);
    auto eps_c = unet.forward(zt, bundle, t);
    auto eps_u = unet.forward(zt, uncond, t);
    Tensor<T> out(eps_c.shape());
    const T s = static_cast<T>(cfg_scale);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = eps_u[i] + s * (eps_c[i] - eps_u[i]);
    return out;
}

// Denoise from the given initial noise U to an estimated Z_0.
template <typename T>
Tensor<T> sample_from_noise(CondUNet<T>& unet, const NoiseSchedule& sched,
                            const ConditioningBundle<T>& bundle, const Tensor<T>& init_noise,
                            int64_t steps, double cfg_scale) {
    const auto ts = sample_timesteps(sched.timesteps(), steps);
    Tensor<T> z = init_noise;
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        const int64_t t = ts[i], t_next = ts[i + 1];
        auto eps_hat = cfg_prediction(unet, z, bundle, t, cfg_scale);
        const double at = sched.alpha(t), st = sched.sigma(t);
        const double an = sched.alpha(t_next), sn = sched.sigma(t_next);
        for (int64_t j = 0; j < z.numel(); ++j) {
            const double z0_hat = (static_cast<double>(z[j]) - st * static_cast<double>(eps_hat[j])) / at;
            z[j] = static_cast<T>(an * z0_hat + sn * static_cast<double>(eps_hat[j]));
        }
    }
    return z;
}

template <typename T>
Tensor<T> sample(CondUNet<T>& unet, const NoiseSchedule& sched,
                 const ConditioningBundle<T>& bundle, const std::vector<int64_t>& shape,
                 int64_t steps, double cfg_scale, Rng& rng) {
    Tensor<T> u(shape);
    rng.fill_normal(u);
    return sample_from_noise(unet, sched, bundle, u, steps, cfg_scale);
}

struct WindowPlan {
    int64_t start = 0;
    int64_t length = 0;
};

inline std::vector<WindowPlan> plan_windows(int64_t total, int64_t window, int64_t overlap) {
    if (window > total) throw std::invalid_argument("fuse_long_video: window > frame count");
    if (overlap >= window) throw std::invalid_argument("fuse_long_video: overlap >= window");
    std::vector<WindowPlan> plan;
    const int64_t advance = window - overlap;
    int64_t start = 0;
    while (true) {
        if (start + window >= total) {
            plan.push_back({total - window, window});
            break;
        }
        plan.push_back({start, window});
        start += advance;
    }
    return plan;
}

// Long-video generation: per-window sampling over overlapping frame ranges with
// the window's slice of one shared noise sequence, blended by a linear
// cross-fade. Per-frame blend weights sum to 1; a single window reduces to
// sample_from_noise exactly.
template <typename T, typename BundleFn>
Tensor<T> fuse_long_video(CondUNet<T>& unet, const NoiseSchedule& sched, int64_t total_frames,
                          int64_t window, int64_t overlap, const Tensor<T>& noise_full,
                          BundleFn make_window_bundle, int64_t steps, double cfg_scale) {
    const auto plan = plan_windows(total_frames, window, overlap);
    const int64_t c = noise_full.dim(1), h = noise_full.dim(2), w = noise_full.dim(3);
    const int64_t fsize = c * h * w;

    std::vector<Tensor<T>> window_latents;
    window_latents.reserve(plan.size());
    for (const auto& win : plan) {
        Tensor<T> u({win.length, c, h, w});
        std::copy(noise_full.data() + win.start * fsize,
                  noise_full.data() + (win.start + win.length) * fsize, u.data());
        auto bundle = make_window_bundle(win.start, win.length);
        window_latents.push_back(sample_from_noise(unet, sched, bundle, u, steps, cfg_scale));
    }

    // Per frame, contributions are blended with triangular cross-fade weights
    // normalized to sum 1. Frames covered by a single window are copied bitwise.
    Tensor<T> out({total_frames, c, h, w});
    for (int64_t frame = 0; frame < total_frames; ++frame) {
        std::vector<std::pair<size_t, double>> contrib;
        for (size_t wi = 0; wi < plan.size(); ++wi) {
            const int64_t k = frame - plan[wi].start;
            if (k >= 0 && k < plan[wi].length)
                contrib.emplace_back(wi, static_cast<double>(std::min(k + 1, plan[wi].length - k)));
        }
        T* dst = out.data() + frame * fsize;
        if (contrib.size() == 1) {
            const auto& z = window_latents[contrib[0].first];
            const int64_t k = frame - plan[contrib[0].first].start;
            std::copy(z.data() + k * fsize, z.data() + (k + 1) * fsize, dst);
            continue;
        }
        double total_weight = 0;
        for (const auto& [wi, wgt] : contrib) total_weight += wgt;
        for (const auto& [wi, wgt] : contrib) {
            const auto& z = window_latents[wi];
            const int64_t k = frame - plan[wi].start;
            const T lambda = static_cast<T>(wgt / total_weight);
            const T* src = z.data() + k * fsize;
            for (int64_t j = 0; j < fsize; ++j) dst[j] += lambda * src[j];
        }
    }
    return out;
}

}  // namespace hoivid
