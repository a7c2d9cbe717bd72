#pragma once

#include "hoivid/core/rng.hpp"

namespace hoivid {

// Ratio-mixing batch sampler: each draw picks the primary pool with probability
// `ratio`, then a uniform element of that pool. Seeded and reproducible; the
// i-th draw is a pure function of (seed, i), so training can resume mid-stream.
class MixingSampler {
public:
    MixingSampler(std::vector<size_t> primary, std::vector<size_t> secondary, double ratio,
                  uint64_t seed)
        : primary_(std::move(primary)), secondary_(std::move(secondary)), ratio_(ratio), seed_(seed) {
        if (ratio < 0.0 || ratio > 1.0)
            throw std::invalid_argument("mixing_sampler: ratio must be in [0,1]");
        if (ratio > 0.0 && primary_.empty())
            throw std::invalid_argument("mixing_sampler: primary source is empty");
        if (ratio < 1.0 && secondary_.empty())
            throw std::invalid_argument("mixing_sampler: secondary source is empty");
    }

    size_t draw(uint64_t index) const {
        Rng rng(seed_stream(seed_, "mix", index));
        const bool primary = rng.uniform() < ratio_;
        const auto& pool = primary ? primary_ : secondary_;
        return pool[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(pool.size())))];
    }

    double ratio() const { return ratio_; }

private:
    std::vector<size_t> primary_, secondary_;
    double ratio_;
    uint64_t seed_;
};

}  // namespace hoivid
