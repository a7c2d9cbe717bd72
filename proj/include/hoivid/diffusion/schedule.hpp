#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hoivid/core/tensor.hpp"

namespace hoivid {

// Variance-preserving cosine schedule over t in [0, T].
// alpha[t]^2 + sigma[t]^2 = 1, alpha[0] = 1 (sigma[0] = 0), sigma[T] ~= 1.
class NoiseSchedule {
public:
    explicit NoiseSchedule(int64_t timesteps = 1000) : timesteps_(timesteps) {
        if (timesteps < 1) throw std::invalid_argument("schedule: timesteps must be >= 1");
        alpha_.resize(static_cast<size_t>(timesteps + 1));
        sigma_.resize(static_cast<size_t>(timesteps + 1));
        const double s = 0.008;
        const double denom = std::cos(s / (1.0 + s) * M_PI / 2.0);
        for (int64_t t = 0; t <= timesteps; ++t) {
            const double u = static_cast<double>(t) / static_cast<double>(timesteps);
            double abar = std::cos((u + s) / (1.0 + s) * M_PI / 2.0) / denom;
            abar = abar * abar;
            abar = std::min(1.0, std::max(abar, kMinAlphaBar));
            if (t == 0) abar = 1.0;
            alpha_[static_cast<size_t>(t)] = std::sqrt(abar);
            sigma_[static_cast<size_t>(t)] = std::sqrt(1.0 - abar);
        }
    }

    int64_t timesteps() const { return timesteps_; }

    double alpha(int64_t t) const {
        check(t);
        return alpha_[static_cast<size_t>(t)];
    }
    double sigma(int64_t t) const {
        check(t);
        return sigma_[static_cast<size_t>(t)];
    }

    // Z_t = alpha_t Z_0 + sigma_t eps. At t = 0 this is the identity on Z_0.
    template <typename T>
    Tensor<T> add_noise(const Tensor<T>& z0, int64_t t, const Tensor<T>& eps) const {
        check(t);
        if (!z0.same_shape(eps))
            throw std::invalid_argument("add_noise: eps shape " + eps.shape_str() +
                                        " != Z_0 shape " + z0.shape_str());
        const T a = static_cast<T>(alpha(t)), s = static_cast<T>(sigma(t));
        Tensor<T> zt(z0.shape());
        for (int64_t i = 0; i < z0.numel(); ++i) zt[i] = a * z0[i] + s * eps[i];
        return zt;
    }

private:
    void check(int64_t t) const {
        if (t < 0 || t > timesteps_)
            throw std::out_of_range("schedule: t = " + std::to_string(t) + " outside [0, " +
                                    std::to_string(timesteps_) + "]");
    }

    static constexpr double kMinAlphaBar = 1e-5;
    int64_t timesteps_;
    std::vector<double> alpha_, sigma_;
};

}  // namespace hoivid
