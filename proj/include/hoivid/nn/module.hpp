#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hoivid/core/rng.hpp"
#include "hoivid/core/tensor.hpp"

namespace hoivid::nn {

template <typename T>
struct Param {
    Tensor<T> value;
    Tensor<T> grad;

    void init(std::vector<int64_t> shape) {
        value = Tensor<T>(shape);
        grad = Tensor<T>(std::move(shape));
    }
    void zero_grad() { grad.zero(); }
};

// Flat named view over a module tree's parameters. Collection order is the
// serialization order, so it must be deterministic.
template <typename T>
using ParamRefs = std::vector<std::pair<std::string, Param<T>*>>;

template <typename T>
void add_param(ParamRefs<T>& refs, const std::string& name, Param<T>& p) {
    refs.emplace_back(name, &p);
}

template <typename T>
int64_t param_count(const ParamRefs<T>& refs) {
    int64_t n = 0;
    for (const auto& [name, p] : refs) n += p->value.numel();
    return n;
}

template <typename T>
void zero_grads(const ParamRefs<T>& refs) {
    for (auto& [name, p] : refs) p->zero_grad();
}

// Kaiming-style init for layers with fan_in inputs.
template <typename T>
void init_kaiming(Param<T>& p, int64_t fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    rng.fill_normal(p.value, std);
}

template <typename T>
void init_scaled(Param<T>& p, double std, Rng& rng) {
    rng.fill_normal(p.value, std);
}

}  // namespace hoivid::nn
