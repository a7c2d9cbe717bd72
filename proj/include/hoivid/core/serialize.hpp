#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoivid/core/tensor.hpp"

namespace hoivid {

// Binary weight container: magic, version, length-prefixed JSON header, then
// raw 32-bit little-endian float arrays in header order. The header carries
// config / schedule / bookkeeping under "meta" and the array directory under
// "arrays" ({name, shape}).
class WeightContainer {
public:
    nlohmann::json meta;

    void put(const std::string& name, const Tensor<float>& t) {
        if (index_.count(name)) throw std::invalid_argument("container: duplicate array " + name);
        index_[name] = arrays_.size();
        order_.push_back(name);
        arrays_.push_back(t);
    }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    const Tensor<float>& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("container: missing array " + name);
        return arrays_[it->second];
    }

    const std::vector<std::string>& names() const { return order_; }

    void save(const std::string& path) const;
    static WeightContainer load(const std::string& path);

private:
    std::map<std::string, size_t> index_;
    std::vector<std::string> order_;
    std::vector<Tensor<float>> arrays_;
};

}  // namespace hoivid
