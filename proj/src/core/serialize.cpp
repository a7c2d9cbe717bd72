#include "hoivid/core/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace hoivid {

namespace {
constexpr char kMagic[4] = {'H', 'V', 'C', 'P'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void WeightContainer::save(const std::string& path) const {
    nlohmann::json header;
    header["meta"] = meta;
    auto& dir = header["arrays"] = nlohmann::json::array();
    for (size_t i = 0; i < order_.size(); ++i) {
        nlohmann::json entry;
        entry["name"] = order_[i];
        entry["shape"] = arrays_[index_.at(order_[i])].shape();
        entry["dtype"] = "f32le";
        dir.push_back(entry);
    }
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("container: cannot open for write: " + path);
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, static_cast<uint64_t>(hs.size()));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& name : order_) {
        const auto& t = arrays_[index_.at(name)];
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("container: write failed: " + path);
}

WeightContainer WeightContainer::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("container: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("container: bad magic in " + path);
    const uint32_t version = read_pod<uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("container: unsupported version " + std::to_string(version));
    const uint64_t hlen = read_pod<uint64_t>(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    nlohmann::json header = nlohmann::json::parse(hs);

    WeightContainer out;
    out.meta = header.at("meta");
    for (const auto& entry : header.at("arrays")) {
        std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
        Tensor<float> t(shape);
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(float)));
        out.put(entry.at("name").get<std::string>(), t);
    }
    if (!is) throw std::runtime_error("container: truncated file " + path);
    return out;
}

}  // namespace hoivid
