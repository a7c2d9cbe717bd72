#include "hoivid/data/archive.hpp"

#include <filesystem>
#include <fstream>

#include "hoivid/core/png_io.hpp"

namespace fs = std::filesystem;

namespace hoivid {

std::string frame_name(int64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04lld.png", static_cast<long long>(index));
    return buf;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << "\n";
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(is);
}

nlohmann::json keypoint_frame_to_json(const KeypointFrame& frame) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : frame) out.push_back({k.x, k.y, k.conf});
    return out;
}

KeypointFrame keypoint_frame_from_json(const nlohmann::json& j) {
    KeypointFrame out;
    for (const auto& e : j) out.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
    return out;
}

nlohmann::json keypoints_to_json(const std::vector<KeypointFrame>& frames) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : frames) out.push_back(keypoint_frame_to_json(f));
    return out;
}

std::vector<KeypointFrame> keypoints_from_json(const nlohmann::json& j) {
    std::vector<KeypointFrame> out;
    for (const auto& f : j) out.push_back(keypoint_frame_from_json(f));
    return out;
}

namespace {

void write_series(const std::string& dir, const std::vector<Raster>& rasters) {
    fs::create_directories(dir);
    for (size_t i = 0; i < rasters.size(); ++i)
        write_png(dir + "/" + frame_name(static_cast<int64_t>(i)), rasters[i]);
}

std::vector<Raster> read_series(const std::string& dir, int64_t count) {
    std::vector<Raster> out;
    out.reserve(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) out.push_back(read_png(dir + "/" + frame_name(i)));
    return out;
}

}  // namespace

void write_condition_archive(const std::string& dir, const ConditionStreams& streams, double fps) {
    fs::create_directories(dir);
    const int64_t f = static_cast<int64_t>(streams.frames());
    if (f == 0) throw std::invalid_argument("write_condition_archive: empty streams");
    nlohmann::json meta;
    meta["fps"] = fps;
    meta["frames"] = f;
    meta["width"] = streams.pose_render[0].dim(2);
    meta["height"] = streams.pose_render[0].dim(1);
    meta["depth_convention"] = "value = z / 4, background 0";
    write_json(dir + "/meta.json", meta);
    write_json(dir + "/pose.json",
               {{"skeleton", "hoivid-12"}, {"frames", keypoints_to_json(streams.keypoints)}});
    write_series(dir + "/pose", streams.pose_render);
    write_series(dir + "/hand", streams.hand_render);
    write_series(dir + "/hand_depth", streams.hand_depth);
    write_series(dir + "/obj_depth", streams.obj_depth);
    write_series(dir + "/obj_mask", streams.obj_mask);
    write_series(dir + "/hand_mask", streams.hand_mask);
}

nlohmann::json read_archive_meta(const std::string& dir) { return load_json(dir + "/meta.json"); }

ConditionStreams read_condition_archive(const std::string& dir) {
    const auto meta = read_archive_meta(dir);
    const int64_t f = meta.at("frames").get<int64_t>();
    ConditionStreams out;
    out.pose_render = read_series(dir + "/pose", f);
    out.hand_render = read_series(dir + "/hand", f);
    out.hand_depth = read_series(dir + "/hand_depth", f);
    out.obj_depth = read_series(dir + "/obj_depth", f);
    out.obj_mask = read_series(dir + "/obj_mask", f);
    out.hand_mask = read_series(dir + "/hand_mask", f);
    out.keypoints = keypoints_from_json(load_json(dir + "/pose.json").at("frames"));
    // re-binarize masks after 8-bit quantization
    for (auto* masks : {&out.obj_mask, &out.hand_mask})
        for (auto& m : *masks)
            for (int64_t i = 0; i < m.numel(); ++i) m[i] = m[i] > 0.5f ? 1.f : 0.f;
    return out;
}

void write_frames_dir(const std::string& dir, const std::vector<Raster>& frames, double fps) {
    write_series(dir, frames);
    nlohmann::json meta;
    meta["fps"] = fps;
    meta["frames"] = static_cast<int64_t>(frames.size());
    meta["width"] = frames.empty() ? 0 : frames[0].dim(2);
    meta["height"] = frames.empty() ? 0 : frames[0].dim(1);
    write_json(dir + "/meta.json", meta);
}

std::vector<Raster> read_frames_dir(const std::string& dir) {
    const auto meta = load_json(dir + "/meta.json");
    return read_series(dir, meta.at("frames").get<int64_t>());
}

}  // namespace hoivid
