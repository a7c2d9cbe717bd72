#pragma once

#include <string>

#include <json.hpp>

#include "hoivid/motion/alignment.hpp"

namespace hoivid {

// Condition archive layout per clip:
//   pose.json, meta.json, pose/####.png, hand/####.png, hand_depth/####.png,
//   obj_depth/####.png, obj_mask/####.png, hand_mask/####.png
// All rasters share one resolution; 8-bit PNG. Depth values are z / 4 in the
// shared scene convention; masks are 0/255.
void write_condition_archive(const std::string& dir, const ConditionStreams& streams, double fps);
ConditionStreams read_condition_archive(const std::string& dir);
nlohmann::json read_archive_meta(const std::string& dir);

// Frame directory: ####.png plus meta.json (fps, dims, frame count).
void write_frames_dir(const std::string& dir, const std::vector<Raster>& frames, double fps);
std::vector<Raster> read_frames_dir(const std::string& dir);

nlohmann::json keypoints_to_json(const std::vector<KeypointFrame>& frames);
std::vector<KeypointFrame> keypoints_from_json(const nlohmann::json& j);
nlohmann::json keypoint_frame_to_json(const KeypointFrame& frame);
KeypointFrame keypoint_frame_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

std::string frame_name(int64_t index);  // "0000.png"

}  // namespace hoivid
