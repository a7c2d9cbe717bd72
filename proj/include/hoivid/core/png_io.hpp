#pragma once

#include <string>

#include "hoivid/core/image.hpp"

namespace hoivid {

// 8-bit PNG round trip. Rasters with 1 channel map to grayscale, 3 channels to RGB.
// Values are clamped to [0,1] and quantized with round(v * 255).
void write_png(const std::string& path, const Raster& img);
Raster read_png(const std::string& path);

}  // namespace hoivid
