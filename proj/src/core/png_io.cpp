#include "hoivid/core/png_io.hpp"

#include <png.h>

#include <cstring>
#include <stdexcept>
#include <vector>

namespace hoivid {

void write_png(const std::string& path, const Raster& img) {
    const int64_t ch = img.dim(0), h = img.dim(1), w = img.dim(2);
    if (ch != 1 && ch != 3) throw std::invalid_argument("write_png: channels must be 1 or 3");

    std::vector<png_byte> buf(static_cast<size_t>(h * w * ch));
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x)
            for (int64_t c = 0; c < ch; ++c) {
                float v = img.at(c, y, x);
                v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
                buf[static_cast<size_t>((y * w + x) * ch + c)] =
                    static_cast<png_byte>(std::lround(v * 255.0f));
            }

    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(w);
    pi.height = static_cast<png_uint_32>(h);
    pi.format = (ch == 3) ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&pi, path.c_str(), 0, buf.data(),
                                 static_cast<png_int_32>(w * ch), nullptr))
        throw std::runtime_error("write_png: failed to write " + path + ": " + pi.message);
}

Raster read_png(const std::string& path) {
    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.c_str()))
        throw std::runtime_error("read_png: cannot open " + path + ": " + pi.message);

    const bool gray = (pi.format & PNG_FORMAT_FLAG_COLOR) == 0;
    pi.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    const int64_t ch = gray ? 1 : 3;
    const int64_t w = pi.width, h = pi.height;

    std::vector<png_byte> buf(static_cast<size_t>(h * w * ch));
    if (!png_image_finish_read(&pi, nullptr, buf.data(), static_cast<png_int_32>(w * ch), nullptr))
        throw std::runtime_error("read_png: failed to read " + path + ": " + pi.message);

    Raster img({ch, h, w});
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x)
            for (int64_t c = 0; c < ch; ++c)
                img.at(c, y, x) =
                    static_cast<float>(buf[static_cast<size_t>((y * w + x) * ch + c)]) / 255.0f;
    return img;
}

}  // namespace hoivid
