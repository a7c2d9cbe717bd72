#pragma once

#include <algorithm>
#include <cmath>

#include "hoivid/core/tensor.hpp"

namespace hoivid {

// Images and condition rasters are Tensor<float> [channels, height, width] in [0,1].
using Raster = Tensor<float>;

inline Raster make_raster(int64_t channels, int64_t height, int64_t width, float fill = 0.f) {
    return Raster({channels, height, width}, fill);
}

inline int64_t raster_channels(const Raster& r) { return r.dim(0); }
inline int64_t raster_height(const Raster& r) { return r.dim(1); }
inline int64_t raster_width(const Raster& r) { return r.dim(2); }

inline Raster to_gray(const Raster& rgb) {
    if (rgb.dim(0) == 1) return rgb;
    Raster g({1, rgb.dim(1), rgb.dim(2)});
    for (int64_t y = 0; y < rgb.dim(1); ++y)
        for (int64_t x = 0; x < rgb.dim(2); ++x)
            g.at(0, y, x) = 0.299f * rgb.at(0, y, x) + 0.587f * rgb.at(1, y, x) + 0.114f * rgb.at(2, y, x);
    return g;
}

// Bilinear sample with zero padding outside the canvas. Coordinates are pixel-center based.
inline float sample_bilinear(const Raster& img, int64_t c, double x, double y) {
    const int64_t h = img.dim(1), w = img.dim(2);
    const int64_t x0 = static_cast<int64_t>(std::floor(x));
    const int64_t y0 = static_cast<int64_t>(std::floor(y));
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    auto px = [&](int64_t yy, int64_t xx) -> double {
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) return 0.0;
        return static_cast<double>(img.at(c, yy, xx));
    };
    const double v = px(y0, x0) * (1 - fx) * (1 - fy) + px(y0, x0 + 1) * fx * (1 - fy) +
                     px(y0 + 1, x0) * (1 - fx) * fy + px(y0 + 1, x0 + 1) * fx * fy;
    return static_cast<float>(v);
}

// Area-style resize via bilinear sampling on the destination grid.
inline Raster resize_bilinear(const Raster& img, int64_t out_h, int64_t out_w) {
    Raster out({img.dim(0), out_h, out_w});
    const double sx = static_cast<double>(img.dim(2)) / static_cast<double>(out_w);
    const double sy = static_cast<double>(img.dim(1)) / static_cast<double>(out_h);
    for (int64_t c = 0; c < img.dim(0); ++c)
        for (int64_t y = 0; y < out_h; ++y)
            for (int64_t x = 0; x < out_w; ++x) {
                const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
                const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
                out.at(c, y, x) = sample_bilinear(img, c, src_x, src_y);
            }
    return out;
}

inline Raster crop(const Raster& img, int64_t y0, int64_t x0, int64_t h, int64_t w) {
    Raster out({img.dim(0), h, w});
    for (int64_t c = 0; c < img.dim(0); ++c)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                const int64_t sy = y0 + y, sx = x0 + x;
                if (sy >= 0 && sy < img.dim(1) && sx >= 0 && sx < img.dim(2))
                    out.at(c, y, x) = img.at(c, sy, sx);
            }
    return out;
}

inline double psnr(const Raster& a, const Raster& b) {
    double mse = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.numel());
    if (mse <= 0.0) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace hoivid
