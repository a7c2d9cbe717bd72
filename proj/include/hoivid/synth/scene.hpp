#pragma once

#include <array>

#include "hoivid/motion/alignment.hpp"

namespace hoivid {

struct Rgb {
    float r = 0, g = 0, b = 0;
};

enum class ObjectShape { box, cylinder, disc };
enum class TexturePattern { stripes, checker, dots };
enum class Glyph { cross, ring, triangle, bar };
enum class Trajectory { hold_still, lift, rotate, present_and_move };

struct AnchorPalette {
    Rgb skin, torso, limb, hair, background;
};

struct ObjectSpec {
    ObjectShape shape = ObjectShape::box;
    TexturePattern pattern = TexturePattern::stripes;
    Glyph glyph = Glyph::cross;
    Rgb base, secondary, emblem;
    double width = 0.20;   // half-extents derive from these, in canvas-height units
    double height = 0.16;
    double pattern_cells = 4.0;
};

// Pixel amounts are given at reference height 96 and scale with the canvas.
struct TrajectorySpec {
    Trajectory kind = Trajectory::hold_still;
    double dx_px = 0.0;
    double dy_px = 0.0;
    double degrees = 0.0;
};

struct SceneSpec {
    uint64_t seed = 0;
    int64_t height = 96;
    int64_t width = 160;
    AnchorPalette palette;
    ObjectSpec object;
    TrajectorySpec trajectory;
    int64_t frames = 24;
    double fps = 8.0;
    bool has_object = true;  // false renders a human-only clip (waving arms)
};

// Everything one clip provides: video frames, exact condition streams, the
// anchor reference image (frame-0 pose, no object) and the three object views.
struct RenderedClip {
    std::vector<Raster> frames;
    ConditionStreams conditions;
    Raster ref_human;
    std::array<Raster, 3> ref_object;  // left45, front, right45
    KeypointFrame ref_pose;
};

RenderedClip generate_scene(const SceneSpec& spec);

// Object views alone (used for reference-image regeneration at other sizes).
std::array<Raster, 3> render_object_views(const ObjectSpec& obj, int64_t height, int64_t width);

}  // namespace hoivid
