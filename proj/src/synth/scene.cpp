#include "hoivid/synth/scene.hpp"

#include <cmath>

namespace hoivid {

namespace {

constexpr double kZScale = 4.0;  // shared depth convention: raster value = z / kZScale
constexpr double kZBody = 3.0;
constexpr double kZHandNear = 1.9, kZHandFar = 2.0;
constexpr double kZObjNear = 1.35, kZObjFar = 1.75;

struct Vec2 {
    double x = 0, y = 0;
};
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

struct Canvas {
    Raster rgb;
    std::vector<double> zbuf;
    int64_t h, w;

    Canvas(int64_t height, int64_t width, Rgb bg)
        : rgb({3, height, width}), zbuf(static_cast<size_t>(height * width), 1e9), h(height), w(width) {
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) set(x, y, bg);
    }

    void set(int64_t x, int64_t y, Rgb c) {
        rgb.at(0, y, x) = c.r;
        rgb.at(1, y, x) = c.g;
        rgb.at(2, y, x) = c.b;
    }

    void plot(int64_t x, int64_t y, double z, Rgb c) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        double& zb = zbuf[static_cast<size_t>(y * w + x)];
        if (z < zb) {
            zb = z;
            set(x, y, c);
        }
    }
};

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + t * ab;
    const double dx = p.x - q.x, dy = p.y - q.y;
    return std::sqrt(dx * dx + dy * dy);
}

void draw_capsule(Canvas& cv, Vec2 a, Vec2 b, double r, Rgb color, double z) {
    const int64_t x0 = static_cast<int64_t>(std::floor(std::min(a.x, b.x) - r));
    const int64_t x1 = static_cast<int64_t>(std::ceil(std::max(a.x, b.x) + r));
    const int64_t y0 = static_cast<int64_t>(std::floor(std::min(a.y, b.y) - r));
    const int64_t y1 = static_cast<int64_t>(std::ceil(std::max(a.y, b.y) + r));
    for (int64_t y = y0; y <= y1; ++y)
        for (int64_t x = x0; x <= x1; ++x)
            if (dist_point_segment({static_cast<double>(x), static_cast<double>(y)}, a, b) <= r)
                cv.plot(x, y, z, color);
}

void draw_disc(Canvas& cv, Vec2 c, double r, Rgb color, double z) {
    draw_capsule(cv, c, c, r, color, z);
}

// ---- object geometry --------------------------------------------------------

struct ObjectPose {
    Vec2 center;
    double angle = 0;       // texture and silhouette rotation
    double half_w, half_h;  // pixels
    double squeeze = 1.0;   // horizontal scale for side views
    double tex_shift = 0.0; // texture u offset for side views
    double shade = 1.0;
};

// silhouette test in local units u, v in [-1, 1] on the half-extent box
bool object_local_hit(const ObjectSpec& spec, double u, double v) {
    switch (spec.shape) {
        case ObjectShape::box:
            return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
        case ObjectShape::disc:
            return u * u + v * v <= 1.0;
        case ObjectShape::cylinder: {
            if (std::abs(u) <= 0.82 && std::abs(v) <= 0.92) return true;
            const double cap = (std::abs(v) - 0.92) / 0.08;
            return std::abs(v) <= 1.0 && cap >= 0 &&
                   (u / 0.82) * (u / 0.82) + cap * cap <= 1.0;
        }
    }
    return false;
}

Rgb object_color(const ObjectSpec& spec, double u, double v, double tex_shift, double shade) {
    const double tu = u + tex_shift, tv = v;
    Rgb c = spec.base;
    const double cells = spec.pattern_cells;
    switch (spec.pattern) {
        case TexturePattern::stripes: {
            const int band = static_cast<int>(std::floor((tu + 4.0) * cells * 0.5));
            if (band % 2 == 0) c = spec.secondary;
            break;
        }
        case TexturePattern::checker: {
            const int cell = static_cast<int>(std::floor((tu + 4.0) * cells * 0.5)) +
                             static_cast<int>(std::floor((tv + 4.0) * cells * 0.5));
            if (cell % 2 == 0) c = spec.secondary;
            break;
        }
        case TexturePattern::dots: {
            const double fu = (tu + 4.0) * cells * 0.5, fv = (tv + 4.0) * cells * 0.5;
            const double du = fu - std::floor(fu) - 0.5, dv = fv - std::floor(fv) - 0.5;
            if (du * du + dv * dv < 0.08) c = spec.secondary;
            break;
        }
    }
    // emblem glyph at the local center
    const double d = std::sqrt(u * u + v * v);
    bool emblem = false;
    switch (spec.glyph) {
        case Glyph::cross: emblem = d < 0.45 && (std::abs(u) < 0.12 || std::abs(v) < 0.12); break;
        case Glyph::ring: emblem = d > 0.28 && d < 0.45; break;
        case Glyph::triangle:
            emblem = v > -0.38 && v < 0.30 && std::abs(u) < (v + 0.38) * 0.55;
            break;
        case Glyph::bar: emblem = std::abs(v) < 0.14 && std::abs(u) < 0.45; break;
    }
    if (emblem) c = spec.emblem;
    return {std::clamp(c.r * static_cast<float>(shade), 0.f, 1.f),
            std::clamp(c.g * static_cast<float>(shade), 0.f, 1.f),
            std::clamp(c.b * static_cast<float>(shade), 0.f, 1.f)};
}

double object_depth_z(const ObjectSpec& spec, double u, double v) {
    switch (spec.shape) {
        case ObjectShape::box:
            return kZObjNear + (kZObjFar - kZObjNear) * (v + 1.0) * 0.5;
        case ObjectShape::cylinder:
            return kZObjNear + (kZObjFar - kZObjNear) * (u + 1.0) * 0.5;
        case ObjectShape::disc:
            return kZObjNear + (kZObjFar - kZObjNear) * std::min(1.0, u * u + v * v);
    }
    return kZObjNear;
}

// Maps a pixel to object-local units; returns false outside the silhouette.
bool object_pixel(const ObjectSpec& spec, const ObjectPose& pose, double px, double py, double& u,
                  double& v) {
    const double ca = std::cos(-pose.angle), sa = std::sin(-pose.angle);
    const double dx = px - pose.center.x, dy = py - pose.center.y;
    u = (ca * dx - sa * dy) / (pose.half_w * pose.squeeze);
    v = (sa * dx + ca * dy) / pose.half_h;
    return object_local_hit(spec, u, v);
}

void draw_object(Canvas& cv, const ObjectSpec& spec, const ObjectPose& pose) {
    const double reach = std::max(pose.half_w, pose.half_h) * 1.5 + 2;
    const int64_t x0 = static_cast<int64_t>(pose.center.x - reach);
    const int64_t x1 = static_cast<int64_t>(pose.center.x + reach);
    const int64_t y0 = static_cast<int64_t>(pose.center.y - reach);
    const int64_t y1 = static_cast<int64_t>(pose.center.y + reach);
    for (int64_t y = y0; y <= y1; ++y)
        for (int64_t x = x0; x <= x1; ++x) {
            double u, v;
            if (!object_pixel(spec, pose, static_cast<double>(x), static_cast<double>(y), u, v))
                continue;
            cv.plot(x, y, object_depth_z(spec, u, v),
                    object_color(spec, u, v, pose.tex_shift, pose.shade));
        }
}

// ---- anchor body ------------------------------------------------------------

struct BodyPose {
    Vec2 head, neck, r_sho, r_elb, r_wri, l_sho, l_elb, l_wri, r_hip, l_hip, r_hand, l_hand;
    double hand_r = 0;
};

Vec2 hand_center(Vec2 elbow, Vec2 wrist, double ext) {
    Vec2 d = wrist - elbow;
    const double len = std::sqrt(d.x * d.x + d.y * d.y);
    if (len < 1e-9) return wrist;
    return wrist + (ext / len) * d;
}

// Geometry in canvas-height units; tau in [0,1] is clip progress.
BodyPose body_pose(const SceneSpec& spec, double tau) {
    const double H = static_cast<double>(spec.height);
    const double xc = 0.34 * static_cast<double>(spec.width);
    const double px_scale = H / 96.0;  // trajectory pixel amounts are at H = 96
    const double bob = 0.008 * H * std::sin(2.0 * M_PI * tau);

    BodyPose b;
    b.hand_r = 0.042 * H;
    b.head = {xc, 0.215 * H + bob};
    b.neck = {xc, 0.33 * H + bob};
    b.r_sho = {xc + 0.115 * H, 0.375 * H + bob};
    b.l_sho = {xc - 0.115 * H, 0.375 * H + bob};
    b.r_hip = {xc + 0.07 * H, 0.74 * H};
    b.l_hip = {xc - 0.07 * H, 0.74 * H};

    if (spec.has_object) {
        // left arm idles, right arm carries the object along the trajectory
        b.l_elb = {xc - 0.175 * H, 0.52 * H + bob};
        b.l_wri = {xc - 0.19 * H + 0.012 * H * std::sin(2.0 * M_PI * tau + 1.3), 0.65 * H + bob};
        Vec2 wrist{xc + 0.21 * H, 0.47 * H + bob};
        const auto& tr = spec.trajectory;
        switch (tr.kind) {
            case Trajectory::hold_still:
                break;
            case Trajectory::lift:
                wrist = wrist + Vec2{tr.dx_px * px_scale * tau, tr.dy_px * px_scale * tau};
                break;
            case Trajectory::rotate:
                break;  // rotation is applied to the object, wrist stays
            case Trajectory::present_and_move:
                wrist = wrist + Vec2{tr.dx_px * px_scale * std::sin(M_PI * tau),
                                     tr.dy_px * px_scale * std::sin(2.0 * M_PI * tau)};
                break;
        }
        b.r_wri = wrist;
        Vec2 mid = b.r_sho + 0.55 * (wrist - b.r_sho);
        b.r_elb = {mid.x + 0.02 * H, mid.y + 0.06 * H};
    } else {
        // human-only clip: both arms wave
        const double wave = 0.06 * H * std::sin(2.0 * M_PI * tau);
        b.l_elb = {xc - 0.18 * H, 0.50 * H + bob};
        b.l_wri = {xc - 0.225 * H, 0.38 * H + bob + wave};
        b.r_elb = {xc + 0.18 * H, 0.50 * H + bob};
        b.r_wri = {xc + 0.225 * H, 0.38 * H + bob - wave};
    }
    b.r_hand = hand_center(b.r_elb, b.r_wri, 0.05 * H);
    b.l_hand = hand_center(b.l_elb, b.l_wri, 0.05 * H);
    return b;
}

KeypointFrame keypoints_of(const BodyPose& b, int64_t w, int64_t h) {
    auto kp = [&](Vec2 p) -> Keypoint {
        const bool in = p.x >= 0 && p.y >= 0 && p.x < static_cast<double>(w) &&
                        p.y < static_cast<double>(h);
        return {p.x, p.y, in ? 1.0 : 0.0};
    };
    KeypointFrame out(skeleton::count);
    out[skeleton::head] = kp(b.head);
    out[skeleton::neck] = kp(b.neck);
    out[skeleton::r_shoulder] = kp(b.r_sho);
    out[skeleton::r_elbow] = kp(b.r_elb);
    out[skeleton::r_wrist] = kp(b.r_wri);
    out[skeleton::l_shoulder] = kp(b.l_sho);
    out[skeleton::l_elbow] = kp(b.l_elb);
    out[skeleton::l_wrist] = kp(b.l_wri);
    out[skeleton::r_hip] = kp(b.r_hip);
    out[skeleton::l_hip] = kp(b.l_hip);
    out[skeleton::r_hand] = kp(b.r_hand);
    out[skeleton::l_hand] = kp(b.l_hand);
    return out;
}

void draw_body(Canvas& cv, const BodyPose& b, const AnchorPalette& pal, double H) {
    const Vec2 hip_mid = 0.5 * (b.r_hip + b.l_hip);
    draw_capsule(cv, b.r_hip, {b.r_hip.x + 0.012 * H, 0.99 * H}, 0.034 * H, pal.limb, kZBody + 0.06);
    draw_capsule(cv, b.l_hip, {b.l_hip.x - 0.012 * H, 0.99 * H}, 0.034 * H, pal.limb, kZBody + 0.06);
    draw_capsule(cv, b.neck, hip_mid, 0.115 * H, pal.torso, kZBody + 0.05);
    draw_disc(cv, b.head, 0.085 * H, pal.skin, kZBody - 0.05);
    draw_capsule(cv, {b.head.x, b.head.y - 0.055 * H}, {b.head.x, b.head.y - 0.02 * H}, 0.075 * H,
                 pal.hair, kZBody - 0.06);
    draw_capsule(cv, b.r_sho, b.r_elb, 0.028 * H, pal.torso, kZBody);
    draw_capsule(cv, b.l_sho, b.l_elb, 0.028 * H, pal.torso, kZBody);
    draw_capsule(cv, b.r_elb, b.r_wri, 0.024 * H, pal.limb, kZBody - 0.02);
    draw_capsule(cv, b.l_elb, b.l_wri, 0.024 * H, pal.limb, kZBody - 0.02);
}

double hand_dome_z(Vec2 center, double r, double px, double py) {
    const double dx = px - center.x, dy = py - center.y;
    const double q = std::min(1.0, (dx * dx + dy * dy) / (r * r));
    return kZHandNear + (kZHandFar - kZHandNear) * q;
}

// ---- pose skeleton render ---------------------------------------------------

const std::array<std::pair<int, int>, 12>& bone_list() {
    using namespace skeleton;
    static const std::array<std::pair<int, int>, 12> bones{{{head, neck},
                                                            {neck, r_shoulder},
                                                            {neck, l_shoulder},
                                                            {r_shoulder, r_elbow},
                                                            {r_elbow, r_wrist},
                                                            {l_shoulder, l_elbow},
                                                            {l_elbow, l_wrist},
                                                            {neck, r_hip},
                                                            {neck, l_hip},
                                                            {r_hip, l_hip},
                                                            {r_wrist, r_hand},
                                                            {l_wrist, l_hand}}};
    return bones;
}

Rgb bone_color(size_t i) {
    static const std::array<Rgb, 12> colors{{{1.0f, 0.2f, 0.2f},
                                             {1.0f, 0.6f, 0.1f},
                                             {0.9f, 0.9f, 0.1f},
                                             {0.5f, 1.0f, 0.1f},
                                             {0.1f, 1.0f, 0.3f},
                                             {0.1f, 1.0f, 0.8f},
                                             {0.1f, 0.7f, 1.0f},
                                             {0.2f, 0.3f, 1.0f},
                                             {0.6f, 0.2f, 1.0f},
                                             {1.0f, 0.2f, 0.9f},
                                             {0.9f, 0.4f, 0.4f},
                                             {0.4f, 0.6f, 0.9f}}};
    return colors[i % colors.size()];
}

Raster render_pose(const KeypointFrame& kps, int64_t h, int64_t w, double H) {
    Canvas cv(h, w, {0, 0, 0});
    const auto& bones = bone_list();
    for (size_t i = 0; i < bones.size(); ++i) {
        const auto& a = kps[static_cast<size_t>(bones[i].first)];
        const auto& b = kps[static_cast<size_t>(bones[i].second)];
        if (!a.visible() || !b.visible()) continue;
        draw_capsule(cv, {a.x, a.y}, {b.x, b.y}, 0.016 * H, bone_color(i), 1.0);
    }
    for (const auto& k : kps)
        if (k.visible()) draw_disc(cv, {k.x, k.y}, 0.02 * H, {1.f, 1.f, 1.f}, 0.5);
    return cv.rgb;
}

ObjectPose object_pose_at(const SceneSpec& spec, const BodyPose& body, double tau) {
    const double H = static_cast<double>(spec.height);
    ObjectPose pose;
    pose.half_w = 0.5 * spec.object.width * H;
    pose.half_h = 0.5 * spec.object.height * H;
    pose.center = body.r_hand + Vec2{pose.half_w + 0.25 * body.hand_r, -0.012 * H};
    if (spec.trajectory.kind == Trajectory::rotate)
        pose.angle = spec.trajectory.degrees * M_PI / 180.0 * tau;
    return pose;
}

}  // namespace

std::array<Raster, 3> render_object_views(const ObjectSpec& obj, int64_t height, int64_t width) {
    std::array<Raster, 3> views;
    const Rgb bg{0.12f, 0.12f, 0.14f};
    const double H = static_cast<double>(height);
    struct ViewParams {
        double squeeze, tex_shift, shade;
    };
    const std::array<ViewParams, 3> params{{{0.707, 0.33, 0.88}, {1.0, 0.0, 1.0}, {0.707, -0.33, 1.1}}};
    for (size_t i = 0; i < 3; ++i) {
        Canvas cv(height, width, bg);
        ObjectPose pose;
        pose.center = {static_cast<double>(width) / 2.0, H / 2.0};
        pose.half_w = 0.5 * obj.width * H * 1.8;
        pose.half_h = 0.5 * obj.height * H * 1.8;
        pose.squeeze = params[i].squeeze;
        pose.tex_shift = params[i].tex_shift;
        pose.shade = params[i].shade;
        draw_object(cv, obj, pose);
        views[i] = cv.rgb;
    }
    return views;
}

RenderedClip generate_scene(const SceneSpec& spec) {
    if (spec.height < 48 || spec.width < 48)
        throw std::invalid_argument("generate_scene: canvas too small for the figure (min 48x48)");
    if (spec.frames < 1) throw std::invalid_argument("generate_scene: frames must be >= 1");

    const int64_t h = spec.height, w = spec.width;
    const double H = static_cast<double>(h);
    RenderedClip clip;

    for (int64_t fi = 0; fi < spec.frames; ++fi) {
        const double tau = spec.frames > 1
                               ? static_cast<double>(fi) / static_cast<double>(spec.frames - 1)
                               : 0.0;
        const BodyPose body = body_pose(spec, tau);
        const auto kps = keypoints_of(body, w, h);
        clip.conditions.keypoints.push_back(kps);

        Canvas cv(h, w, spec.palette.background);
        draw_body(cv, body, spec.palette, H);

        Raster hand_mask = make_raster(1, h, w);
        Raster hand_render = make_raster(1, h, w);
        Raster hand_depth = make_raster(1, h, w);
        Raster obj_mask = make_raster(1, h, w);
        Raster obj_depth = make_raster(1, h, w);

        ObjectPose opose;
        if (spec.has_object) opose = object_pose_at(spec, body, tau);

        // hands: render into the frame and emit the full-projection depth rasters
        for (const Vec2 hc : {body.r_hand, body.l_hand}) {
            const double r = body.hand_r;
            for (int64_t y = static_cast<int64_t>(hc.y - r) - 1; y <= static_cast<int64_t>(hc.y + r) + 1; ++y)
                for (int64_t x = static_cast<int64_t>(hc.x - r) - 1; x <= static_cast<int64_t>(hc.x + r) + 1; ++x) {
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    const double dx = static_cast<double>(x) - hc.x, dy = static_cast<double>(y) - hc.y;
                    if (dx * dx + dy * dy > r * r) continue;
                    const double z = hand_dome_z(hc, r, static_cast<double>(x), static_cast<double>(y));
                    const float shade = static_cast<float>(1.25 - z / 2.0);
                    cv.plot(x, y, z, {spec.palette.skin.r * shade, spec.palette.skin.g * shade,
                                      spec.palette.skin.b * shade});
                    hand_render.at(0, y, x) = std::max(hand_render.at(0, y, x), shade);
                    hand_depth.at(0, y, x) = static_cast<float>(z / kZScale);
                    double u, v;
                    const bool occluded = spec.has_object &&
                                          object_pixel(spec.object, opose, static_cast<double>(x),
                                                       static_cast<double>(y), u, v);
                    if (!occluded) hand_mask.at(0, y, x) = 1.f;
                }
        }

        if (spec.has_object) {
            draw_object(cv, spec.object, opose);
            const double reach = std::max(opose.half_w, opose.half_h) * 1.5 + 2;
            for (int64_t y = static_cast<int64_t>(opose.center.y - reach); y <= static_cast<int64_t>(opose.center.y + reach); ++y)
                for (int64_t x = static_cast<int64_t>(opose.center.x - reach); x <= static_cast<int64_t>(opose.center.x + reach); ++x) {
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    double u, v;
                    if (!object_pixel(spec.object, opose, static_cast<double>(x), static_cast<double>(y), u, v))
                        continue;
                    obj_mask.at(0, y, x) = 1.f;
                    obj_depth.at(0, y, x) = static_cast<float>(object_depth_z(spec.object, u, v) / kZScale);
                }
        }

        clip.frames.push_back(cv.rgb);
        clip.conditions.pose_render.push_back(render_pose(kps, h, w, H));
        clip.conditions.hand_render.push_back(std::move(hand_render));
        clip.conditions.hand_depth.push_back(std::move(hand_depth));
        clip.conditions.obj_depth.push_back(std::move(obj_depth));
        clip.conditions.obj_mask.push_back(std::move(obj_mask));
        clip.conditions.hand_mask.push_back(std::move(hand_mask));
    }

    // reference image: anchor only, frame-0 pose (same arm layout, no object)
    {
        const BodyPose body0 = body_pose(spec, 0.0);
        Canvas cv(h, w, spec.palette.background);
        draw_body(cv, body0, spec.palette, H);
        for (const Vec2 hc : {body0.r_hand, body0.l_hand}) {
            const double r = body0.hand_r;
            for (int64_t y = static_cast<int64_t>(hc.y - r) - 1; y <= static_cast<int64_t>(hc.y + r) + 1; ++y)
                for (int64_t x = static_cast<int64_t>(hc.x - r) - 1; x <= static_cast<int64_t>(hc.x + r) + 1; ++x) {
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    const double dx = static_cast<double>(x) - hc.x, dy = static_cast<double>(y) - hc.y;
                    if (dx * dx + dy * dy > r * r) continue;
                    const double z = hand_dome_z(hc, r, static_cast<double>(x), static_cast<double>(y));
                    const float shade = static_cast<float>(1.25 - z / 2.0);
                    cv.plot(x, y, z, {spec.palette.skin.r * shade, spec.palette.skin.g * shade,
                                      spec.palette.skin.b * shade});
                }
        }
        clip.ref_human = cv.rgb;
        clip.ref_pose = keypoints_of(body0, w, h);
    }
    clip.ref_object = render_object_views(spec.object, h, w);
    return clip;
}

}  // namespace hoivid
