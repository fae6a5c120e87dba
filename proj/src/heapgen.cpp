#include "mechsearch/heapgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

namespace {

constexpr double kCm = 0.01;
constexpr double kMinArea = 4.0 * kCm * kCm;
constexpr double kMaxArea = 100.0 * kCm * kCm;
constexpr int kEllipseSegments = 16;

constexpr int kSearchDirections = 32;
constexpr double kSearchStep = 0.002;
constexpr double kSearchRange = 0.15;

Polygon rect_poly(double a, double b) { return rectangle({-a / 2, -b / 2}, {a / 2, b / 2}); }

Polygon ellipse_poly(double ra, double rb) {
    Polygon p;
    for (int k = 0; k < kEllipseSegments; ++k) {
        const double t = 2.0 * std::numbers::pi * k / kEllipseSegments;
        p.push_back({ra * std::cos(t), rb * std::sin(t)});
    }
    return p;
}

Polygon l_poly(double a, double b, double t) {
    return {{0, 0}, {a, 0}, {a, t}, {t, t}, {t, b}, {0, b}};
}

// Bar of width a along the top, stem of width s hanging down to total height b.
Polygon t_poly(double a, double b, double t, double s) {
    const double h = s / 2;
    return {{-h, 0}, {h, 0}, {h, b - t}, {a / 2, b - t}, {a / 2, b}, {-a / 2, b}, {-a / 2, b - t}, {-h, b - t}};
}

Polygon scaled_to_area(Polygon p) {
    const double a = area(p);
    double target = a;
    if (a < kMinArea) target = kMinArea * 1.0001;
    if (a > kMaxArea) target = kMaxArea * 0.9999;
    if (target == a) return p;
    const double s = std::sqrt(target / a);
    for (Vec2& v : p) v = v * s;
    return p;
}

bool inside_interior(const ObjectState& o, const Bin& bin) {
    const Aabb b = o.world_bounds();
    const Aabb in = bin.interior();
    return b.lo.x >= in.lo.x && b.lo.y >= in.lo.y && b.hi.x <= in.hi.x && b.hi.y <= in.hi.y;
}

void clamp_into_interior(ObjectState& o, const Bin& bin) {
    const Aabb b = o.world_bounds();
    const Aabb in = bin.interior();
    if (b.hi.x - b.lo.x > in.hi.x - in.lo.x || b.hi.y - b.lo.y > in.hi.y - in.lo.y) {
        throw Error(ErrorCode::BinOverflow, "object " + std::to_string(o.id) + " is larger than the bin interior");
    }
    if (b.lo.x < in.lo.x) o.pose.x += in.lo.x - b.lo.x;
    if (b.hi.x > in.hi.x) o.pose.x -= b.hi.x - in.hi.x;
    if (b.lo.y < in.lo.y) o.pose.y += in.lo.y - b.lo.y;
    if (b.hi.y > in.hi.y) o.pose.y -= b.hi.y - in.hi.y;
}

bool collides_with_any(const ObjectState& o, const std::vector<ObjectState>& placed) {
    return std::any_of(placed.begin(), placed.end(), [&](const ObjectState& p) { return footprints_intersect(o, p); });
}

bool resolve_by_translation(ObjectState& o, const std::vector<ObjectState>& placed, const Bin& bin) {
    const Pose start = o.pose;
    const int steps = static_cast<int>(std::round(kSearchRange / kSearchStep));
    for (int j = 1; j <= steps; ++j) {
        const double d = j * kSearchStep;
        for (int k = 0; k < kSearchDirections; ++k) {
            const Vec2 u = unit_from_angle(2.0 * std::numbers::pi * k / kSearchDirections);
            o.pose.x = start.x + u.x * d;
            o.pose.y = start.y + u.y * d;
            if (inside_interior(o, bin) && !collides_with_any(o, placed)) return true;
        }
    }
    o.pose = start;
    return false;
}

// With no free floor left nearby, the object rolls toward its neighbors,
// nearest first, until it rests on one of them.
bool slide_onto_heap(ObjectState& o, const std::vector<ObjectState>& placed, const Bin& bin) {
    const Vec2 start{o.pose.x, o.pose.y};
    std::vector<const ObjectState*> anchors;
    for (const ObjectState& p : placed) anchors.push_back(&p);
    std::stable_sort(anchors.begin(), anchors.end(), [&](const ObjectState* a, const ObjectState* b) {
        return norm(Vec2{a->pose.x, a->pose.y} - start) < norm(Vec2{b->pose.x, b->pose.y} - start);
    });
    for (const ObjectState* anchor : anchors) {
        const Vec2 delta = Vec2{anchor->pose.x, anchor->pose.y} - start;
        const int steps = std::max(1, static_cast<int>(std::ceil(norm(delta) / kSearchStep)));
        for (int j = 1; j <= steps; ++j) {
            const Vec2 q = start + delta * (static_cast<double>(j) / steps);
            o.pose.x = q.x;
            o.pose.y = q.y;
            clamp_into_interior(o, bin);
            if (stacking_overlap(o, *anchor)) return true;
        }
    }
    o.pose.x = start.x;
    o.pose.y = start.y;
    return false;
}

int support_layer_of(const ObjectState& o, const std::vector<ObjectState>& placed) {
    int layer = -1;
    for (const ObjectState& p : placed) {
        if (stacking_overlap(o, p)) layer = std::max(layer, p.layer);
    }
    return layer;
}

// Searches outward from the landing spot, directions closest to "away from
// the heap center" first, for a pose that rests at or below max_layer.
bool slide_off_pile(ObjectState& o, const std::vector<ObjectState>& placed, const Bin& bin, Vec2 heap_center, int max_layer) {
    const Pose start = o.pose;
    Vec2 out = Vec2{start.x, start.y} - heap_center;
    const double out_angle = norm(out) > 1e-12 ? std::atan2(out.y, out.x) : 0.0;
    std::vector<double> angles;
    for (int k = 0; k < kSearchDirections; ++k) angles.push_back(out_angle + 2.0 * std::numbers::pi * k / kSearchDirections);
    std::stable_sort(angles.begin(), angles.end(), [&](double a, double b) {
        return std::abs(std::remainder(a - out_angle, 2.0 * std::numbers::pi)) < std::abs(std::remainder(b - out_angle, 2.0 * std::numbers::pi));
    });
    const Aabb ext = bin.extent();
    const int steps = static_cast<int>(std::ceil(norm(ext.hi - ext.lo) / kSearchStep));
    for (int j = 1; j <= steps; ++j) {
        for (double a : angles) {
            const Vec2 u = unit_from_angle(a);
            o.pose.x = start.x + u.x * j * kSearchStep;
            o.pose.y = start.y + u.y * j * kSearchStep;
            if (!inside_interior(o, bin)) continue;
            const int support = support_layer_of(o, placed);
            if (support >= 0 ? support < max_layer : !collides_with_any(o, placed)) {
                o.layer = support + 1;
                return true;
            }
        }
    }
    o.pose = start;
    return false;
}

}  // namespace

void HeapSpec::validate() const {
    if (n_objects < 1) throw Error(ErrorCode::InvalidConfig, "heap needs at least one object");
    if (heap_center_sigma < 0.0 || offset_sigma < 0.0) throw Error(ErrorCode::InvalidConfig, "sigmas must be non-negative");
    double total = 0.0;
    for (double w : shape_mix) {
        if (w < 0.0) throw Error(ErrorCode::InvalidConfig, "shape weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidConfig, "shape weights must sum to 1");
    if (max_layer < 0) throw Error(ErrorCode::InvalidConfig, "max_layer must be non-negative");
    if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidConfig, "resolution must be positive");
}

ObjectShape sample_shape(Rng& rng, const ShapeMix& mix) {
    const auto cls = static_cast<ShapeClass>(rng.weighted_index(mix));
    Polygon poly;
    switch (cls) {
        case ShapeClass::Rectangle:
            poly = rect_poly(rng.uniform(2, 10) * kCm, rng.uniform(2, 10) * kCm);
            break;
        case ShapeClass::Ellipse:
            poly = ellipse_poly(rng.uniform(1.2, 5.6) * kCm, rng.uniform(1.2, 5.6) * kCm);
            break;
        case ShapeClass::LShape: {
            const double a = rng.uniform(3, 10) * kCm;
            const double b = rng.uniform(3, 10) * kCm;
            poly = l_poly(a, b, rng.uniform(0.35, 0.6) * std::min(a, b));
            break;
        }
        case ShapeClass::TShape: {
            const double a = rng.uniform(3, 10) * kCm;
            const double b = rng.uniform(3, 10) * kCm;
            poly = t_poly(a, b, rng.uniform(0.3, 0.5) * b, rng.uniform(0.3, 0.5) * a);
            break;
        }
    }
    const double height = rng.uniform(1, 8) * kCm;
    return ObjectShape(scaled_to_area(std::move(poly)), height, cls);
}

SceneState generate_heap(const HeapSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SceneState scene;
    scene.bin = spec.bin;
    scene.initial_count = spec.n_objects;
    scene.timestep = 0;

    const Vec2 center = spec.bin.center() + Vec2{rng.normal(0, spec.heap_center_sigma), rng.normal(0, spec.heap_center_sigma)};
    for (int i = 0; i < spec.n_objects; ++i) {
        ObjectShape shape = sample_shape(rng, spec.shape_mix);
        const double theta = rng.uniform(0, 2.0 * std::numbers::pi);
        const Vec2 offset{rng.normal(0, spec.offset_sigma), rng.normal(0, spec.offset_sigma)};
        const Vec2 p = center + offset;
        ObjectState obj{i, std::move(shape), {p.x, p.y, theta}, 0, false, false};
        clamp_into_interior(obj, spec.bin);

        int support_layer = support_layer_of(obj, scene.objects);
        if (support_layer < 0 && collides_with_any(obj, scene.objects) && !resolve_by_translation(obj, scene.objects, spec.bin)) {
            if (!slide_onto_heap(obj, scene.objects, spec.bin)) {
                throw Error(ErrorCode::BinOverflow, "no resting place for object " + std::to_string(i) + " (seed " + std::to_string(spec.seed) + ")");
            }
            support_layer = support_layer_of(obj, scene.objects);
        }
        if (support_layer >= 0) obj.layer = support_layer + 1;
        // A full bin has nowhere lower to slide to; the pile then grows taller.
        if (obj.layer > spec.max_layer) slide_off_pile(obj, scene.objects, spec.bin, center, spec.max_layer);
        scene.objects.push_back(std::move(obj));
    }

    const SegMasks masks = rasterize_scene(scene, spec.resolution);
    scene.target_id = select_target(scene, masks);
    return scene;
}

int select_target(const SceneState& scene, const SegMasks& masks) {
    int best = -1;
    double best_ratio = 2.0;
    for (const ObjectState& o : scene.objects) {
        if (!o.active()) continue;
        const double r = visibility_ratio(masks, o.id);
        if (r < best_ratio || (r == best_ratio && o.id < best)) {
            best = o.id;
            best_ratio = r;
        }
    }
    if (best < 0) throw Error(ErrorCode::EmptyScene, "no active objects to choose a target from");
    return best;
}

}  // namespace mechsearch
