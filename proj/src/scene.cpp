#include "mechsearch/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

std::string_view to_string(ShapeClass c) {
    switch (c) {
        case ShapeClass::Rectangle: return "rectangle";
        case ShapeClass::Ellipse: return "ellipse";
        case ShapeClass::LShape: return "l_shape";
        case ShapeClass::TShape: return "t_shape";
    }
    return "rectangle";
}

ShapeClass shape_class_from_string(std::string_view s) {
    if (s == "rectangle") return ShapeClass::Rectangle;
    if (s == "ellipse") return ShapeClass::Ellipse;
    if (s == "l_shape") return ShapeClass::LShape;
    if (s == "t_shape") return ShapeClass::TShape;
    throw Error(ErrorCode::InvalidShape, "unknown shape class '" + std::string(s) + "'");
}

ObjectShape::ObjectShape(Polygon vertices, double height, ShapeClass shape_class)
    : vertices_(std::move(vertices)), height_(height), class_(shape_class) {
    if (vertices_.size() < 3) throw Error(ErrorCode::InvalidShape, "footprint needs at least 3 vertices");
    if (!(height_ > 0.0)) throw Error(ErrorCode::InvalidShape, "height must be positive");
    if (!is_simple(vertices_)) throw Error(ErrorCode::InvalidShape, "footprint is not a simple polygon");
    vertices_ = make_ccw(std::move(vertices_));
    const Vec2 c = centroid(vertices_);
    if (norm(c) > 1e-12) {
        for (Vec2& p : vertices_) p = p - c;
    }
    area_ = mechsearch::area(vertices_);
    if (!(area_ > 0.0)) throw Error(ErrorCode::InvalidShape, "footprint area must be positive");
    for (const Vec2& p : vertices_) radius_ = std::max(radius_, norm(p));
    parts_ = convex_decomposition(vertices_);
}

Polygon ObjectState::world_polygon() const { return transformed(shape.vertices(), pose.position(), pose.theta); }

std::vector<Polygon> ObjectState::world_parts() const {
    std::vector<Polygon> out;
    out.reserve(shape.convex_parts().size());
    for (const Polygon& part : shape.convex_parts()) out.push_back(transformed(part, pose.position(), pose.theta));
    return out;
}

Aabb ObjectState::world_bounds() const { return bounds(world_polygon()); }

const ObjectState* SceneState::find(int id) const {
    for (const ObjectState& o : objects) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

ObjectState* SceneState::find(int id) {
    for (ObjectState& o : objects) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

const ObjectState& SceneState::at(int id) const {
    const ObjectState* o = find(id);
    if (!o) throw Error(ErrorCode::UnknownObject, "object " + std::to_string(id));
    return *o;
}

std::size_t SceneState::active_count() const {
    return static_cast<std::size_t>(std::count_if(objects.begin(), objects.end(), [](const ObjectState& o) { return o.active(); }));
}

void SceneState::validate() const {
    if (!(bin.width > 2 * bin.wall && bin.depth > 2 * bin.wall && bin.wall >= 0.0)) {
        throw Error(ErrorCode::BadSnapshot, "bin interior is empty");
    }
    if (timestep < 0) throw Error(ErrorCode::BadSnapshot, "negative timestep");
    std::set<int> ids;
    for (const ObjectState& o : objects) {
        if (!ids.insert(o.id).second) throw Error(ErrorCode::BadSnapshot, "duplicate object id " + std::to_string(o.id));
        if (o.layer < 0) throw Error(ErrorCode::BadSnapshot, "negative layer on object " + std::to_string(o.id));
        if (!o.active()) continue;
        const Aabb ext = bin.extent();
        if (o.pose.x < ext.lo.x || o.pose.x > ext.hi.x || o.pose.y < ext.lo.y || o.pose.y > ext.hi.y) {
            throw Error(ErrorCode::BadSnapshot, "object " + std::to_string(o.id) + " lies outside the bin");
        }
    }
    if (!ids.contains(target_id)) throw Error(ErrorCode::BadSnapshot, "target id does not name an object");
}

double overlap_area(const ObjectState& a, const ObjectState& b) {
    if (!a.world_bounds().overlaps(b.world_bounds())) return 0.0;
    const auto pa = a.world_parts();
    const auto pb = b.world_parts();
    double s = 0.0;
    for (const Polygon& x : pa) {
        for (const Polygon& y : pb) s += convex_intersection_area(x, y);
    }
    return s;
}

bool footprints_intersect(const ObjectState& a, const ObjectState& b) {
    if (!a.world_bounds().overlaps(b.world_bounds())) return false;
    const auto pa = a.world_parts();
    const auto pb = b.world_parts();
    for (const Polygon& x : pa) {
        for (const Polygon& y : pb) {
            if (convex_intersects(x, y)) return true;
        }
    }
    return false;
}

bool stacking_overlap(const ObjectState& a, const ObjectState& b) {
    return overlap_area(a, b) > kStackingOverlapFraction * std::min(a.shape.area(), b.shape.area());
}

std::vector<double> elevations(const SceneState& scene) {
    const std::size_t n = scene.objects.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scene.objects[a].layer < scene.objects[b].layer; });
    std::vector<double> z(n, 0.0);
    for (std::size_t oi : order) {
        const ObjectState& o = scene.objects[oi];
        if (!o.active() || o.layer == 0) continue;
        for (std::size_t si = 0; si < n; ++si) {
            const ObjectState& s = scene.objects[si];
            if (!s.active() || s.layer >= o.layer) continue;
            if (overlap_area(o, s) <= 0.0) continue;
            z[oi] = std::max(z[oi], z[si] + s.shape.height());
        }
    }
    return z;
}

double elevation(const SceneState& scene, int id) {
    const std::vector<double> z = elevations(scene);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        if (scene.objects[i].id == id) return z[i];
    }
    throw Error(ErrorCode::UnknownObject, "object " + std::to_string(id));
}

double top_height(const SceneState& scene, int id) { return elevation(scene, id) + scene.at(id).shape.height(); }

MaskImage MaskImage::blank(const Bin& bin, double resolution) {
    if (!(resolution > 0.0)) throw Error(ErrorCode::ZeroAreaRaster, "resolution must be positive");
    MaskImage m;
    m.resolution = resolution;
    m.origin = {0.0, 0.0};
    m.cols = static_cast<int>(std::ceil(bin.width * resolution - 1e-9));
    m.rows = static_cast<int>(std::ceil(bin.depth * resolution - 1e-9));
    if (m.rows < 2 || m.cols < 2) {
        throw Error(ErrorCode::ZeroAreaRaster, "grid " + std::to_string(m.cols) + "x" + std::to_string(m.rows) + " is smaller than 2x2");
    }
    m.bits.assign(static_cast<std::size_t>(m.rows) * m.cols, 0);
    return m;
}

std::size_t MaskImage::count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

PixelIndex world_to_pixel(const MaskImage& mask, Vec2 p) {
    const double fx = (p.x - mask.origin.x) * mask.resolution;
    const double fy = (p.y - mask.origin.y) * mask.resolution;
    constexpr double slack = 1e-9;
    if (fx < -slack || fy < -slack || fx > mask.cols + slack || fy > mask.rows + slack) {
        throw Error(ErrorCode::OutOfBounds, "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") is outside the raster");
    }
    const int col = std::clamp(static_cast<int>(std::floor(fx)), 0, mask.cols - 1);
    const int row = std::clamp(static_cast<int>(std::floor(fy)), 0, mask.rows - 1);
    return {row, col};
}

Vec2 pixel_to_world(const MaskImage& mask, PixelIndex px) {
    if (!mask.in_grid(px.row, px.col)) throw Error(ErrorCode::OutOfBounds, "pixel outside the raster");
    return {mask.origin.x + (px.col + 0.5) / mask.resolution, mask.origin.y + (px.row + 0.5) / mask.resolution};
}

const MaskEntry* SegMasks::find(int id) const {
    for (const MaskEntry& e : entries) {
        if (e.object_id == id) return &e;
    }
    return nullptr;
}

const MaskEntry& SegMasks::at(int id) const {
    const MaskEntry* e = find(id);
    if (!e) throw Error(ErrorCode::UnknownObject, "no masks for object " + std::to_string(id));
    return *e;
}

std::vector<int> SegMasks::visible_ids() const {
    std::vector<int> ids;
    for (const MaskEntry& e : entries) {
        if (e.modal_count > 0) ids.push_back(e.object_id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

SegMasks rasterize_scene(const SceneState& scene, double resolution) {
    SegMasks out;
    out.occupancy = MaskImage::blank(scene.bin, resolution);
    out.walls = out.occupancy;
    const int rows = out.occupancy.rows;
    const int cols = out.occupancy.cols;
    const Aabb interior = scene.bin.interior();

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Vec2 p = pixel_to_world(out.occupancy, {r, c});
            const bool inside = p.x > interior.lo.x && p.x < interior.hi.x && p.y > interior.lo.y && p.y < interior.hi.y;
            if (!inside) {
                out.walls.set(r, c);
                out.occupancy.set(r, c);
            }
        }
    }

    out.owner.assign(static_cast<std::size_t>(rows) * cols, -1);
    std::vector<int> owner_layer(out.owner.size(), -1);

    const MaskImage empty = MaskImage::blank(scene.bin, resolution);
    out.entries.reserve(scene.objects.size());
    for (const ObjectState& o : scene.objects) {
        MaskEntry e{o.id, empty, empty, 0, 0};
        if (o.active()) {
            const Polygon poly = o.world_polygon();
            const Aabb b = bounds(poly);
            const int c0 = std::max(0, static_cast<int>(std::floor(b.lo.x * resolution)));
            const int c1 = std::min(cols - 1, static_cast<int>(std::floor(b.hi.x * resolution)));
            const int r0 = std::max(0, static_cast<int>(std::floor(b.lo.y * resolution)));
            const int r1 = std::min(rows - 1, static_cast<int>(std::floor(b.hi.y * resolution)));
            for (int r = r0; r <= r1; ++r) {
                for (int c = c0; c <= c1; ++c) {
                    if (out.walls.at(r, c)) continue;
                    if (!contains(poly, pixel_to_world(empty, {r, c}))) continue;
                    e.amodal.set(r, c);
                    ++e.amodal_count;
                    out.occupancy.set(r, c);
                    const std::size_t k = static_cast<std::size_t>(r) * cols + c;
                    if (o.layer > owner_layer[k] || (o.layer == owner_layer[k] && o.id > out.owner[k])) {
                        owner_layer[k] = o.layer;
                        out.owner[k] = o.id;
                    }
                }
            }
        }
        out.entries.push_back(std::move(e));
    }

    for (MaskEntry& e : out.entries) {
        if (e.amodal_count == 0) continue;
        for (std::size_t k = 0; k < out.owner.size(); ++k) {
            if (out.owner[k] == e.object_id) {
                e.modal.bits[k] = 1;
                ++e.modal_count;
            }
        }
    }
    return out;
}

double visibility_ratio(const SegMasks& masks, int id) {
    const MaskEntry& e = masks.at(id);
    if (e.amodal_count == 0) return 0.0;
    return static_cast<double>(e.modal_count) / static_cast<double>(e.amodal_count);
}

}  // namespace mechsearch
