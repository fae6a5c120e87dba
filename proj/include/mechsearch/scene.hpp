#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mechsearch/geometry.hpp"

namespace mechsearch {

/// Fraction of an object's own footprint that must rest on another object
/// for it to count as stacked on that object.
inline constexpr double kStackingOverlapFraction = 0.25;

inline constexpr double kDefaultResolution = 200.0;  // pixels per meter

enum class ShapeClass { Rectangle, Ellipse, LShape, TShape };

std::string_view to_string(ShapeClass c);
ShapeClass shape_class_from_string(std::string_view s);

/// Extruded footprint. Vertices are stored in the object frame with the
/// footprint centroid (the center of mass) at the origin, wound CCW.
class ObjectShape {
public:
    ObjectShape(Polygon vertices, double height, ShapeClass shape_class);

    const Polygon& vertices() const { return vertices_; }
    const std::vector<Polygon>& convex_parts() const { return parts_; }
    double height() const { return height_; }
    ShapeClass shape_class() const { return class_; }
    double area() const { return area_; }
    /// Largest vertex distance from the centroid.
    double bounding_radius() const { return radius_; }

    friend bool operator==(const ObjectShape& a, const ObjectShape& b) {
        return a.vertices_ == b.vertices_ && a.height_ == b.height_ && a.class_ == b.class_;
    }

private:
    Polygon vertices_;
    std::vector<Polygon> parts_;
    double height_;
    ShapeClass class_;
    double area_ = 0.0;
    double radius_ = 0.0;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const Pose&, const Pose&) = default;
};

struct ObjectState {
    int id = 0;
    ObjectShape shape;
    Pose pose;
    int layer = 0;
    bool ejected = false;
    bool extracted = false;

    bool active() const { return !ejected && !extracted; }
    Polygon world_polygon() const;
    std::vector<Polygon> world_parts() const;
    Aabb world_bounds() const;

    friend bool operator==(const ObjectState&, const ObjectState&) = default;
};

/// Axis-aligned bin with its corner at the world origin. The usable interior is
/// the extent shrunk by the wall thickness on every side.
struct Bin {
    double width = 0.4;
    double depth = 0.6;
    double wall = 0.01;

    Aabb extent() const { return {{0.0, 0.0}, {width, depth}}; }
    Aabb interior() const { return {{wall, wall}, {width - wall, depth - wall}}; }
    Vec2 center() const { return {0.5 * width, 0.5 * depth}; }

    friend bool operator==(const Bin&, const Bin&) = default;
};

struct SceneState {
    Bin bin;
    std::vector<ObjectState> objects;
    int target_id = -1;
    int timestep = 0;
    int initial_count = 0;

    const ObjectState* find(int id) const;
    ObjectState* find(int id);
    const ObjectState& at(int id) const;
    std::size_t active_count() const;

    /// Throws BadSnapshot describing the first violated invariant.
    void validate() const;

    friend bool operator==(const SceneState&, const SceneState&) = default;
};

/// Exact footprint intersection area between two objects.
double overlap_area(const ObjectState& a, const ObjectState& b);
bool footprints_intersect(const ObjectState& a, const ObjectState& b);

/// True when the footprints overlap by more than the stacking fraction of the
/// smaller of the two footprint areas, i.e. one can rest on the other.
bool stacking_overlap(const ObjectState& a, const ObjectState& b);

/// Height of the object's underside: the tallest top among the lower-layer
/// objects its footprint overlaps (0 on the floor).
double elevation(const SceneState& scene, int id);
/// Elevation of every object, indexed like scene.objects (inactive objects get 0).
std::vector<double> elevations(const SceneState& scene);
double top_height(const SceneState& scene, int id);

struct PixelIndex {
    int row = 0;
    int col = 0;
    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Binary raster aligned with the bin: column = x, row = y, pixel (0,0)
/// covers the bin's origin corner.
struct MaskImage {
    int rows = 0;
    int cols = 0;
    double resolution = kDefaultResolution;
    Vec2 origin;
    std::vector<std::uint8_t> bits;

    static MaskImage blank(const Bin& bin, double resolution);

    bool in_grid(int row, int col) const { return row >= 0 && col >= 0 && row < rows && col < cols; }
    bool at(int row, int col) const { return bits[static_cast<std::size_t>(row) * cols + col] != 0; }
    void set(int row, int col, bool v = true) { bits[static_cast<std::size_t>(row) * cols + col] = v ? 1 : 0; }
    std::size_t count() const;
    double pixel_size() const { return 1.0 / resolution; }

    friend bool operator==(const MaskImage&, const MaskImage&) = default;
};

PixelIndex world_to_pixel(const MaskImage& mask, Vec2 p);
/// Center of the pixel in world coordinates.
Vec2 pixel_to_world(const MaskImage& mask, PixelIndex px);

struct MaskEntry {
    int object_id = 0;
    MaskImage modal;
    MaskImage amodal;
    std::size_t modal_count = 0;
    std::size_t amodal_count = 0;
};

struct SegMasks {
    std::vector<MaskEntry> entries;
    /// Walls plus every active object's footprint.
    MaskImage occupancy;
    MaskImage walls;
    /// Top-most object id per pixel, -1 where nothing covers it.
    std::vector<int> owner;

    const MaskEntry* find(int id) const;
    const MaskEntry& at(int id) const;
    int owner_at(int row, int col) const { return owner[static_cast<std::size_t>(row) * occupancy.cols + col]; }
    /// Ids with at least one visible pixel, ascending.
    std::vector<int> visible_ids() const;
};

/// Orthographic top-down render: pixel centers inside a footprint (and inside
/// the walls) belong to that object's amodal mask; the highest layer wins the
/// modal assignment, ties going to the higher id.
SegMasks rasterize_scene(const SceneState& scene, double resolution = kDefaultResolution);

double visibility_ratio(const SegMasks& masks, int id);

}  // namespace mechsearch
