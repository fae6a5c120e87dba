#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mechsearch/scene.hpp"

namespace fixtures {

using namespace mechsearch;

inline ObjectState rect(int id, double cx, double cy, double w, double h, int layer = 0, double height = 0.03, double theta = 0.0) {
    return ObjectState{id, ObjectShape(rectangle({-w / 2, -h / 2}, {w / 2, h / 2}), height, ShapeClass::Rectangle), {cx, cy, theta}, layer};
}

inline SceneState scene_of(std::vector<ObjectState> objects, int target_id, Bin bin = {}) {
    SceneState s;
    s.bin = bin;
    s.objects = std::move(objects);
    s.target_id = target_id;
    s.initial_count = static_cast<int>(s.objects.size());
    return s;
}

/// Pixel-center containment count, independent of the rasterizer.
inline std::size_t pixels_inside(const Polygon& poly, const Bin& bin, double resolution) {
    const int cols = static_cast<int>(std::lround(bin.width * resolution));
    const int rows = static_cast<int>(std::lround(bin.depth * resolution));
    std::size_t n = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (contains(poly, {(c + 0.5) / resolution, (r + 0.5) / resolution})) ++n;
        }
    }
    return n;
}

}  // namespace fixtures
