#pragma once

#include <array>
#include <cstdint>

#include "mechsearch/rng.hpp"
#include "mechsearch/scene.hpp"

namespace mechsearch {

/// Weights over {rectangle, ellipse, L-shape, T-shape}.
using ShapeMix = std::array<double, 4>;

struct HeapSpec {
    int n_objects = 15;
    double heap_center_sigma = 0.05;
    double offset_sigma = 0.06;
    std::uint64_t seed = 0;
    ShapeMix shape_mix{0.4, 0.3, 0.15, 0.15};
    /// Highest resting layer. An object that would land above it slides
    /// outward off the pile, standing in for the angle of repose.
    int max_layer = 1;
    Bin bin{};
    double resolution = kDefaultResolution;

    void validate() const;
};

/// Footprint area lands in [4, 100] cm^2, height in [1, 8] cm.
ObjectShape sample_shape(Rng& rng, const ShapeMix& mix);

/// Drops objects one by one at heap_center + offset. An object whose overlap
/// with some already-placed object exceeds the stacking fraction (of the
/// smaller footprint) rests one layer above the highest such object; otherwise it lands
/// on the floor and any residual overlap is removed by the smallest outward
/// translation found on a radial search. Objects that would rest above
/// max_layer slide outward until they find a lower resting place. Throws
/// BinOverflow when an object cannot be placed.
SceneState generate_heap(const HeapSpec& spec);

/// Least visible active object; ties go to the lowest id.
int select_target(const SceneState& scene, const SegMasks& masks);

}  // namespace mechsearch
