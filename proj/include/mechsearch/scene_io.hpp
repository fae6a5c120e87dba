#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mechsearch/scene.hpp"

namespace mechsearch {

inline constexpr const char* kSceneSchema = "mech-search/scene/1";

/// Scene snapshot layout:
///   {"schema": "mech-search/scene/1",
///    "bin": {"width", "depth", "wall"},
///    "target_id", "timestep", "initial_count",
///    "objects": [{"id", "layer", "ejected", "extracted",
///                 "pose": {"x", "y", "theta"},
///                 "shape": {"class", "height", "vertices": [[x, y], ...]}}]}
/// Lengths are meters, angles radians; vertices are in the object frame.
nlohmann::json scene_to_json(const SceneState& scene);
/// Throws BadSnapshot on any schema or invariant violation.
SceneState scene_from_json(const nlohmann::json& j);

void save_scene(const SceneState& scene, const std::filesystem::path& path);
SceneState load_scene(const std::filesystem::path& path);

/// Writes a 1-bit grayscale PNG (set bits white). Row 0 is written first.
void write_mask_png(const MaskImage& mask, const std::filesystem::path& path);

/// Dumps occupancy plus per-object modal/amodal PNGs into `dir`.
void dump_masks(const SegMasks& masks, const std::filesystem::path& dir);

}  // namespace mechsearch
