#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mechsearch/actions.hpp"
#include "mechsearch/scene.hpp"

namespace mechsearch {

/// Euclidean distance (meters) from each pixel center to the nearest occupied
/// pixel center, aligned with the source mask.
struct DistanceField {
    int rows = 0;
    int cols = 0;
    double resolution = kDefaultResolution;
    Vec2 origin;
    std::vector<double> values;

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * cols + col]; }
};

/// Exact squared pixel distances to the nearest set cell of a row-major grid
/// (two-pass lower-envelope transform). Cells with no set cell anywhere in the
/// grid get a value larger than any real distance.
std::vector<std::int64_t> squared_distance_transform(const std::vector<std::uint8_t>& set, int rows, int cols);

DistanceField distance_transform(const MaskImage& occupancy);

/// World coordinate of the pixel with the largest distance, first in row-major
/// order on ties. Throws NoFreeSpace when that distance is below `min_clearance`.
Vec2 most_free_point(const DistanceField& field, double min_clearance);

struct PlannerParams {
    GripperGeometry gripper{};
    int grasp_candidates = 64;
    int push_angles = 36;
    double push_standoff_margin = 0.005;
    double com_tolerance = 0.005;
};

/// Answers grasp and push queries for one observation. The occupancy distance
/// field is computed on the first push query and reused afterwards.
class Planner {
public:
    Planner(const SceneState& scene, const SegMasks& masks, PlannerParams params = {});

    /// Antipodal candidates through the deepest point of the goal's modal mask,
    /// scored as visibility x finger clearance x (width fits the jaws).
    ActionPlan parallel_jaw(int goal_id) const;
    /// visibility x min(1, inscribed radius / cup radius), vertical approach.
    ActionPlan suction(int goal_id) const;
    /// Quality 1 for the feasible start (on a standoff circle, gripper clear,
    /// segment through the centroid) whose direction deviates least from the
    /// centroid-to-most-free-point direction; quality 0 when none is feasible.
    ActionPlan push(int goal_id) const;

    const DistanceField& free_space() const;
    const PlannerParams& params() const { return params_; }

private:
    double goal_elevation(int goal_id) const;
    double goal_top(int goal_id) const;

    const SceneState& scene_;
    const SegMasks& masks_;
    PlannerParams params_;
    std::vector<double> elevation_;
    mutable std::shared_ptr<const DistanceField> free_space_;
};

ActionPlan plan_parallel_jaw(const SceneState& scene, const SegMasks& masks, int goal_id, const PlannerParams& params = {});
ActionPlan plan_suction(const SceneState& scene, const SegMasks& masks, int goal_id, const PlannerParams& params = {});
ActionPlan plan_push(const SceneState& scene, const SegMasks& masks, int goal_id, const PlannerParams& params = {});

}  // namespace mechsearch
