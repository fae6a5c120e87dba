#pragma once

#include <string_view>
#include <vector>

#include "mechsearch/actions.hpp"
#include "mechsearch/rng.hpp"
#include "mechsearch/scene.hpp"

namespace mechsearch {

struct PhysicsParams {
    /// An object cannot be lifted when higher-layer footprints cover more than
    /// this fraction of its own area. Anything with about a third of its top
    /// exposed can be pulled out from under its neighbors.
    double lift_block_fraction = 0.7;
    /// Pushed objects are clamped at the wall unless the push would carry them
    /// more than this far past it, in which case they leave the bin.
    double ejection_margin = 0.02;
    GripperGeometry gripper{};
};

enum class Outcome { GraspSucceeded, GraspFailed, LiftBlocked, PushExecuted, PushRejected, ObjectEjected };

std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

struct TransitionResult {
    SceneState next_scene;
    Outcome outcome = Outcome::PushExecuted;
    /// Objects whose pose, layer, or status changed.
    std::vector<int> moved_ids;
    /// Payload of ObjectEjected.
    std::vector<int> ejected_ids;
};

bool is_liftable(const SceneState& scene, int id, const PhysicsParams& params = {});

/// Lift check, then a Bernoulli(quality) draw from `rng` for liftable objects.
/// Throws InvalidPlan for non-grasp plans, qualities outside [0, 1], or a goal
/// that is missing or no longer in the bin.
TransitionResult simulate_grasp(const SceneState& scene, const ActionPlan& plan, Rng& rng, const PhysicsParams& params = {});

/// Sweeps the closed-gripper footprint from p to p'. Quality-0 plans are
/// reported as PushRejected without touching the scene. Throws StartCollision
/// when the footprint at p overlaps a wall or an object.
TransitionResult simulate_push(const SceneState& scene, const ActionPlan& plan, const PhysicsParams& params = {});

/// Drops unsupported objects to the highest layer that still supports them.
/// Each change strictly lowers one layer, so the loop terminates; the result
/// is a fixpoint, which makes the operation idempotent.
SceneState resettle(SceneState scene);

}  // namespace mechsearch
