#pragma once

#include <cstdint>

#include "mechsearch/actions.hpp"
#include "mechsearch/planners.hpp"
#include "mechsearch/rng.hpp"
#include "mechsearch/scene.hpp"
#include "mechsearch/simphys.hpp"

namespace mechsearch {

/// Settings shared by headless rollouts and interactive sessions.
struct EngineConfig {
    double resolution = kDefaultResolution;
    PhysicsParams physics{};
    PlannerParams planner{};

    /// Defaults, with MECH_SEARCH_RESOLUTION (pixels per meter) applied when set.
    static EngineConfig from_env();
};

/// Routes a plan to the grasp or push transition.
TransitionResult execute_plan(const SceneState& scene, const ActionPlan& plan, Rng& physics_rng, const PhysicsParams& params);

/// Independent random streams for one rollout. Both depend only on the
/// policy seed and the heap seed, never on scheduling.
struct RolloutStreams {
    Rng policy;
    Rng physics;
};

RolloutStreams make_streams(std::uint64_t policy_seed, std::uint64_t heap_seed);

}  // namespace mechsearch
