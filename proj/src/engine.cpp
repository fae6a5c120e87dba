#include "mechsearch/engine.hpp"

#include <cstdlib>
#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

EngineConfig EngineConfig::from_env() {
    EngineConfig c;
    if (const char* env = std::getenv("MECH_SEARCH_RESOLUTION"); env && *env) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(env, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || env[used] != '\0' || !(value > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, std::string("MECH_SEARCH_RESOLUTION must be a positive number, got '") + env + "'");
        }
        c.resolution = value;
    }
    return c;
}

TransitionResult execute_plan(const SceneState& scene, const ActionPlan& plan, Rng& physics_rng, const PhysicsParams& params) {
    if (plan.is_grasp()) return simulate_grasp(scene, plan, physics_rng, params);
    return simulate_push(scene, plan, params);
}

RolloutStreams make_streams(std::uint64_t policy_seed, std::uint64_t heap_seed) {
    const std::uint64_t base = derive_seed(policy_seed, heap_seed);
    return {Rng(derive_seed(base, 1)), Rng(derive_seed(base, 2))};
}

}  // namespace mechsearch
