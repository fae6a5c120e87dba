#pragma once

#include <cstdint>
#include <optional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mechsearch/actions.hpp"
#include "mechsearch/planners.hpp"
#include "mechsearch/rng.hpp"
#include "mechsearch/scene.hpp"
#include "mechsearch/simphys.hpp"

namespace mechsearch {

enum class SelectionMethod { Random, PreemptedRandom, LargestFirst };

/// How the grasp pass walks the priority list: take the first object whose
/// better grasp clears its threshold, or the best threshold-clearing grasp
/// over the whole list.
enum class GraspPass { FirstFit, GlobalArgmax };

struct PolicyConfig {
    SelectionMethod method = SelectionMethod::LargestFirst;
    bool pushing = false;
    double t_thresh = 0.15;
    double t_high = 0.3;
    double recognition_visibility_threshold = 0.3;
    int push_consecutive_cap = 3;
    int timestep_factor = 2;
    std::uint64_t seed = 0;
    GraspPass grasp_pass = GraspPass::FirstFit;

    void validate() const;
    /// CLI name: random | prandom | prandom-push | largest | largest-push.
    std::string name() const;
    static PolicyConfig from_name(std::string_view name);
};

/// The five selection policies, in reporting order.
std::vector<std::string> policy_names();

nlohmann::json config_to_json(const PolicyConfig& c);
PolicyConfig config_from_json(const nlohmann::json& j);

struct PolicyState {
    int consecutive_pushes = 0;
    int steps_taken = 0;
    Rng rng;
    /// Objects whose grasp could not lift them, with their visible pixel count
    /// at that time. They are skipped until more of them becomes visible.
    std::map<int, std::size_t> lift_blocked;
};

enum class TerminationCause { Success, NoActionAvailable, TargetEjected, Timeout };

std::string_view to_string(TerminationCause c);
TerminationCause termination_from_string(std::string_view s);

/// Recognition stand-in: the target is identified iff enough of it is visible.
std::optional<int> recognize_target(const SegMasks& masks, int target_id, const PolicyConfig& config);

/// Throws EmptyScene when nothing is visible.
std::vector<int> priority_list(SelectionMethod method, const SegMasks& masks, std::optional<int> recognized, Rng& rng);

double grasp_threshold(int object_id, std::optional<int> recognized, const PolicyConfig& config);

struct Decision {
    std::optional<ActionPlan> plan;  // empty means Fail(NoActionAvailable)
    std::vector<int> priority;
    std::optional<int> recognized;

    bool execute() const { return plan.has_value(); }
};

Decision select_action(const SceneState& scene, const SegMasks& masks, const PolicyConfig& config, PolicyState& state,
                       const PlannerParams& planner = {});

/// Updates the per-rollout counters after a transition. `masks` is the
/// observation the plan was chosen from.
void record_transition(PolicyState& state, const SegMasks& masks, const ActionPlan& plan, const TransitionResult& result);

std::optional<TerminationCause> check_termination(const SceneState& next, const TransitionResult& result, const ActionPlan& plan,
                                                  std::optional<int> recognized, const PolicyState& state, const PolicyConfig& config);

/// Best grasp quality on the target, 0 when it is not visible.
double target_grasp_reliability(const SceneState& scene, const SegMasks& masks, int target_id, const PlannerParams& planner = {});

}  // namespace mechsearch
