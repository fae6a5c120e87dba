#include "mechsearch/policies.hpp"

#include <algorithm>
#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

using nlohmann::json;

namespace {

std::string_view method_key(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::Random: return "random";
        case SelectionMethod::PreemptedRandom: return "preempted_random";
        case SelectionMethod::LargestFirst: return "largest_first";
    }
    return "random";
}

SelectionMethod method_from_key(std::string_view s) {
    for (SelectionMethod m : {SelectionMethod::Random, SelectionMethod::PreemptedRandom, SelectionMethod::LargestFirst}) {
        if (method_key(m) == s) return m;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown selection method '" + std::string(s) + "'");
}

}  // namespace

void PolicyConfig::validate() const {
    if (!(0.0 <= t_thresh && t_thresh <= t_high && t_high <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "thresholds must satisfy 0 <= t_thresh <= t_high <= 1");
    }
    if (!(recognition_visibility_threshold >= 0.0 && recognition_visibility_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "recognition threshold must lie in [0, 1]");
    }
    if (push_consecutive_cap < 1 || timestep_factor < 1) throw Error(ErrorCode::InvalidConfig, "caps must be positive");
}

std::string PolicyConfig::name() const {
    switch (method) {
        case SelectionMethod::Random: return "random";
        case SelectionMethod::PreemptedRandom: return pushing ? "prandom-push" : "prandom";
        case SelectionMethod::LargestFirst: return pushing ? "largest-push" : "largest";
    }
    return "random";
}

PolicyConfig PolicyConfig::from_name(std::string_view name) {
    PolicyConfig c;
    if (name == "random") {
        c.method = SelectionMethod::Random;
    } else if (name == "prandom" || name == "prandom-push") {
        c.method = SelectionMethod::PreemptedRandom;
        c.pushing = name == "prandom-push";
    } else if (name == "largest" || name == "largest-push") {
        c.method = SelectionMethod::LargestFirst;
        c.pushing = name == "largest-push";
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown policy '" + std::string(name) + "'");
    }
    return c;
}

std::vector<std::string> policy_names() { return {"random", "prandom", "prandom-push", "largest", "largest-push"}; }

json config_to_json(const PolicyConfig& c) {
    return {
        {"name", c.name()},
        {"method", std::string(method_key(c.method))},
        {"pushing", c.pushing},
        {"t_thresh", c.t_thresh},
        {"t_high", c.t_high},
        {"recognition_visibility_threshold", c.recognition_visibility_threshold},
        {"push_consecutive_cap", c.push_consecutive_cap},
        {"timestep_factor", c.timestep_factor},
        {"seed", c.seed},
        {"grasp_pass", c.grasp_pass == GraspPass::FirstFit ? "first_fit" : "global_argmax"},
    };
}

PolicyConfig config_from_json(const json& j) {
    PolicyConfig c;
    c.method = method_from_key(j.at("method").get<std::string>());
    c.pushing = j.at("pushing").get<bool>();
    c.t_thresh = j.at("t_thresh").get<double>();
    c.t_high = j.at("t_high").get<double>();
    c.recognition_visibility_threshold = j.at("recognition_visibility_threshold").get<double>();
    c.push_consecutive_cap = j.at("push_consecutive_cap").get<int>();
    c.timestep_factor = j.at("timestep_factor").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.grasp_pass = j.at("grasp_pass").get<std::string>() == "global_argmax" ? GraspPass::GlobalArgmax : GraspPass::FirstFit;
    return c;
}

std::string_view to_string(TerminationCause c) {
    switch (c) {
        case TerminationCause::Success: return "Success";
        case TerminationCause::NoActionAvailable: return "NoActionAvailable";
        case TerminationCause::TargetEjected: return "TargetEjected";
        case TerminationCause::Timeout: return "Timeout";
    }
    return "Success";
}

TerminationCause termination_from_string(std::string_view s) {
    for (TerminationCause c : {TerminationCause::Success, TerminationCause::NoActionAvailable, TerminationCause::TargetEjected,
                               TerminationCause::Timeout}) {
        if (to_string(c) == s) return c;
    }
    throw Error(ErrorCode::BadRecord, "unknown termination cause '" + std::string(s) + "'");
}

std::optional<int> recognize_target(const SegMasks& masks, int target_id, const PolicyConfig& config) {
    const MaskEntry* e = masks.find(target_id);
    if (!e || e->modal_count == 0) return std::nullopt;
    if (visibility_ratio(masks, target_id) >= config.recognition_visibility_threshold) return target_id;
    return std::nullopt;
}

std::vector<int> priority_list(SelectionMethod method, const SegMasks& masks, std::optional<int> recognized, Rng& rng) {
    std::vector<int> ids = masks.visible_ids();
    if (ids.empty()) throw Error(ErrorCode::EmptyScene, "no visible object masks");
    if (method == SelectionMethod::Random) {
        rng.shuffle(ids);
        return ids;
    }
    std::optional<int> head;
    if (recognized) {
        const auto it = std::find(ids.begin(), ids.end(), *recognized);
        if (it != ids.end()) {
            head = *it;
            ids.erase(it);
        }
    }
    if (method == SelectionMethod::PreemptedRandom) {
        rng.shuffle(ids);
    } else {
        std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
            const std::size_t ca = masks.at(a).modal_count;
            const std::size_t cb = masks.at(b).modal_count;
            return ca != cb ? ca > cb : a < b;
        });
    }
    if (head) ids.insert(ids.begin(), *head);
    return ids;
}

double grasp_threshold(int object_id, std::optional<int> recognized, const PolicyConfig& config) {
    if (recognized && *recognized == object_id) return config.t_thresh;
    return config.pushing ? config.t_high : config.t_thresh;
}

Decision select_action(const SceneState& scene, const SegMasks& masks, const PolicyConfig& config, PolicyState& state,
                       const PlannerParams& planner_params) {
    Decision d;
    d.recognized = recognize_target(masks, scene.target_id, config);
    if (masks.visible_ids().empty()) return d;
    d.priority = priority_list(config.method, masks, d.recognized, state.rng);
    const Planner planner(scene, masks, planner_params);

    std::optional<ActionPlan> chosen;
    for (int id : d.priority) {
        if (const auto it = state.lift_blocked.find(id); it != state.lift_blocked.end() && masks.at(id).modal_count <= it->second) {
            continue;
        }
        ActionPlan jaw = planner.parallel_jaw(id);
        ActionPlan suction = planner.suction(id);
        ActionPlan& better = suction.quality >= jaw.quality ? suction : jaw;
        if (!(better.quality > grasp_threshold(id, d.recognized, config))) continue;
        if (config.grasp_pass == GraspPass::FirstFit) {
            d.plan = std::move(better);
            return d;
        }
        // Strictly greater keeps suction-over-jaw and earlier rank on ties.
        if (!chosen || better.quality > chosen->quality) chosen = std::move(better);
    }
    if (chosen) {
        d.plan = std::move(chosen);
        return d;
    }

    if (config.pushing && state.consecutive_pushes < config.push_consecutive_cap) {
        for (int id : d.priority) {
            ActionPlan push = planner.push(id);
            if (push.quality >= 1.0) {
                d.plan = std::move(push);
                return d;
            }
        }
    }
    return d;
}

void record_transition(PolicyState& state, const SegMasks& masks, const ActionPlan& plan, const TransitionResult& result) {
    ++state.steps_taken;
    state.consecutive_pushes = plan.primitive() == Primitive::Push ? state.consecutive_pushes + 1 : 0;
    if (result.outcome == Outcome::LiftBlocked) {
        const MaskEntry* e = masks.find(plan.goal_id);
        state.lift_blocked[plan.goal_id] = e ? e->modal_count : 0;
    }
}

std::optional<TerminationCause> check_termination(const SceneState& next, const TransitionResult& result, const ActionPlan& plan,
                                                  std::optional<int> recognized, const PolicyState& state, const PolicyConfig& config) {
    if (plan.is_grasp() && result.outcome == Outcome::GraspSucceeded && plan.goal_id == next.target_id && recognized == next.target_id) {
        return TerminationCause::Success;
    }
    const ObjectState* target = next.find(next.target_id);
    if (!target || !target->active()) return TerminationCause::TargetEjected;
    if (state.steps_taken >= config.timestep_factor * next.initial_count) return TerminationCause::Timeout;
    return std::nullopt;
}

double target_grasp_reliability(const SceneState& scene, const SegMasks& masks, int target_id, const PlannerParams& params) {
    const ObjectState* target = scene.find(target_id);
    const MaskEntry* e = masks.find(target_id);
    if (!target || !target->active() || !e || e->modal_count == 0) return 0.0;
    const Planner planner(scene, masks, params);
    return std::max(planner.parallel_jaw(target_id).quality, planner.suction(target_id).quality);
}

}  // namespace mechsearch
