#include "mechsearch/actions.hpp"

#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

using nlohmann::json;

std::string_view to_string(Primitive p) {
    switch (p) {
        case Primitive::ParallelJaw: return "parallel_jaw";
        case Primitive::Suction: return "suction";
        case Primitive::Push: return "push";
    }
    return "push";
}

Primitive primitive_from_string(std::string_view s) {
    if (s == "parallel_jaw") return Primitive::ParallelJaw;
    if (s == "suction") return Primitive::Suction;
    if (s == "push") return Primitive::Push;
    throw Error(ErrorCode::BadRequest, "unknown primitive '" + std::string(s) + "'");
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

json plan_to_json(const ActionPlan& plan) {
    json j{{"primitive", std::string(to_string(plan.primitive()))}, {"quality", plan.quality}, {"goal_id", plan.goal_id}};
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ParallelJawGrasp>) {
                j["p"] = vec3_json(a.p);
                j["phi"] = a.phi;
            } else if constexpr (std::is_same_v<T, SuctionGrasp>) {
                j["p"] = vec3_json(a.p);
                j["phi"] = a.phi;
                j["theta"] = a.theta;
            } else {
                j["p"] = vec3_json(a.p);
                j["p_prime"] = vec3_json(a.p_prime);
            }
        },
        plan.action);
    return j;
}

ActionPlan plan_from_json(const json& j) {
    ActionPlan plan;
    plan.quality = j.at("quality").get<double>();
    plan.goal_id = j.at("goal_id").get<int>();
    switch (primitive_from_string(j.at("primitive").get<std::string>())) {
        case Primitive::ParallelJaw:
            plan.action = ParallelJawGrasp{vec3_from(j.at("p")), j.at("phi").get<double>()};
            break;
        case Primitive::Suction:
            plan.action = SuctionGrasp{vec3_from(j.at("p")), j.at("phi").get<double>(), j.at("theta").get<double>()};
            break;
        case Primitive::Push:
            plan.action = Push{vec3_from(j.at("p")), vec3_from(j.at("p_prime"))};
            break;
    }
    return plan;
}

Polygon push_footprint(Vec2 tip, Vec2 dir, const GripperGeometry& g) {
    return oriented_rectangle(tip, dir, -g.push_length, 0.0, g.push_half_width());
}

}  // namespace mechsearch
